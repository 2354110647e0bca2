"""Technology rules: routing grid step, layer stack, wire geometry and DRC parameters.

All lengths are in microns. The bundled ``desk-tech.json`` uses a 1 micron
grid step so that lengths and grid steps coincide, which keeps hand-checked
test scenarios readable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources


class TechError(ValueError):
    """Raised for malformed or inconsistent technology files."""


@dataclass(frozen=True)
class LayerRule:
    """One routing metal layer: preferred direction and minimum wire width."""

    direction: str  # "h" or "v"
    width: float

    def __post_init__(self):
        if self.direction not in ("h", "v"):
            raise TechError(f"layer direction must be 'h' or 'v', got {self.direction!r}")
        if self.width <= 0:
            raise TechError("layer width must be positive")


@dataclass(frozen=True)
class TechRules:
    """Routing and DRC parameters.

    ``grid_step`` is the spacing between two routing vertices, i.e. the
    minimum valid spacing between two physical components.  ``eol_*`` and
    ``par_*`` parameterize the end-of-line spacing rule; ``parallel_spacing``
    is the fixed minimum spacing between parallel wires.
    """

    grid_step: float = 1.0
    layers: tuple[LayerRule, ...] = (LayerRule("h", 1.0), LayerRule("v", 1.0))
    via_cost: float = 10.0
    drc_penalty: float = 1000.0
    bend_penalty: float = 2.0
    min_wire_length: float = 2.0
    min_wire_area: float = 2.0
    eol_space: float = 2.0
    eol_within: float = 1.0
    par_width: float = 3.0
    par_space: float = 2.0
    parallel_spacing: float = 2.0
    bend_cap: int = 4
    # Wire widening for supply nets is config-ready but off by default.
    power_width_scale: float = 1.0

    def __post_init__(self):
        if self.grid_step <= 0:
            raise TechError("grid_step must be positive")
        if len(self.layers) != 2:
            raise TechError("exactly two routing layers are supported")
        if self.layers[0].direction == self.layers[1].direction:
            raise TechError("the two layers must have orthogonal directions")
        for name in ("min_wire_length", "min_wire_area", "eol_space",
                     "eol_within", "par_width", "par_space", "parallel_spacing"):
            if getattr(self, name) <= 0:
                raise TechError(f"{name} must be positive")
        if self.via_cost < 0 or self.drc_penalty < 0 or self.bend_penalty < 0:
            raise TechError("costs must be non-negative")

    def wire_width(self, layer: int) -> float:
        return self.layers[layer].width

    @property
    def max_wire_width(self) -> float:
        return max(l.width for l in self.layers)

    def net_width(self, kind: str = "signal") -> float:
        scale = self.power_width_scale if kind in ("power", "ground") else 1.0
        return self.max_wire_width * scale

    def net_spacing(self, kind: str = "signal") -> float:
        return self.parallel_spacing

    def to_dict(self) -> dict:
        return {
            "grid_step": self.grid_step,
            "layers": [{"dir": l.direction, "width": l.width} for l in self.layers],
            "via_cost": self.via_cost,
            "drc_penalty": self.drc_penalty,
            "bend_penalty": self.bend_penalty,
            "min_wire_length": self.min_wire_length,
            "min_wire_area": self.min_wire_area,
            "eol": {
                "space": self.eol_space,
                "within": self.eol_within,
                "par_width": self.par_width,
                "par_space": self.par_space,
            },
            "parallel_spacing": self.parallel_spacing,
        }


def tech_from_dict(data: dict) -> TechRules:
    try:
        eol = data.get("eol", {})
        return TechRules(
            grid_step=data["grid_step"],
            layers=tuple(LayerRule(l["dir"], l["width"]) for l in data["layers"]),
            via_cost=data.get("via_cost", 10.0),
            drc_penalty=data.get("drc_penalty", 1000.0),
            bend_penalty=data.get("bend_penalty", 2.0),
            min_wire_length=data["min_wire_length"],
            min_wire_area=data["min_wire_area"],
            eol_space=eol.get("space", 2.0),
            eol_within=eol.get("within", 1.0),
            par_width=eol.get("par_width", 3.0),
            par_space=eol.get("par_space", 2.0),
            parallel_spacing=data["parallel_spacing"],
            bend_cap=data.get("bend_cap", 4),
        )
    except KeyError as exc:
        raise TechError(f"missing tech field: {exc.args[0]}") from exc


def load_tech(path: str) -> TechRules:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TechError(f"malformed tech JSON {path}: {exc}") from exc
    return tech_from_dict(data)


def desk_tech() -> TechRules:
    """The bundled desk-scale rule set used by tests and the CLI default."""
    with resources.files("apnr.data").joinpath("desk-tech.json").open() as fh:
        return tech_from_dict(json.load(fh))
