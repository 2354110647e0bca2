import pytest

from apnr import GridConfig, desk_tech, netlist_from_dict


def _dev(idx, w, h, pins, variants=None, subblock="core", cls=0):
    return {
        "id": f"m{idx}", "name": f"M{idx}",
        "variants": variants or [[w, h]],
        "class": cls, "subblock": subblock,
        "pins": pins,
    }


def _pin(dev, name, dx, dy, direction, kind="signal"):
    return {"id": f"m{dev}_{name}", "dx": dx, "dy": dy, "dir": direction,
            "kind": kind, "layers": [0, 1]}


@pytest.fixture
def ota_netlist():
    """An eight-device two-stage-amplifier-shaped fixture.

    Two matched input devices, two mirror loads, a tail source, a second
    stage, a compensation cap and a bias device; one symmetry pair and one
    alignment triple.
    """
    devices = [
        _dev(0, 4, 6, [_pin(0, "g", 0, 2, "horizontal"),
                       _pin(0, "d", 2, 5, "vertical")],
             variants=[[4, 6], [6, 4]], subblock="input"),
        _dev(1, 4, 6, [_pin(1, "g", 3, 2, "horizontal"),
                       _pin(1, "d", 2, 5, "vertical")],
             variants=[[4, 6], [6, 4]], subblock="input"),
        _dev(2, 4, 4, [_pin(2, "d", 1, 0, "vertical")], subblock="load", cls=1),
        _dev(3, 4, 4, [_pin(3, "d", 1, 0, "vertical")], subblock="load", cls=1),
        _dev(4, 6, 4, [_pin(4, "b", 0, 1, "horizontal")], subblock="tail", cls=2),
        _dev(5, 5, 5, [_pin(5, "g", 0, 2, "horizontal"),
                       _pin(5, "d", 2, 4, "vertical")], subblock="out", cls=3),
        _dev(6, 3, 3, [_pin(6, "a", 0, 1, "horizontal")], subblock="out", cls=4),
        _dev(7, 3, 4, [_pin(7, "b", 2, 1, "horizontal")], subblock="bias", cls=2),
    ]
    nets = [
        {"id": "n_inp", "kind": "signal", "pins": ["m0_g"]},
        {"id": "n_inn", "kind": "signal", "pins": ["m1_g"]},
        {"id": "n_x", "kind": "signal", "pins": ["m0_d", "m2_d", "m5_g"]},
        {"id": "n_y", "kind": "signal", "pins": ["m1_d", "m3_d"]},
        {"id": "n_out", "kind": "signal", "pins": ["m5_d", "m6_a"]},
        {"id": "n_bias", "kind": "signal", "pins": ["m4_b", "m7_b"]},
    ]
    constraints = [
        {"kind": "symmetry", "axis": "vertical", "members": ["m0", "m1"]},
        {"kind": "alignment", "axis": "horizontal", "members": ["m2", "m3"]},
    ]
    return netlist_from_dict(
        {"devices": devices, "nets": nets, "constraints": constraints})


@pytest.fixture
def pair_netlist():
    """Two devices joined by one two-pin net; small enough for brute force."""
    devices = [
        _dev(0, 3, 3, [_pin(0, "a", 2, 1, "horizontal")]),
        _dev(1, 3, 3, [_pin(1, "a", 0, 1, "horizontal")]),
    ]
    nets = [{"id": "n0", "kind": "signal", "pins": ["m0_a", "m1_a"]}]
    return netlist_from_dict({"devices": devices, "nets": nets,
                              "constraints": []})


@pytest.fixture
def tech():
    return desk_tech()


@pytest.fixture
def small_grid():
    return GridConfig(resolution=32, cell_pitch=1.0)
