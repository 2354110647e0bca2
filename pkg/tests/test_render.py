import xml.etree.ElementTree as ET

from apnr import Chain, Placement, Route, WireSeg, desk_tech, render_svg


def _count(svg, cls):
    root = ET.fromstring(svg)
    return sum(1 for el in root.iter()
               if el.get("class", "").startswith(cls))


def test_empty_layout_is_valid_svg():
    svg = render_svg({}, {}, desk_tech(), cell_pitch=1.0)
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg") and root.get("viewBox")


def test_single_device_and_wire_counts():
    placements = {"m0": Placement("m0", 0, 2, 2, 1, 1, 3, 3)}
    seg = WireSeg(0, 6, 3, 10, 3, 1.0)
    routes = {"n0": Route("n0", [Chain([seg], [], seg.vertices(), 4.0)])}
    svg = render_svg(placements, routes, desk_tech(), cell_pitch=1.0)
    assert _count(svg, "device") == 1
    assert _count(svg, "halo") == 1
    assert _count(svg, "label") == 1
    assert _count(svg, "wire") == 1
    assert _count(svg, "via") == 0
    assert "m0" in svg


def test_element_counts_match_layout():
    placements = {f"m{i}": Placement(f"m{i}", 0, 2 + 6 * i, 2, 1, 1, 3, 3)
                  for i in range(3)}
    chain = Chain([WireSeg(0, 0, 8, 4, 8, 1.0), WireSeg(1, 4, 8, 4, 12, 1.0)],
                  [(4, 8)], [], 0.0)
    routes = {"n0": Route("n0", [chain]),
              "n1": Route("n1", [Chain([WireSeg(0, 0, 14, 6, 14, 1.0)], [], [], 0.0)])}
    svg = render_svg(placements, routes, desk_tech(), cell_pitch=1.0)
    assert _count(svg, "device") == 3
    assert _count(svg, "wire l0") == 2
    assert _count(svg, "wire l1") == 1
    assert _count(svg, "via") == 1


def test_render_deterministic():
    placements = {"b": Placement("b", 0, 8, 2, 1, 1, 3, 3),
                  "a": Placement("a", 0, 2, 2, 1, 1, 3, 3)}
    a = render_svg(placements, {}, desk_tech(), cell_pitch=2.0)
    b = render_svg(dict(reversed(list(placements.items()))), {}, desk_tech(),
                   cell_pitch=2.0)
    assert a == b
