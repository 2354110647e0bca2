import json
import xml.etree.ElementTree as ET

import pytest

from apnr import save_netlist
from apnr.cli import main


@pytest.fixture
def netlist_path(tmp_path, pair_netlist):
    path = tmp_path / "pair.json"
    save_netlist(pair_netlist, str(path))
    return str(path)


def _place(netlist_path, out_dir, *extra):
    return main(["--out-dir", str(out_dir), "place", netlist_path,
                 "--grid", "32", "--pitch", "2", *extra])


def test_place_writes_layout(tmp_path, netlist_path):
    assert _place(netlist_path, tmp_path) == 0
    data = json.loads((tmp_path / "layout.json").read_text())
    assert data["format_version"] == 1
    assert set(data["placements"]) == {"m0", "m1"}
    assert data["metrics"]["hpwl_um"] > 0


def test_place_byte_identical_reruns(tmp_path, netlist_path):
    _place(netlist_path, tmp_path / "a")
    _place(netlist_path, tmp_path / "b")
    assert (tmp_path / "a/layout.json").read_bytes() \
        == (tmp_path / "b/layout.json").read_bytes()


def test_place_stall_exit_code(tmp_path, netlist_path):
    # an 8x8 grid cannot hold both padded devices
    rc = main(["--out-dir", str(tmp_path), "place", netlist_path,
               "--grid", "8", "--pitch", "2"])
    assert rc == 2
    assert not (tmp_path / "layout.json").exists()


def test_route_and_drc_report_and_render(tmp_path, netlist_path):
    assert _place(netlist_path, tmp_path) == 0
    layout = str(tmp_path / "layout.json")
    assert main(["--out-dir", str(tmp_path), "route", layout]) == 0
    routed = json.loads((tmp_path / "routed.json").read_text())
    assert routed["routing"]["failed"] is False
    assert routed["routing"]["net_status"] == {"n0": "routed"}
    assert routed["routes"]["n0"]["chains"]

    assert main(["--out-dir", str(tmp_path), "drc-report",
                 str(tmp_path / "routed.json")]) == 0
    report = json.loads((tmp_path / "drc_report.json").read_text())
    assert report["total"] == 0

    assert main(["--out-dir", str(tmp_path), "render",
                 str(tmp_path / "routed.json")]) == 0
    svg = (tmp_path / "layout.svg").read_text()
    ET.fromstring(svg)  # well-formed


def test_pnr_end_to_end_deterministic(tmp_path, netlist_path):
    for sub in ("a", "b"):
        rc = main(["--out-dir", str(tmp_path / sub), "--seed", "42", "pnr",
                   netlist_path, "--grid", "32", "--pitch", "2"])
        assert rc == 0
    assert (tmp_path / "a/routed.json").read_bytes() \
        == (tmp_path / "b/routed.json").read_bytes()


def test_sa_driver_runs(tmp_path, netlist_path):
    rc = _place(netlist_path, tmp_path, "--driver", "sa",
                "--sa-budget", "300", "--restarts", "1")
    assert rc == 0


def test_replay_driver_round_trips(tmp_path, netlist_path):
    _place(netlist_path, tmp_path)
    layout = str(tmp_path / "layout.json")
    out2 = tmp_path / "replayed"
    rc = main(["--out-dir", str(out2), "place", netlist_path,
               "--grid", "32", "--pitch", "2", "--driver", "replay",
               "--layout", layout])
    assert rc == 0
    a = json.loads((tmp_path / "layout.json").read_text())
    b = json.loads((out2 / "layout.json").read_text())
    assert a["placements"] == b["placements"]


def test_replay_without_layout_is_an_input_error(tmp_path, netlist_path, capsys):
    rc = _place(netlist_path, tmp_path, "--driver", "replay")
    assert rc == 1
    assert "replay driver needs --layout" in capsys.readouterr().err


def test_bad_format_version_rejected(tmp_path):
    path = tmp_path / "layout.json"
    path.write_text(json.dumps({"format_version": 99}))
    rc = main(["--out-dir", str(tmp_path), "route", str(path)])
    assert rc == 1


def test_bench_small_corpus(tmp_path):
    rc = main(["--out-dir", str(tmp_path), "--json-logs", "bench",
               "--count", "3"])
    assert rc == 0
    data = json.loads((tmp_path / "bench.json").read_text())
    assert len(data["reports"]) == 3
    assert data["aggregate"]["failure_rate_pct"] == 0.0
    assert all("runtime_s" not in r for r in data["reports"])
