import json
import os

import pytest

from scenario_challenge.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_builtin(capsys):
    code, out, _ = run(capsys, "analyze", "--builtin", "a")
    assert code == 0
    assert json.loads(out)["num_lane_changes"] == 1


@pytest.mark.parametrize("name", ["a", "b", "c", "d"])
def test_generate_then_analyze_matches_builtin(capsys, tmp_path, name):
    path = str(tmp_path / f"{name}.json")
    assert run(capsys, "generate", name, path)[0] == 0
    _, from_file, _ = run(capsys, "analyze", "--file", path)
    _, builtin, _ = run(capsys, "analyze", "--builtin", name)
    assert from_file == builtin


def test_generate_layouts(capsys, tmp_path):
    run(capsys, "generate", "a", str(tmp_path / "a.json"))
    run(capsys, "generate", "b", str(tmp_path / "b.json"))
    a = json.loads((tmp_path / "a.json").read_text())
    b = json.loads((tmp_path / "b.json").read_text())
    assert len(a["obstacles"]) == 1
    starts = sorted(o["trajectory"][0]["s_m"] for o in b["obstacles"])
    assert starts == [100.0, 375.0, 410.0, 500.0]


def test_missing_dt_is_parse_error(capsys, tmp_path):
    run(capsys, "generate", "a", str(tmp_path / "a.json"))
    doc = json.loads((tmp_path / "a.json").read_text())
    del doc["dt_s"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, out, err = run(capsys, "analyze", "--file", str(bad))
    assert code == 3 and out == ""
    assert json.loads(err)["error"] == "parse"


def test_validation_error_exit_code(capsys, tmp_path):
    run(capsys, "generate", "a", str(tmp_path / "a.json"))
    doc = json.loads((tmp_path / "a.json").read_text())
    doc["road"]["lane_width_m"] = 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, _, err = run(capsys, "analyze", "--file", str(bad))
    assert code == 4 and json.loads(err)["error"] == "validation"


def test_missing_file_is_io_error(capsys, tmp_path):
    code, _, err = run(capsys, "analyze", "--file", str(tmp_path / "nope.json"))
    assert code == 1 and json.loads(err)["error"] == "io"


def test_usage_errors(capsys):
    assert run(capsys, "analyze")[0] == 2
    assert run(capsys, "analyze", "--builtin", "a", "--blocked")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["analyze", "--builtin", "z"])
    assert exc.value.code == 2


def test_blocked_d(capsys):
    code, out, _ = run(capsys, "analyze", "--builtin", "d", "--blocked")
    assert code == 0 and json.loads(out)["case"] == "MRM_REQUIRED"


def test_dump_layers_and_render(capsys, tmp_path):
    layers = tmp_path / "layers"
    svg = tmp_path / "out" / "c.svg"
    code, out, _ = run(capsys, "analyze", "--builtin", "c", "--dump-layers", str(layers),
                       "--render", str(svg))
    assert code == 0 and json.loads(out)["case"] == "NO_LANE_CHANGE"
    names = sorted(os.listdir(layers))
    assert len(names) == 261 and names[0] == "layer_0000.json"
    rec = json.loads((layers / "layer_0100.json").read_text())
    assert rec["k"] == 100 and {"x_lo", "x_hi", "y_lo", "y_hi", "parents"} <= set(rec["cells"][0])
    assert svg.read_text().startswith("<svg ")


def _bounds_file(tmp_path, **over):
    doc = {"vs_min_mps": 16.6667, "vs_max_mps": 36.1111, "vt_min_mps": -2.0, "vt_max_mps": 2.0,
           "as_min_mps2": -4.0, "as_max_mps2": 4.0, "at_min_mps2": -2.0, "at_max_mps2": 2.0}
    doc.update(over)
    path = tmp_path / "bounds.json"
    path.write_text(json.dumps({"bounds": doc}))
    return str(path)


def test_bounds_override(capsys, tmp_path):
    _, base, _ = run(capsys, "analyze", "--builtin", "a")
    code, out, _ = run(capsys, "analyze", "--builtin", "a", "--bounds",
                       _bounds_file(tmp_path, at_min_mps2=-1.0, at_max_mps2=1.0))
    assert code == 0 and out != base
    assert json.loads(out)["num_lane_changes"] == 1


def test_bounds_override_rejecting_initial_state(capsys, tmp_path):
    code, _, err = run(capsys, "analyze", "--builtin", "a", "--bounds",
                       _bounds_file(tmp_path, vs_max_mps=20.0))
    assert code == 4 and json.loads(err)["error"] == "validation"


def test_batch_order_with_jobs(capsys, tmp_path):
    paths = []
    for name in ("c", "a"):
        p = str(tmp_path / f"{name}.json")
        run(capsys, "generate", name, p)
        paths.append(p)
    args = ["analyze", "--file", paths[0], "--file", paths[1]]
    _, serial, _ = run(capsys, *args)
    _, parallel, _ = run(capsys, *args, "--jobs", "2")
    assert serial == parallel
    assert [d["num_lane_changes"] for d in json.loads(serial)] == [0, 1]


def test_samples_audit(capsys):
    code, out, _ = run(capsys, "analyze", "--builtin", "a", "--samples", "200", "--seed", "3")
    assert json.loads(out)["diagnostics"]["soundness"] == {"samples": 200, "seed": 3, "uncovered_states": 0}


def test_generate_unwritable(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run(capsys, "generate", "a", str(blocker / "x.json"))
    assert code == 1
