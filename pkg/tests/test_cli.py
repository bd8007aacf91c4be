import io
import json

import pytest

from retfront.cli import FALSE, INTERNAL, OK, USAGE, cmd_list, main, parse_signs, resolve


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list_all(capsys):
    code, out, _ = run(["list"], capsys)
    assert code == OK
    labels = [line.split()[0] for line in out.splitlines()[1:] if line and not line.startswith(" ")]
    assert len(labels) == 16


def test_list_filters(capsys):
    code, out, _ = run(["list", "--r", "1"], capsys)
    assert code == OK and len(out.splitlines()) == 1 + 6 + 2       # header, rows, 2 extra variants
    code, out, _ = run(["list", "--r", "2"], capsys)
    assert code == OK and "no catalog entries" in out
    code, out, _ = run(["list", "--format", "json"], capsys)
    assert len(json.loads(out)) == 16


def test_check_ok(capsys):
    code, out, _ = run(["check", "--label", "2A2", "--l", "2"], capsys)
    assert code == OK
    rep = json.loads(out)
    assert rep["verdict"] and rep["stability"]["verdict"] and rep["versality"]["verdict"]


def test_check_tampered_formula(capsys):
    code, out, _ = run(["check", "--label", "2A1", "--formula", "y1^2 + t1 + u1^3"], capsys)
    assert code == FALSE
    assert json.loads(out)["versality"]["witness"] == ["u1"]


def test_check_bad_l(capsys):
    code, _, err = run(["check", "--label", "2A2", "--l", "9"], capsys)
    assert code == USAGE and "admissible" in err


def test_usage_errors(capsys):
    assert run(["bogus"], capsys)[0] == USAGE
    assert run(["check"], capsys)[0] == USAGE
    assert run(["check", "--label", "2Q1"], capsys)[0] == USAGE
    assert run(["check", "--label", "2A2", "--formula", "y1^^2"], capsys)[0] == USAGE
    assert run(["atlas", "--label", "2A1", "--format", "png"], capsys)[0] == USAGE


def test_exit_code_constants():
    assert (OK, FALSE, USAGE, INTERNAL) == (0, 1, 2, 3)


def test_signs():
    assert parse_signs("+,-") == (1, -1)
    assert parse_signs("+-+") == (1, -1, 1)
    assert parse_signs("") == ()


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("label = 2A2\nres = 33\ndelta = 0.25\n")
    c = resolve(["atlas", "--config", str(cfg), "--res", "21"])
    assert c.label == "2A2" and c.res == 21 and c.delta == 0.25
    cfg.write_text(json.dumps({"label": "2B2", "res": 17}))
    c = resolve(["atlas", "--config", str(cfg)])
    assert c.label == "2B2" and c.res == 17


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("colour = red\n")
    assert run(["atlas", "--config", str(cfg)], capsys)[0] == USAGE


def _tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_atlas_outputs_and_manifest_round_trip(tmp_path, capsys):
    out = tmp_path / "o"
    code, _, _ = run(["atlas", "--label", "2B2", "--res", "21", "--out", str(out)], capsys)
    assert code == OK
    d = out / "2B2"
    names = set(_tree(d))
    assert {"atlas.svg", "manifest.json", "index.html", "bundle/atlas.json"} <= names
    assert sum(n.startswith("meshes/") for n in names) == 9
    manifest = json.loads((d / "manifest.json").read_text())
    assert manifest["config"]["res"] == 21 and manifest["config"]["l"] == 2
    first = _tree(out)
    code, _, _ = run(["atlas", "--config", str(d / "manifest.json")], capsys)
    assert code == OK
    assert _tree(out) == first


def test_atlas_delta_zero_identical_panels(tmp_path, capsys):
    out = tmp_path / "o"
    code, _, _ = run(["atlas", "--label", "2A1", "--delta", "0", "--res", "21", "--out", str(out),
                      "--format", "json"], capsys)
    assert code == OK
    panels = sorted((out / "2A1" / "bundle").glob("panel_*.json"))
    assert len(panels) == 9
    bodies = {json.dumps(json.loads(p.read_text())["sheets"]) for p in panels}
    assert len(bodies) == 1


def test_atlas_C3_minus_caption(tmp_path, capsys):
    out = tmp_path / "o"
    assert run(["atlas", "--label", "2C3-", "--res", "21", "--out", str(out), "--format", "svg"],
               capsys)[0] == OK
    assert ">²C₃⁻<" in (out / "2C3-" / "atlas.svg").read_text(encoding="utf-8")


def test_list_to_stream():
    buf = io.StringIO()
    cfg = resolve(["list", "--r", "0"])
    assert cmd_list(cfg, buf) == OK
    assert buf.getvalue().count("\n2") == 10
