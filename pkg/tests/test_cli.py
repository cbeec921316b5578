import json
from pathlib import Path

import pytest

from src import __version__
from src.cli import EXIT_EXPECTATION, EXIT_OK, EXIT_USAGE, main, render_text
from src.models import Report
from src.services import commands, spaces

SCHEMA = Path(__file__).resolve().parent.parent / "schemas" / "report.schema.json"


def run_json(capsys, argv):
    code = main(argv + ["--json"])
    return code, json.loads(capsys.readouterr().out)


def test_classify_json(capsys):
    code, report = run_json(capsys, ["classify", "--fn", "max", "--arity", "2", "--samples", "2000", "--seed", "7"])
    assert code == EXIT_OK
    assert report["command"] == "classify"
    assert report["seed"] == 7
    assert report["inputs"]["samples"] == 2000
    assert report["results"]["verdicts"]["triplet_preserving"]["status"] == "consistent"


def test_classify_is_reproducible(capsys):
    argv = ["classify", "--fn", "proj(2)", "--samples", "1500"]
    _, first = run_json(capsys, argv)
    _, second = run_json(capsys, argv)
    assert first == second


def test_classify_text(capsys):
    assert main(["classify", "--fn", "indicator", "--samples", "1000"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("indicator (arity 2), seed 42")
    assert "zero_preimage_trivial" in out
    assert "classes:" in out


def test_parse_error_exits_with_usage(capsys):
    assert main(["classify", "--fn", "wsum(1,"]) == EXIT_USAGE
    assert "position" in capsys.readouterr().err


def test_unknown_choice_is_an_argparse_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["demo", "--name", "nope"])
    assert info.value.code == EXIT_USAGE


def test_axioms_from_space_files(tmp_path, capsys):
    one, two = tmp_path / "oneway.json", tmp_path / "discrete.json"
    spaces.dump_space(spaces.oneway(2), one)
    spaces.dump_space(spaces.discrete(2), two)
    code, report = run_json(capsys, ["axioms", "--fn", "max", "--space", str(one), "--space", str(two)])
    assert code == EXIT_OK
    assert report["results"]["axiom_class"] == "quasi_metric"
    assert report["inputs"]["mode"] == "products"


def test_axioms_counterexample(tmp_path, capsys):
    line = tmp_path / "line.json"
    spaces.dump_space(spaces.euclid_points([0, 1, 2]), line)
    code, report = run_json(capsys, ["axioms", "--fn", "square", "--mode", "sets", "--space", str(line)])
    assert code == EXIT_OK
    assert report["results"]["axiom_class"] is None
    assert report["results"]["violations"][0]["witness"] == [0, 1, 2]


def test_topology_from_space_files(tmp_path, capsys):
    paths = []
    for name, space in (("discrete", spaces.discrete(2)), ("indiscrete", spaces.indiscrete(2))):
        paths += ["--space", str(tmp_path / f"{name}.json")]
        spaces.dump_space(space, tmp_path / f"{name}.json")
    code, report = run_json(capsys, ["topology", "--fn", "proj(2)", "--mode", "sets"] + paths)
    assert code == EXIT_OK
    assert report["results"]["order"] == "second_coarser_strict"


def test_missing_space_file(tmp_path, capsys):
    assert main(["axioms", "--fn", "max", "--space", str(tmp_path / "missing.json")]) == EXIT_USAGE


def test_invalid_space_file(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"points": ["a", "b"], "matrix": [[0, 3], [1, 0]], "extra": 1}))
    other = tmp_path / "ok.json"
    spaces.dump_space(spaces.discrete(2), other)
    assert main(["axioms", "--fn", "max", "--space", str(path), "--space", str(other)]) == EXIT_OK
    path.write_text(json.dumps({"points": ["a", "b", "c"], "matrix": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}))
    assert main(["axioms", "--fn", "max", "--space", str(path)]) == EXIT_USAGE
    assert "triangle" in capsys.readouterr().err


def test_probe_null_sequences(capsys):
    code, report = run_json(capsys, ["probe", "--fn", "jump", "--scenario", "null-seq", "--K", "200"])
    assert code == EXIT_OK
    assert report["results"]["K"] == 200
    assert report["results"]["strongness"]["status"] == "falsified"
    assert report["results"]["sequences"][0]["product_topology"]["converges"]


def test_probe_usc_projection(capsys):
    code, report = run_json(capsys, ["probe", "--fn", "proj(2)", "--scenario", "usc-projection"])
    assert code == EXIT_OK
    assert report["results"]["usc"]["status"] == "falsified"
    assert report["results"]["restricted_continuity"]["status"] == "consistent"


def test_probe_image_file(tmp_path, capsys):
    path = tmp_path / "image.json"
    path.write_text(json.dumps({"isolated": [[0, 0]], "rays": [{"curve": "diagonal"}]}))
    code, report = run_json(capsys, ["probe", "--fn", "max", "--scenario", "image", "--image", str(path)])
    assert code == EXIT_OK
    assert report["results"]["image"]["arity"] == 2
    assert report["results"]["usc"]["status"] == "consistent"
    assert report["results"]["restricted_continuity"]["status"] == "consistent"


def test_probe_image_without_zero_skips_restricted_continuity(tmp_path, capsys):
    path = tmp_path / "image.json"
    path.write_text(json.dumps({"isolated": [[1, 1]]}))
    code, report = run_json(capsys, ["probe", "--fn", "max", "--scenario", "image", "--image", str(path)])
    assert code == EXIT_OK
    assert "skipped" in report["results"]["restricted_continuity"]


def test_probe_image_needs_payload(capsys):
    assert main(["probe", "--fn", "max", "--scenario", "image"]) == EXIT_USAGE


def test_demo_text(capsys):
    assert main(["demo", "--name", "jump-not-strong"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("demo: ok (seed 42)")
    assert "[ok  ] strongness probe is falsified" in out


def test_demo_with_unmet_expectation(monkeypatch, capsys):
    def failing(cfg, tol):
        return {}, [{"expectation": "never", "met": False}]

    monkeypatch.setitem(commands.demos.DEMOS, "lu-image", commands.demos.DEMOS["lu-image"]._replace(run=failing))
    assert main(["demo", "--name", "lu-image"]) == EXIT_EXPECTATION
    assert "[FAIL] never" in capsys.readouterr().out


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_render_text_for_other_commands():
    report = Report(command="axioms", inputs={}, results={"axiom_class": "metric"}, seed=1, version=__version__)
    assert render_text(report) == 'axioms: ok (seed 1)\n  axiom_class: "metric"'


def test_report_schema_matches_model(capsys):
    schema = json.loads(SCHEMA.read_text())
    assert set(schema["properties"]) == set(Report.model_fields)
    assert set(schema["required"]) == set(Report.model_fields)
    _, report = run_json(capsys, ["demo", "--name", "lu-image"])
    assert set(report) == set(schema["properties"])
    assert report["command"] in schema["properties"]["command"]["enum"]
