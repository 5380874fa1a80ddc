import json
import sys

import pytest
import torch

from bureskit.cli import (
    bench_cli,
    bureskit_cli,
    compute_cli,
    random_state_cli,
    selftest_cli,
)
from bureskit.matrixfile import MatrixFile


@pytest.fixture
def write(tmp_path):
    def func(name, matrix, kind="state"):
        path = tmp_path / name
        MatrixFile.from_matrix(torch.as_tensor(matrix, dtype=torch.complex128), kind).save(str(path))
        return str(path)

    return func


def test_compute_all_routes(write, capsys):
    state = write("state.json", [[1.0, 0.0], [0.0, 2.0]])
    y = write("y.json", [[0.0, 1.0], [1.0, 0.0]], "tangent")
    compute_cli(state, y, route="all")
    report = json.loads(capsys.readouterr().out)
    assert report["kind"] == "report"
    assert report["generic"] is True
    assert set(report["values"]) == {"prop1", "prop2", "prop4", "oracle"}
    for value in report["values"].values():
        assert value == pytest.approx(1 / 3)
    assert report["max_deviation"] < 1e-8


def test_compute_strict_reports_both_coefficient_routes(write, capsys):
    state = write("state.json", [[1.0, 0.0], [0.0, 2.0]])
    y = write("y.json", [[0.0, 1.0], [1.0, 0.0]], "tangent")
    compute_cli(state, y, route="prop2", strict=True)
    values = json.loads(capsys.readouterr().out)["values"]
    assert values["prop2_companion"] == pytest.approx(1 / 3)
    assert values["prop2_smith"] == pytest.approx(1 / 3)


def test_compute_refuses_prop4_at_scalar_state(write, capsys):
    state = write("state.json", [[0.5, 0.0], [0.0, 0.5]])
    y = write("y.json", [[1.0, 0.0], [0.0, -1.0]], "tangent")
    with pytest.raises(SystemExit) as e:
        compute_cli(state, y, route="prop4")
    assert e.value.code == 3
    captured = capsys.readouterr()
    assert "state is not generic" in captured.err
    assert captured.out == ""

    compute_cli(state, y, route="all")
    report = json.loads(capsys.readouterr().out)
    assert report["values"]["prop4"] is None
    assert report["values"]["prop1"] == pytest.approx(1.0)
    assert any("not generic" in w for w in report["warnings"])


def test_compute_validation_errors(write, tmp_path, capsys):
    state = write("state.json", [[1.0, 0.0], [0.0, 2.0]])
    bad = write("bad.json", [[0.0, 1.0], [0.0, 0.0]], "tangent")
    with pytest.raises(SystemExit) as e:
        compute_cli(state, bad)
    assert e.value.code == 2
    assert capsys.readouterr().out == ""

    broken = tmp_path / "broken.json"
    broken.write_text('{"kind": "state",\n "n": }')
    with pytest.raises(SystemExit) as e:
        compute_cli(str(broken), bad)
    assert e.value.code == 2
    assert "line 2" in capsys.readouterr().err

    y = write("y.json", [[0.0, 1.0], [1.0, 0.0]], "tangent")
    with pytest.raises(SystemExit) as e:
        compute_cli(state, y, route="geodesic")
    assert e.value.code == 2


def test_tolerance_scale_must_be_numeric(write, monkeypatch):
    state = write("state.json", [[1.0, 0.0], [0.0, 2.0]])
    monkeypatch.setenv("BURESKIT_TOLERANCE_SCALE", "loose")
    with pytest.raises(SystemExit) as e:
        compute_cli(state, state)
    assert e.value.code == 2


def test_random_state_is_deterministic_and_round_trips(tmp_path, capsys):
    random_state_cli(4, spectrum_floor=0.05, trace_one=True, seed=9)
    first = capsys.readouterr().out
    random_state_cli(4, spectrum_floor=0.05, trace_one=True, seed=9)
    assert capsys.readouterr().out == first

    path = tmp_path / "state.json"
    path.write_text(first)
    state = MatrixFile.load(str(path)).state()
    assert abs(float(state.entries.diagonal().real.sum()) - 1.0) <= 1e-12

    compute_cli(str(path), str(path), route="prop1")
    value = json.loads(capsys.readouterr().out)["values"]["prop1"]
    # g(ϱ, ϱ) = Tr ϱ / 4
    assert value == pytest.approx(0.25)


def test_random_state_rejects_large_floor(capsys):
    with pytest.raises(SystemExit) as e:
        random_state_cli(4, spectrum_floor=0.3, trace_one=True)
    assert e.value.code == 2


def test_fire_entrypoint(monkeypatch, capsys):
    monkeypatch.setattr(sys, "argv", ["bureskit", "random-state", "1", "--seed", "3"])
    bureskit_cli()
    document = json.loads(capsys.readouterr().out)
    assert document["n"] == 1
    assert document["re"][0][0] > 0


def test_selftest_fixed_cases(capsys):
    selftest_cli(n_max=1, samples=0)
    out = capsys.readouterr().out
    assert "fixed: diag(1,2) metric" in out
    assert "all properties pass" in out


def test_selftest_small_run(capsys):
    selftest_cli(n_max=3, samples=4, seed=5)
    out = capsys.readouterr().out
    assert "route agreement" in out
    assert "all properties pass" in out


def test_bench_writes_records(tmp_path, capsys):
    output = tmp_path / "bench.json"
    bench_cli(n_list="2,3", routes="prop1,prop2,dense", reps=5, output=str(output))
    table = capsys.readouterr().out
    assert "dense" in table
    document = json.loads(output.read_text())
    assert document["kind"] == "bench"
    assert len(document["records"]) == 6
    assert all(r["consistent"] for r in document["records"])
    assert document["host"]["cpu_count"] >= 1


def test_bench_rejects_unknown_route():
    with pytest.raises(SystemExit) as e:
        bench_cli(n_list="2", routes="prop9", reps=5)
    assert e.value.code == 2
