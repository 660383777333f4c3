import csv
import io as _io
import json
import math

import numpy as np
import pytest

from majorization.cli import parse_n_list, run
from majorization.errors import InputError


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


@pytest.fixture
def files(tmp_path):
    s = 1 / math.sqrt(2)
    return {
        "a": write(tmp_path, "a.json", [1, 0]),
        "b": write(tmp_path, "b.json", [0.5, 0.5]),
        "bell": write(tmp_path, "bell.json", {"schmidt": [[s, 0, 0], [s, 1, 1]], "dims": [2, 2]}),
        "target": write(tmp_path, "target.json", {"schmidt": [[math.sqrt(0.8), 0, 0], [math.sqrt(0.2), 1, 1]], "dims": [2, 2]}),
        "product": write(tmp_path, "product.json", {"schmidt": [[1.0, 0, 0]], "dims": [2, 2]}),
        "rho": write(tmp_path, "rho.json", {"matrix": [[0.7, 0], [0, 0.3]]}),
        "sigma": write(tmp_path, "sigma.json", {"matrix": [[0.5, 0], [0, 0.5]]}),
    }


def test_majorize_example(files, capsys):
    assert run(["majorize", files["a"], files["b"]]) == 0
    assert capsys.readouterr().out.strip() == "a ≻ b"
    assert run(["majorize", files["b"], files["a"]]) == 1
    assert capsys.readouterr().out.strip() == "a ≻ b"


def test_majorize_weak_and_json(files, capsys, tmp_path):
    c = write(tmp_path, "c.json", [0.4, 0.4])
    assert run(["majorize", files["b"], c, "--weak", "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["a_over_b"] and not out["b_over_a"]
    assert run(["majorize", files["b"], c]) == 1


def test_lorenz_csv(files, capsys):
    assert run(["lorenz", files["a"], "--format", "csv"]) == 0
    rows = list(csv.reader(_io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["t", "L"]
    assert [float(x) for x in rows[-1]] == [1.0, 1.0]


def test_synth_classical_and_quantum(files, capsys, tmp_path):
    assert run(["synth-ds", files["a"], files["b"]]) == 0
    T = json.loads(capsys.readouterr().out)
    np.testing.assert_allclose(T["matrix"], [[0.5, 0.5], [0.5, 0.5]])
    assert run(["synth-dss", files["rho"], files["sigma"]]) == 0
    assert "kraus" in json.loads(capsys.readouterr().out)
    assert run(["synth-ds", files["b"], files["a"]]) == 1
    assert "no map" in capsys.readouterr().err


def test_convert_then_simulate(files, capsys, tmp_path):
    proto = str(tmp_path / "out.json")
    assert run(["convert", files["bell"], files["target"], "--protocol", proto]) == 0
    assert capsys.readouterr().out.startswith("convertible")
    assert run(["simulate", files["bell"], proto, "--target", files["target"], "--format", "json"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["total_probability"] == pytest.approx(1.0, abs=1e-9)
    assert all(b["fidelity"] >= 1 - 1e-9 for b in res["branches"])


def test_convert_negative(files, capsys):
    assert run(["convert", files["product"], files["bell"], "--format", "json"]) == 1
    out = json.loads(capsys.readouterr().out)
    assert not out["convertible"]
    assert out["fidelity"] == pytest.approx(math.sqrt(0.5))


def test_monotones_and_slocc(files, capsys):
    assert run(["monotones", files["bell"], "--format", "json"]) == 0
    m = json.loads(capsys.readouterr().out)
    assert m["schmidt_rank"] == 2.0
    assert m["renyi"]["1.0"] == pytest.approx(math.log(2))
    assert run(["slocc", files["product"], files["bell"]]) == 1
    assert "F^2 = 0.5" in capsys.readouterr().out
    assert run(["slocc", files["bell"], files["product"]]) == 0


def test_powers_csv_is_non_decreasing(capsys):
    assert run(["powers", "--lambda", "0.5", "--n", "1..8", "--target", "bell"]) == 0
    rows = list(csv.DictReader(_io.StringIO(capsys.readouterr().out)))
    assert [int(r["n"]) for r in rows] == list(range(1, 9))
    f = [float(r["fidelity"]) for r in rows]
    assert all(b >= a - 1e-9 for a, b in zip(f, f[1:]))
    assert float(rows[0]["beta"]) == pytest.approx(2 * math.sqrt(1 + 4 * 0.5 / 1.5 ** 2), abs=1e-6)
    assert rows[-1]["beta"] == ""


def test_powers_config_file(tmp_path, capsys):
    cfg = write(tmp_path, "cfg.json", {"lambda": 0.3, "n_list": [2, 4], "targets": ["bell", "product"], "restarts": 2})
    assert run(["powers", "--config", cfg, "--beta-max-n", "0"]) == 0
    rows = list(csv.DictReader(_io.StringIO(capsys.readouterr().out)))
    assert [r["target"] for r in rows] == ["bell", "bell", "product", "product"]


def test_bell(files, capsys):
    assert run(["bell", files["bell"]]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(2 * math.sqrt(2), abs=1e-6)
    assert run(["bell", files["rho"]]) == 2


def test_output_is_byte_identical(files, tmp_path):
    outs = []
    for k in range(2):
        p = tmp_path / f"o{k}.csv"
        assert run(["powers", "--lambda", "0.3", "--n", "1..4", "--seed", "7", "--out", str(p)]) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_emitted_json_reparses(files, tmp_path, capsys):
    from majorization import io

    proto = str(tmp_path / "p.json")
    run(["convert", files["bell"], files["target"], "--protocol", proto])
    io.parse_protocol(io.read_json(proto))
    out = str(tmp_path / "map.json")
    run(["synth-dss", files["rho"], files["sigma"], "--out", out])
    io.parse_channel(io.read_json(out))


def test_input_errors(tmp_path, capsys):
    bad = write(tmp_path, "bad.json", {"schmidt": [[0.5, 0, "x"]], "dims": [2, 2]})
    assert run(["monotones", bad]) == 2
    assert "bad.json:schmidt[0][2]" in capsys.readouterr().err
    broken = tmp_path / "broken.json"
    broken.write_text("[1, 2")
    assert run(["lorenz", str(broken)]) == 2
    assert "broken.json" in capsys.readouterr().err
    assert run(["lorenz", str(tmp_path / "none.json")]) == 2
    assert run(["nonsense"]) == 2
    assert run(["majorize", "--tol", "-1", "x", "y"]) == 2


def test_parse_n_list():
    assert parse_n_list("1..3") == [1, 2, 3]
    assert parse_n_list("2,5") == [2, 5]
    with pytest.raises(InputError):
        parse_n_list("a..b")
