import json
import subprocess
import sys

import pytest

from localdensity.cli import main
from localdensity.graph import generate, load_graph


@pytest.fixture
def lollipop_file(tmp_path):
    f = tmp_path / "g.txt"
    assert main(["gen", "lollipop:4,3", "-o", str(f)]) == 0
    return f


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else out)


def test_gen_roundtrip(lollipop_file):
    g = load_graph(lollipop_file.read_text())
    assert g == generate("lollipop:4,3")


def test_gen_json(capsys):
    code, data = run_json(capsys, ["gen", "clique:3", "--json"])
    assert code == 0 and data["n"] == 3 and len(data["edges"]) == 3


def test_gen_bad_spec(capsys):
    assert main(["gen", "hypercube:3"]) == 2
    assert "error" in capsys.readouterr().err


def test_exact_k3(tmp_path, capsys):
    f = tmp_path / "k3.txt"
    main(["gen", "clique:3", "-o", str(f)])
    code, data = run_json(capsys, ["exact", str(f)])
    assert code == 0
    assert [r["value"] for r in data["rho_star"]] == [1.0, 1.0, 1.0]
    assert len(data["decomposition"]) == 1
    assert data["duality"]["ok"]


def test_local(lollipop_file, capsys):
    code, data = run_json(capsys, ["local", str(lollipop_file), "--eps", "0.5"])
    assert code == 0 and len(data["rho"]) == 7 and data["trace"]["mode"] == "LOCAL"


def test_congest_manifest(lollipop_file, capsys):
    code, data = run_json(capsys, ["congest", str(lollipop_file), "--eps", "1", "--check-exact"])
    assert code == 0
    m = data["manifest"]
    assert m["schedule"]["total_rounds"] == data["trace"]["total_rounds"]
    for rec in m["final"]:
        assert 1 / 2 - 1e-9 <= rec["ratio"] <= 2 + 1e-9


def test_congest_blocking_model(lollipop_file, capsys):
    _, a = run_json(capsys, ["congest", str(lollipop_file), "--eps", "1"])
    _, b = run_json(capsys, ["congest", str(lollipop_file), "--eps", "1", "--blocking-model", "h4"])
    assert b["manifest"]["schedule"]["blocking_model"] == "h4"
    assert b["trace"]["total_rounds"] > a["trace"]["total_rounds"]


def test_congest_large_graph_guard(tmp_path, capsys):
    f = tmp_path / "big.txt"
    main(["gen", "path:30", "-o", str(f)])
    assert main(["congest", str(f), "--eps", "1"]) == 0
    capsys.readouterr()
    assert main(["congest", str(f), "--eps", "1", "--check-exact"]) == 3


def test_report_dtilde_and_vertex(lollipop_file, capsys):
    code, data = run_json(capsys, ["report", str(lollipop_file), "--eps", "0.5", "--dtilde", "1.4"])
    assert code == 0 and set(data["H"]) >= {0, 1, 2, 3} and data["certified"]
    code, data = run_json(capsys, ["report", str(lollipop_file), "--eps", "0.5", "--vertex", "6"])
    assert code == 0 and 6 in data["H"]


def test_report_needs_one_mode(lollipop_file):
    assert main(["report", str(lollipop_file), "--eps", "0.5"]) == 2
    assert main(["report", str(lollipop_file), "--eps", "0.5", "--dtilde", "1", "--vertex", "0"]) == 2
    assert main(["report", str(lollipop_file), "--eps", "0.5", "--vertex", "9"]) == 2


def test_verify_lollipop(lollipop_file, capsys):
    code, data = run_json(capsys, ["verify", str(lollipop_file), "--eps", "0.5"])
    assert code == 0 and data["pass"]
    for row in data["table"]:
        for key in ("local_ratio", "congest_ratio"):
            assert 1 / 1.5 - 1e-9 <= row[key] <= 1.5 + 1e-9


def test_verify_fails_iff_a_ratio_leaves_the_band(lollipop_file, capsys, monkeypatch):
    import localdensity.cli as cli

    real = cli.local_density_local_model

    def skewed(g, eps, **kw):
        out, trace = real(g, eps, **kw)
        return {v: (x * 3 if v == 0 else x) for v, x in out.items()}, trace

    monkeypatch.setattr(cli, "local_density_local_model", skewed)
    code, data = run_json(capsys, ["verify", str(lollipop_file), "--eps", "0.5"])
    assert code == 1 and not data["pass"]
    assert [row["pass"] for row in data["table"]].count(False) == 1


def test_verify_csv(lollipop_file, capsys):
    code, out = run_json(capsys, ["verify", str(lollipop_file), "--eps", "0.5", "--csv"])
    lines = out.strip().splitlines()
    assert code == 0 and lines[0].startswith("v,rho_star") and len(lines) == 8


def test_usage_errors(tmp_path):
    assert main([]) == 2
    assert main(["local", str(tmp_path / "missing.txt"), "--eps", "0.5"]) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("3 1\n0 7\n")
    assert main(["exact", str(bad)]) == 2
    assert main(["local", str(bad), "--eps", "2"]) == 2


def test_exact_guard(tmp_path):
    f = tmp_path / "p30.txt"
    main(["gen", "path:30", "-o", str(f)])
    assert main(["exact", str(f)]) == 3


def test_output_file(lollipop_file, tmp_path):
    out = tmp_path / "r.json"
    assert main(["exact", str(lollipop_file), "-o", str(out)]) == 0
    assert json.loads(out.read_text())["n"] == 7


def test_byte_identical_runs(lollipop_file, tmp_path):
    outs = []
    for i in range(2):
        p = tmp_path / f"run{i}.json"
        main(["congest", str(lollipop_file), "--eps", "0.5", "-o", str(p)])
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point(lollipop_file):
    res = subprocess.run([sys.executable, "-m", "localdensity", "verify", str(lollipop_file), "--eps", "0.5"],
                         capture_output=True, text=True, env={"LDL_LOG": "info", "PATH": ""})
    assert res.returncode == 0 and json.loads(res.stdout)["pass"]
