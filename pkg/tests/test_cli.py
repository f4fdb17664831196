import json

import pytest

import wreathlab.cli as cli
from wreathlab.cli import run_cli


def run(tmp_path, *argv, name="out.json"):
    out = tmp_path / name
    code = run_cli(list(argv) + ["--out", str(out)])
    return code, out


def test_fixtures_ok(tmp_path):
    code, out = run(tmp_path, "fixtures", "--suite", "lemma-virtual")
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["results"][0]["checks"] == {
        "c_nontrivial": True,
        "c_quotient_trivial": True,
        "c_values_in_commutator_subgroup": True,
    }


def test_fixtures_match_shipped_file(tmp_path):
    import pathlib

    shipped = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "commutator_level1.json"
    code, out = run(tmp_path, "fixtures", "--suite", "lemma-virtual")
    assert code == 0
    assert json.loads(out.read_text()) == json.loads(shipped.read_text())


def test_fixture_failure_exit_code(tmp_path, monkeypatch):
    def broken():
        return {"suite": "lemma-virtual", "checks": {"c_nontrivial": False}}

    monkeypatch.setattr(cli, "lemma_virtual_fixture", broken)
    code = run_cli(["fixtures", "--suite", "lemma-virtual"])
    assert code == 1


def test_ball_csv(tmp_path):
    code, out = run(tmp_path, "ball", "--group", "free:2", "--radius", "2",
                    "--format", "csv", name="ball.csv")
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "r,V"
    assert lines[-1] == "2,17"


def test_budget_exit_code():
    assert run_cli(["ball", "--group", "free:2", "--radius", "6", "--budget", "10"]) == 2


def test_invalid_config_exit_code():
    assert run_cli(["ball", "--group", "nope:9", "--radius", "2"]) == 3
    assert run_cli(["ball", "--radius", "2"]) == 3
    assert run_cli(["no-such-command"]) == 3
    assert run_cli(["profile", "--group", "free:2", "--tmax", "-1"]) == 3


def test_agreement_stdout(capsys):
    assert run_cli(["agreement", "--left", "fg:a,b", "--right", "free:2", "--cap", "6"]) == 0
    assert capsys.readouterr().out.strip() == "2"


def test_schreier_command(tmp_path, capsys):
    assert run_cli(["schreier", "--level", "3", "--from", "220", "--to", "222"]) == 0
    capsys.readouterr()
    edges = tmp_path / "edges.csv"
    code, out = run(tmp_path, "schreier", "--level", "2", "--edges", str(edges))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["results"]["vertices"] == 9 and doc["results"]["connected"]
    assert len(edges.read_text().strip().splitlines()) == 1 + 18


def test_profile_rational_csv(tmp_path):
    code, out = run(
        tmp_path, "profile", "--group", "free:2", "--measure", "srw",
        "--tmax", "3", "--rmax", "3", "--rational", name="prof.csv",
    )
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "t,H,H_over_t,H_increment,speed,return_prob,rho_hat"
    row1 = lines[1].split(",")
    import math

    assert float(row1[1]) == math.log(4)
    assert "r,V,v_hat" in lines


def test_compare_command(tmp_path):
    code, out = run(tmp_path, "compare", "--src", "free:2", "--quo", "abelian:2",
                    "--tmax", "3")
    assert code == 0
    doc = json.loads(out.read_text())
    assert all(r["H_gap"] >= -1e-9 for r in doc["results"]["rows"])


def test_lift_command(tmp_path):
    code, out = run(tmp_path, "lift", "--marking", "a,b", "--level", "3")
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["results"]["lifted_spec"] == "gamma:3"


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("group: free:2\nradius: 3\nformat: csv\n")
    out = tmp_path / "ball.csv"
    # config supplies group and format; the radius flag overrides the file
    code = run_cli(["ball", "--radius", "2", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    assert out.read_text().strip().splitlines()[-1] == "2,17"
    cfg.write_text("radius: 2\nbogus_key: 1\n")
    assert run_cli(["ball", "--group", "free:2", "--config", str(cfg)]) == 3


def test_artifacts_are_reproducible(tmp_path):
    a = run(tmp_path, "profile", "--group", "abelian:2", "--tmax", "4",
            "--rmax", "4", "--format", "json", "--threads", "1", name="a.json")[1]
    b = run(tmp_path, "profile", "--group", "abelian:2", "--tmax", "4",
            "--rmax", "4", "--format", "json", "--threads", "1", name="b.json")[1]
    assert a.read_bytes() == b.read_bytes()
