import json

import pytest

from glvstab.cli import run


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


NET = """cycle {
  n = 2;
  k12 = 2; k23 = 1; k31 = 1;
  order1 = X^0.5;
  order2 = X^1 Y^1;
}
"""


def test_classify_alpha_beta(capsys):
    code, out, _ = call(capsys, "classify", "--alpha", "0", "--beta", "0")
    assert code == 0 and json.loads(out)["label"] == "GAS"
    code, out, _ = call(capsys, "classify", "--alpha", "0.5", "--beta", "1.5")
    assert json.loads(out)["label"] == "AS-not-GAS"


def test_classify_exponents_all_k(capsys):
    code, out, _ = call(capsys, "classify", "--exponents", "-1,-1,-1,1", "--all-k")
    d = json.loads(out)
    assert code == 0 and d["scope"] == "AllK" and d["global"] == "GAS"
    code, out, _ = call(capsys, "classify", "--exponents", "-1,-1,-1,1", "--stoichiometric", "2")
    assert json.loads(out)["scope"] == {"AllKStoichiometric": 2.0}


def test_zip_exit_2(capsys):
    code, _, err = call(capsys, "classify", "--exponents", "1,1,1,1")
    assert code == 2 and "zip" in err.lower()
    code, _, _ = call(capsys, "classify", "--alpha", "2", "--beta", "0.5")
    assert code == 2


def test_parse_missing_and_bad(capsys, tmp_path):
    code, _, err = call(capsys, "parse", str(tmp_path / "missing.glv"))
    assert code == 1 and err.startswith("error:")
    bad = tmp_path / "bad.glv"
    bad.write_text("cycle { n = ; }")
    code, _, err = call(capsys, "parse", str(bad))
    assert code == 1 and "line 1" in err


def test_parse_and_classify_file(capsys, tmp_path):
    f = tmp_path / "net.glv"
    f.write_text(NET)
    code, out, _ = call(capsys, "parse", str(f))
    d = json.loads(out)
    assert code == 0 and d["k2"] == 2 * d["k3"]
    code, out, _ = call(capsys, "classify", str(f))
    assert code == 0 and "label" in json.loads(out)


def test_validation_errors(capsys):
    assert call(capsys, "classify")[0] == 1
    assert call(capsys, "classify", "--alpha", "1")[0] == 1
    assert call(capsys, "classify", "--exponents", "1,2,3")[0] == 1
    assert call(capsys, "nosuchcommand")[0] == 1
    assert call(capsys, "simulate", "--exponents", "0,-1,-1,0", "--x0", "-1", "--y0", "1")[0] == 1


def test_equilibrium_jacobian_focal(capsys):
    code, out, _ = call(capsys, "equilibrium", "--exponents", "-1,0,0,1", "--rates", "1,2,3,4")
    d = json.loads(out)
    assert code == 0 and d["x"] == pytest.approx(0.5) and d["y"] == pytest.approx(0.75)
    code, out, _ = call(capsys, "jacobian", "--alpha", "1", "--beta", "1")
    d = json.loads(out)
    assert d["eigenvalues"] == [[0.0, 1.0], [0.0, -1.0]] or sorted(d["eigenvalues"]) == [[0.0, -1.0], [0.0, 1.0]]
    code, out, _ = call(capsys, "focal", "--alpha", "1.5", "--beta", "0.5")
    assert json.loads(out)["criticality"] == "Supercritical"
    code, _, _ = call(capsys, "focal", "--exponents", "-1,-1,-1,1")
    assert code == 2


@pytest.mark.parametrize(
    "argv, kind",
    [
        (["--exponents", "-1,0,0,1", "--kind", "dulac", "--grid", "21"], "Dulac"),
        (["--alpha", "1.25", "--beta", "0.5", "--kind", "dulac", "--grid", "21"], "Dulac"),
        (["--exponents", "0,-1,-1,0", "--kind", "integral"], None),
        (["--exponents", "1,2,2,1", "--kind", "invariant-set"], "InvariantSet"),
        (["--exponents", "-1,-0.5,-0.5,0", "--kind", "boundary-curve"], "BoundaryCurve"),
    ],
)
def test_certify(capsys, argv, kind):
    code, out, _ = call(capsys, "certify", *argv)
    assert code == 0
    d = json.loads(out)
    if kind:
        assert d["kind"] == kind


def test_certify_precondition(capsys):
    assert call(capsys, "certify", "--exponents", "1,2,2,1", "--kind", "dulac")[0] == 2


def test_simulate_stdout_and_files(capsys, tmp_path):
    code, out, err = call(capsys, "simulate", "--alpha", "1", "--beta", "1", "--x0", "2", "--y0", "1")
    assert code == 0 and out.startswith("t,x,y\n")
    assert json.loads(err)["kind"] == "PeriodicOrbit"
    p = tmp_path / "lv.csv"
    code, _, _ = call(capsys, "simulate", "--alpha", "1", "--beta", "1", "--x0", "2", "--y0", "1", "--out", str(p))
    assert code == 0 and p.read_text() == out
    assert json.loads((tmp_path / "lv.csv.json").read_text())["terminal"]["kind"] == "PeriodicOrbit"


def test_simulate_stiff_exit_3(capsys, monkeypatch):
    from glvstab import cli

    orig = cli.SimConfig
    monkeypatch.setattr(cli, "SimConfig", lambda **kw: orig(max_steps=3, **kw))
    code, _, err = call(capsys, "simulate", "--alpha", "1", "--beta", "1", "--x0", "2", "--y0", "1")
    assert code == 3 and "StiffFailure" in err


def test_determinism(capsys, tmp_path):
    outs = []
    for i in range(2):
        prefix = tmp_path / f"p{i}"
        assert call(capsys, "portrait", "--preset", "fig7", "--tmax", "5", "--out", str(prefix))[0] == 0
        sim = tmp_path / f"s{i}.csv"
        call(capsys, "simulate", "--alpha", "1.25", "--beta", "0.5", "--x0", "3", "--y0", "2", "--out", str(sim))
        cls_out = call(capsys, "classify", "--alpha", "0.5", "--beta", "1.5")[1]
        outs.append(((prefix.with_suffix(".csv")).read_bytes(), sim.read_bytes(), (tmp_path / f"s{i}.csv.json").read_bytes(), cls_out))
    assert outs[0] == outs[1]


def test_portrait_for_system(capsys):
    code, out, _ = call(capsys, "portrait", "--exponents", "-1,-1,-1,1", "--tmax", "2")
    assert code == 0 and out.startswith("panel,kind,id,x,y\n")
    assert call(capsys, "portrait", "--preset", "fig2", "--exponents", "-1,-1,-1,1")[0] == 1


def test_diagram(capsys, tmp_path):
    prefix = tmp_path / "d"
    code, _, _ = call(capsys, "diagram", "--box", "-1,3,-1,3", "--step", "0.05", "--out", str(prefix))
    assert code == 0
    rows = [l.split(",") for l in prefix.with_suffix(".csv").read_text().splitlines()[1:]]
    assert len(rows) == 81 * 81
    lab = {(float(a), float(b)): l for a, b, l in rows}
    assert lab[(0.0, 0.0)] == "GAS" and lab[(1.0, 1.0)] == "Center" and lab[(2.0, 2.0)] == "Unstable"
    assert prefix.with_suffix(".svg").read_text().startswith("<svg")
    assert call(capsys, "diagram", "--step", "0")[0] == 1
    assert call(capsys, "diagram", "--box", "1,2,3")[0] == 1
