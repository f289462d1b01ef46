import csv
import io
import json
import subprocess
import sys

import pytest

from critgrav import cli
from critgrav.constraint import ConstraintInput, alpha_bound
from critgrav.yukawa import G_NEWTON

from test_system import BASE, multistable_params

SIMPLE = {
    "linearize": ["linearize"],
    "modes": ["modes"],
    "sweep-coupling": ["sweep", "--axis", "coupling"],
    "sweep-detuning": ["sweep", "--axis", "detuning"],
    "shift": ["shift"],
    "shift-fixed": ["shift", "--set", 'shift.coupling_policy="fixed_g"'],
    "shift-coupling": ["shift", "--curve", "coupling"],
    "shift-shift": ["shift", "--curve", "shift"],
    "invert": ["invert"],
    "yukawa": ["yukawa"],
}


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def drive_cfg(tmp_path):
    drive = dict(BASE, power=multistable_params().power)
    return write_json(tmp_path / "drive.json", {"drive": drive})


@pytest.fixture
def prior_csv(tmp_path):
    p = tmp_path / "prior.csv"
    lines = ["lambda_m,abs_alpha"] + [f"{l!r},{1e20 * (l / 1e-9) ** -3!r}" for l in (1e-10, 1e-9, 1e-8, 1e-6)]
    p.write_text("\n".join(lines) + "\n")
    return str(p)


@pytest.mark.parametrize("name", sorted(SIMPLE))
def test_subcommands_exit_zero_and_are_deterministic(name, tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    argv = SIMPLE[name]
    if name == "linearize":
        argv = argv + ["--config", write_json(tmp_path / "c.json", {"drive": dict(BASE, power=1e-6)})]
    code1, out1, _ = run(argv, capsys)
    code2, out2, _ = run(argv, capsys)
    assert code1 == code2 == 0
    assert out1 and out1 == out2
    files = [tmp_path / "a.out", tmp_path / "b.out"]
    for f in files:
        assert run(argv + ["--out", str(f)], capsys)[0] == 0
    assert files[0].read_bytes() == files[1].read_bytes() == out1.encode()
    assert sorted(p.name for p in tmp_path.iterdir()) == sorted(["a.out", "b.out"] + (["c.json"] if name == "linearize" else []))


@pytest.mark.parametrize("which", [f for f in cli.FIGURES if f != "fig7"])
def test_figures_deterministic(which, tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["figure", which, "--out", str(a)], capsys)[0] == 0
    assert run(["figure", which, "--out", str(b)], capsys)[0] == 0
    assert sorted(p.name for p in a.iterdir()) == [f"{which}.csv", f"{which}.json"]
    for name in (f"{which}.csv", f"{which}.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_figure_needs_out_dir(capsys):
    code, _, err = run(["figure", "fig2a"], capsys)
    assert code == 2 and "--out" in err


def _rows(path):
    return list(csv.DictReader(open(path)))


def test_fig2a_crosses_at_critical_coupling(tmp_path, capsys):
    run(["figure", "fig2a", "--out", str(tmp_path)], capsys)
    rows = _rows(tmp_path / "fig2a.csv")
    crit = [r for r in rows if r["regime"] == "critical"]
    assert [float(r["axis_value"]) for r in crit] == [50000.0]
    assert float(crit[0]["omega_minus_sq"]) == 0.0
    before = [r for r in rows if float(r["axis_value"]) < 50000]
    after = [r for r in rows if float(r["axis_value"]) > 50000]
    assert all(r["regime"] == "stable" for r in before)
    assert all(r["regime"] == "unstable" for r in after)


def test_fig4_endpoints(tmp_path, capsys):
    run(["figure", "fig4", "--out", str(tmp_path)], capsys)
    rows = _rows(tmp_path / "fig4.csv")
    ends = {}
    for r in rows:
        ends[r["curve"]] = r
    got = [float(ends[k]["g_lin"]) for k in "0123"]
    assert got == pytest.approx([50000, 49999.75, 49998.75, 49997.50], abs=0.005)
    assert all(float(ends[k]["omega_minus"]) == 0.0 for k in "0123")
    meta = json.loads((tmp_path / "fig4.json").read_text())
    assert meta["results"]["critical_couplings"] == got


def test_fig5c_through_critical_tracking_values(tmp_path, capsys):
    run(["figure", "fig5c", "--out", str(tmp_path)], capsys)
    rows = {float(r["independent_value"]): float(r["delta_d"]) for r in _rows(tmp_path / "fig5c.csv")}
    assert rows[-1.0] == pytest.approx(223.07674949401496825, rel=1e-10)
    assert rows[-5.0] == pytest.approx(497.35153264523239719, rel=1e-10)
    assert rows[-10.0] == pytest.approx(701.81255158028723082, rel=1e-10)
    assert rows[0.0] == 0.0


def test_fig7_without_priors_exit_4(tmp_path, capsys):
    code, _, err = run(["figure", "fig7", "--out", str(tmp_path)], capsys)
    assert code == 4 and "prior" in err
    meta = json.loads((tmp_path / "fig7.json").read_text())
    assert meta["results"]["priors_missing"] is True
    assert (tmp_path / "fig7.csv").exists()


def test_fig7_with_priors(tmp_path, prior_csv, capsys):
    out = tmp_path / "o"
    assert run(["figure", "fig7", "--out", str(out), "--prior", prior_csv], capsys)[0] == 0
    curves = {r["curve"] for r in _rows(out / "fig7.csv")}
    assert curves == {"ours", "prior"}
    meta = json.loads((out / "fig7.json").read_text())
    assert "prior" in meta["results"]["comparison"]["ratios"]


def test_linearize_missing_field(tmp_path, capsys):
    drive = dict(BASE, power=1e-3)
    del drive["omega_b"]
    code, _, err = run(["linearize", "--config", write_json(tmp_path / "c.json", {"drive": drive})], capsys)
    assert code == 2 and "omega_b" in err


def test_unknown_key_is_error(tmp_path, capsys):
    code, _, err = run(["modes", "--set", "working.omega_bb=3"], capsys)
    assert code == 2 and "omega_bb" in err
    code, _, err = run(["modes", "--config", write_json(tmp_path / "c.json", {"wrking": {}})], capsys)
    assert code == 2 and "wrking" in err


def test_linearize_multistable(drive_cfg, capsys):
    code, out, _ = run(["linearize", "--config", drive_cfg], capsys)
    rep = json.loads(out)
    assert code == 0 and len(rep["roots"]) == 3
    assert rep["root_policy"] == "nearest"
    code, out, _ = run(["linearize", "--config", drive_cfg, "--root-policy", "highest"], capsys)
    rep2 = json.loads(out)
    assert rep2["selected_index"] == 2 and rep2["selected_root"] == max(rep2["roots"])


def test_linearize_zero_power_echoes_bare(tmp_path, capsys):
    cfg = write_json(tmp_path / "c.json", {"drive": dict(BASE, power=0.0)})
    rep = json.loads(run(["linearize", "--config", cfg], capsys)[1])
    assert rep["linearized"] == {
        "g_lin": 0.0,
        "delta_c": BASE["delta_c_bare"],
        "omega_a_tilde": BASE["omega_a"],
        "omega_b": BASE["omega_b"],
    }


def test_solver_error_exit_3(tmp_path, capsys):
    cfg = write_json(tmp_path / "c.json", {"drive": dict(BASE, power=multistable_params().power)})
    code, _, _ = run(["linearize", "--config", cfg, "--set", "solver.max_iter=0"], capsys)
    assert code == 3


def test_inversion_error_exit_5(capsys):
    code, _, _ = run(["invert", "--set", "inversion.bracket_lo=1", "--set", "inversion.bracket_hi=2"], capsys)
    assert code == 5


def test_bad_grid_exit_2_positive_shift_exit_6(capsys):
    # g_min above the tracked critical coupling makes a decreasing grid
    code, _, _ = run(["shift", "--curve", "coupling", "--set", "shift.g_min=60000"], capsys)
    assert code == 2
    code, _, _ = run(["shift", "--set", "shift.delta_omega_b=5"], capsys)
    assert code == 6


def test_regime_violation_exit_6(capsys):
    code, _, _ = run(["yukawa", "--set", "cylinder.radius=1e-8"], capsys)
    assert code == 6


def test_quadrature_nonconvergence_exit_7(capsys):
    code, _, _ = run(["yukawa", "--quadrature", "--set", "quadrature.max_cells=4", "--tol", "1e-14"], capsys)
    assert code == 7


def test_yukawa_quadrature_report(capsys):
    code, out, _ = run(["yukawa", "--quadrature"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert abs(rep["cylinder_energy_quadrature"]["relative_difference"]) < 1e-2
    assert rep["plate"]["delta_r_minus_delta_b"] > 0


def test_constrain_outputs_and_rerun_from_meta(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["constrain", "--out", str(a)], capsys)[0] == 0
    assert sorted(p.name for p in a.iterdir()) == ["exclusion.csv", "meta.json"]
    rows = _rows(a / "exclusion.csv")
    assert len(rows) == 200
    assert float(rows[0]["lambda_m"]) == 3e-10 and float(rows[-1]["lambda_m"]) == 1e-6
    alphas = [float(r["abs_alpha"]) for r in rows]
    assert all(y < x for x, y in zip(alphas, alphas[1:]))
    assert run(["constrain", "--config", str(a / "meta.json"), "--out", str(b)], capsys)[0] == 0
    assert (a / "exclusion.csv").read_bytes() == (b / "exclusion.csv").read_bytes()
    assert (a / "meta.json").read_bytes() == (b / "meta.json").read_bytes()


def test_constrain_shift_floor_override(tmp_path, capsys):
    assert run(["constrain", "--out", str(tmp_path), "--set", "constraint.shift_floor=10"], capsys)[0] == 0
    inp = ConstraintInput(1e5, 1e5, 1e3, g_newton=G_NEWTON)
    for r in _rows(tmp_path / "exclusion.csv"):
        assert float(r["abs_alpha"]) == alpha_bound(float(r["lambda_m"]), 10.0, inp)


def test_constrain_and_compare_with_prior(tmp_path, prior_csv, capsys):
    out = tmp_path / "o"
    argv = ["constrain", "--out", str(out), "--prior", prior_csv]
    assert run(argv, capsys)[0] == 0
    assert sorted(p.name for p in out.iterdir()) == ["comparison.csv", "comparison.json", "exclusion.csv", "meta.json"]
    rep = json.loads((out / "comparison.json").read_text())
    code, text, _ = run(["compare", "--curve", str(out / "exclusion.csv"), "--prior", prior_csv], capsys)
    assert code == 0
    again = json.loads(text)
    assert again["ratios"]["prior"] == pytest.approx(rep["ratios"]["prior"], rel=1e-12)
    assert run(["compare", "--curve", str(out / "exclusion.csv"), "--prior", prior_csv], capsys)[1] == text


def test_compare_query_outside_curve_exit_8(tmp_path, prior_csv, capsys):
    out = tmp_path / "o"
    run(["constrain", "--out", str(out)], capsys)
    code, _, err = run(
        ["compare", "--curve", str(out / "exclusion.csv"), "--prior", prior_csv, "--lambda-query", "1e-11"], capsys
    )
    assert code == 8 and "1e-11" in err


def test_compare_skips_prior_not_covering_query(tmp_path, capsys):
    out = tmp_path / "o"
    run(["constrain", "--out", str(out)], capsys)
    narrow = tmp_path / "narrow.csv"
    narrow.write_text("lambda_m,abs_alpha\n1e-8,1\n1e-6,2\n")
    code, text, _ = run(["compare", "--curve", str(out / "exclusion.csv"), "--prior", str(narrow)], capsys)
    rep = json.loads(text)
    assert code == 0 and rep["skipped"] == ["narrow"] and rep["ratios"] == {}


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "critgrav", "modes"], capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["critical_coupling"] == 50000.0
