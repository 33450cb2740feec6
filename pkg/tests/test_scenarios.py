import json
import math

import numpy as np
import pytest

from dwm.boost import comoving_boost, solve_boost
from dwm.cli import main
from dwm.core import LatticeModel, inner_product, parity_score, read_state_csv
from dwm.scenarios import (
    BUILTINS,
    SCENARIO_IDS,
    ScenarioConfig,
    ScenarioError,
    initial_center,
    make_params,
    prepare_fig4_inputs,
    run_scenario,
    sweep,
    write_sweep,
)

SHORT = dict(tmax=2.0, stride=50)


@pytest.fixture(scope="module")
def fig4_inputs():
    return prepare_fig4_inputs(LatticeModel(200))


def test_fig4_modes_have_definite_parity(fig4_inputs):
    assert parity_score(fig4_inputs["phi0"], 0.0) > 0.99
    assert parity_score(fig4_inputs["phi1"], 0.0) < -0.99


def test_fig4_modes_orthonormal(fig4_inputs):
    a, b = fig4_inputs["phi0"], fig4_inputs["phi1"]
    assert abs(inner_product(a, b)) < 1e-10
    assert inner_product(a, a).real == pytest.approx(1.0, abs=1e-12)


def test_boost_only_changes_phase(fig4_inputs):
    for key in ("phi0", "phi1"):
        assert np.allclose(np.abs(fig4_inputs[key + "_boosted"].amplitudes),
                           np.abs(fig4_inputs[key].amplitudes), atol=1e-15, rtol=0)


def test_fig4_energies_below_band(fig4_inputs):
    e0, e1 = fig4_inputs["energies"]
    assert e0 < e1 < -2.0


def test_builtin_ids():
    assert set(SCENARIO_IDS) == set(BUILTINS)
    with pytest.raises(ScenarioError):
        ScenarioConfig("fig9")
    with pytest.raises(ScenarioError):
        make_params({"nonsense": 1})


def test_aliases():
    p = make_params({"v": 0.5, "omega-a2": 0.1})
    assert p.velocity == 0.5 and p.omega_a2 == 0.1


def test_auto_center_keeps_well_on_lattice():
    p = make_params(base=BUILTINS["fig4b"])
    c0 = initial_center(p)
    assert c0 == 150
    assert abs(c0 - p.velocity * p.tmax) <= 200


def test_spectrum_summary_fig2_small():
    r = run_scenario(ScenarioConfig("fig2", {"sites": 201}))
    s = r.summary
    assert s["bound_count"] == 1 == s["sturm_count"]
    assert s["bound_energies"][0] < -2.0
    assert s["bound_parity"][0] > 0.99


def test_evolution_summary_reports_boost_exactly():
    r = run_scenario(ScenarioConfig("fig4b", dict(SHORT, sites=201)))
    s = r.summary
    bp = solve_boost(1.5)
    assert s["boost"] == bp.as_dict()
    assert s["mass_ratio"] == comoving_boost(1.5).mass_ratio
    assert s["norm_drift_max"] < 1e-10
    assert s["localized_fraction_initial"] > 0.99


def test_well_leaving_lattice_is_an_error():
    with pytest.raises(ScenarioError):
        run_scenario(ScenarioConfig("fig4b", {"sites": 101, "tmax": 200.0, "center": 0.0}))


def test_outputs_are_deterministic(tmp_path):
    for name in ("a", "b"):
        run_scenario(ScenarioConfig("fig4d", dict(SHORT, sites=201), tmp_path / name))
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert {"summary.json", "series.csv", "snapshots.csv", "final_state.csv", "plot.gp"} <= set(files)
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_state_csv_round_trip_through_scenario(tmp_path):
    r = run_scenario(ScenarioConfig("fig4a", dict(SHORT, sites=201), tmp_path))
    back = read_state_csv(tmp_path / "final_state.csv")
    assert np.array_equal(back.amplitudes, r.trajectory.final.amplitudes)


def test_file_initial_state(tmp_path):
    run_scenario(ScenarioConfig("fig4a", dict(SHORT, sites=201), tmp_path))
    r = run_scenario(ScenarioConfig("fig4a", dict(SHORT, sites=201, init=f"file:{tmp_path / 'final_state.csv'}",
                                                  boost_phase="none")))
    assert r.summary["localized_fraction_initial"] > 0.98


def test_sweep_predictions():
    rows = {(r["nu"], r["v"]): r for r in sweep([0.97], [0.0, 0.5, 1.0, 1.5, 1.9], measure=False)}
    assert rows[(0.97, 0.0)]["predicted_bound_count"] == 1
    assert rows[(0.97, 1.5)]["predicted_bound_count"] == 2
    counts = [rows[(0.97, v)]["predicted_bound_count"] for v in (0.0, 0.5, 1.0, 1.5, 1.9)]
    assert counts == sorted(counts)
    assert "error" in sweep([0.97], [2.5], measure=False)[0]


def test_measured_sweep_small(tmp_path):
    base = make_params(dict(tmax=20.0, sites=201), BUILTINS["fig4a"])
    rows = sweep([0.97], [0.0], base)
    assert rows[0]["measured_localized_count"] >= 1
    files = write_sweep(rows, tmp_path)
    assert (tmp_path / "sweep.csv").read_text().splitlines()[0].startswith("nu,v,")
    assert len(files) == 2


# ---- CLI

def test_cli_boost(capsys):
    assert main(["boost", "--velocity", "1.5", "--nu", "0.97"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["sin_qa"] == pytest.approx(0.75)
    assert data["predicted_bound_count"] == 2


def test_cli_boost_beyond_critical(capsys):
    assert main(["boost", "--velocity", "2.5"]) == 1
    assert "error" in capsys.readouterr().err


def test_cli_curves(tmp_path, capsys):
    out = tmp_path / "w.csv"
    assert main(["wk", "--velocity", "1.0", "--kmin", "0", "--kmax", "1", "--dk", "0.25", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "k,W" and len(rows) == 6
    k, w = map(float, rows[2].split(","))
    assert w == pytest.approx(2 * (1 - math.cos(k)) - k)
    assert main(["dispersion", "--velocity", "0", "--kmin", "0", "--kmax", "0.5", "--dk", "0.5"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "k,E"


def test_cli_wk_extrema(capsys):
    assert main(["wk", "--velocity", "1.0", "--extrema"]) == 0
    pts = json.loads(capsys.readouterr().out)
    assert any(p["kind"] == "min" and p["k"] == pytest.approx(math.pi / 6) for p in pts)


def test_cli_spectrum_and_evolve(tmp_path, capsys):
    assert main(["spectrum", "--sites", "201", "--nu", "1.27", "--out", str(tmp_path / "s"),
                 "--dump-states", "0"]) == 0
    assert (tmp_path / "s" / "state_0.csv").exists()
    assert json.loads(capsys.readouterr().out)["bound_count"] == 2
    assert main(["evolve", "--sites", "201", "--nu", "0.97", "--probe-nu", "1.27", "--tmax", "1",
                 "--format", "json", "--out", str(tmp_path / "e")]) == 0
    assert not (tmp_path / "e" / "series.csv").exists()
    assert (tmp_path / "e" / "series.json").exists()


def test_cli_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sites": 101, "nu": 1.27}))
    assert main(["spectrum", "--config", str(cfg), "--nu", "0.97"]) == 0
    s = json.loads(capsys.readouterr().out)
    assert s["n_sites"] == 101 and s["bound_count"] == 1


def test_cli_figure_invalid_exit_code(tmp_path, capsys):
    # edge reflections make the drifting run invalid on a tight lattice
    code = main(["figure", "fig4d", "--set", "sites=201", "--set", "tmax=60", "--set", "center=45",
                 "--out", str(tmp_path)])
    s = json.loads(capsys.readouterr().out)
    assert code == (0 if s["valid"] else 2)
    assert not s["valid"]


def test_cli_bad_input(capsys):
    assert main(["spectrum", "--sites", "100"]) == 1
    assert main(["figure", "fig2", "--set", "bogus=1"]) == 1
