"""Command-line front end: scenarios, commands, artifacts, determinism."""

import json
import os

import numpy as np
import pytest

from qfcsim.cli import main
from qfcsim.quantum import basis_states, expected_bins
from qfcsim.scenario import Scenario, ScenarioError
from qfcsim.tables import EFFICIENCY_CURVE, ingest_csv, write_csv

SCENARIO_6MM = """
seed = 11

[waveguide]
length = "6 mm"
loss_1550 = "1 dB/cm"
loss_780 = "20 dB/cm"
eta_sfg = "70000 %/W/cm^2"
cell_size = "50 um"

[dispersion]
phase_match_signal = "1533 nm"
dispersion_factor = "2.6e-13 m^2/rad"

[heaters]
count = 15
span = "0.4 mm"
kappa = "1300 rad/m/V^2"
v_max = "5 V"

[disorder]
sigma_step = "600 rad/m"
correlation_length = "0.05 mm"

[pump]
power = "20 mW"
wavelength = "1550 nm"
direction = "forward"
process = "sfg"

[tuning]
passes = 2
power = "0.08 mW"

[sweep]
power_start = "1 mW"
power_stop = "60 mW"
points = 30

[noise]
eta_nl = "200 /W/m"
linear_coefficient = 5e-3
detuning = "8 nm"

[quantum]
v_idler = 0.944
v_signal = 0.9832
"""


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "scenario.toml"
    path.write_text(SCENARIO_6MM, encoding="utf-8")
    return str(path)


def test_scenario_hash_stable_under_reordering(tmp_path):
    # same logical content, fields reordered
    a = tmp_path / "a.toml"
    b = tmp_path / "b.toml"
    a.write_text('seed = 1\n[pump]\npower = "1 mW"\nwavelength = "1550 nm"\n')
    b.write_text('seed = 1\n[pump]\nwavelength = "1550 nm"\npower = "1 mW"\n')
    assert Scenario.load(a).hash() == Scenario.load(b).hash()
    c = tmp_path / "c.toml"
    c.write_text('seed = 2\n[pump]\npower = "1 mW"\nwavelength = "1550 nm"\n')
    assert Scenario.load(a).hash() != Scenario.load(c).hash()


def test_scenario_missing_section_diagnostic(tmp_path):
    path = tmp_path / "broken.toml"
    path.write_text('seed = 1\n[waveguide]\nlength = "6 mm"\n')
    scn = Scenario.load(path)
    with pytest.raises(ScenarioError, match=r"\[waveguide\].*loss_1550"):
        scn.waveguide()
    with pytest.raises(ScenarioError, match=r"\[dispersion\]"):
        scn.dispersion_model()


def test_scenario_requires_seed_for_disorder(tmp_path):
    path = tmp_path / "s.toml"
    path.write_text("""
[waveguide]
length = "6 mm"
loss_1550 = "1 dB/cm"
loss_780 = "20 dB/cm"
eta_sfg = "70000 %/W/cm^2"

[disorder]
sigma_step = "600 rad/m"
correlation_length = "0.05 mm"
""")
    with pytest.raises(ScenarioError, match="seed"):
        Scenario.load(path).waveguide()


def test_malformed_scenario_exits_2(tmp_path, capsys):
    path = tmp_path / "broken.toml"
    path.write_text('seed = 3\n[waveguide]\nlength = "6 mm"\n')
    code = main(["--scenario", str(path), "--out", str(tmp_path), "spectrum"])
    assert code == 2
    assert "loss_1550" in capsys.readouterr().err


def test_spectrum_command(scenario_file, tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["--scenario", scenario_file, "--out", str(out), "spectrum"])
    assert code == 0
    assert (out / "spectrum.csv").exists()
    record = json.loads((out / "run_record.json").read_text())
    assert record["command"] == "spectrum"
    assert 0.0 < record["summary"]["peak_efficiency"] <= 1.0


def test_efficiency_curve_command(scenario_file, tmp_path):
    out = tmp_path / "out"
    code = main(["--scenario", scenario_file, "--out", str(out),
                 "efficiency-curve"])
    assert code == 0
    rows = ingest_csv(out / "efficiency_curve.csv", EFFICIENCY_CURVE)
    assert len(rows) == 30
    record = json.loads((out / "run_record.json").read_text())
    assert record["summary"]["peak_pump_W"] == pytest.approx(0.023, abs=0.005)
    assert record["summary"]["peak_efficiency"] == pytest.approx(0.275, abs=0.02)


def test_fit_command_round_trip(scenario_file, tmp_path, capsys):
    from conftest import ALPHA_1550, BETA_780
    from qfcsim.propagation import analytic_efficiency

    curve = tmp_path / "measured.csv"
    powers = np.linspace(0.002, 0.05, 10)
    write_csv(curve, ["pump_W", "eta"],
              [(p, analytic_efficiency(7e6, p, 0.006, ALPHA_1550, BETA_780))
               for p in powers])
    out = tmp_path / "out"
    code = main(["--scenario", scenario_file, "--out", str(out),
                 "fit", "--input", str(curve)])
    assert code == 0
    record = json.loads((out / "run_record.json").read_text())
    assert record["summary"]["eta_sfg_W_m2"] == pytest.approx(7e6, rel=1e-3)
    assert record["summary"]["eta_sfg_pct_W_cm2"] == pytest.approx(70000, rel=1e-3)


def test_noise_command(scenario_file, tmp_path):
    out = tmp_path / "out"
    code = main(["--scenario", scenario_file, "--out", str(out), "noise"])
    assert code == 0
    record = json.loads((out / "run_record.json").read_text())
    # 8-nm detuning fixture: quadratic dominates over the broad 1-60 mW sweep
    assert record["summary"]["scaling_exponent"] > 1.5
    assert record["summary"]["max_total_cps_hz"] < 1.0


def test_tomography_command(scenario_file, tmp_path, capsys):
    counts = tmp_path / "counts.csv"
    bins = expected_bins(basis_states()["+"], 10_000)
    rows = []
    for phase, (n_e, n_l, n_ll) in bins.items():
        rows += [(phase, "e", n_e), (phase, "l", n_l), (phase, "ll", n_ll)]
    write_csv(counts, ["phase_setting", "bin", "counts"], rows)
    out = tmp_path / "out"
    code = main(["--scenario", scenario_file, "--out", str(out),
                 "tomography", "--input", str(counts), "--state", "+"])
    assert code == 0
    record = json.loads((out / "run_record.json").read_text())
    assert record["summary"]["fidelity"] == pytest.approx(1.0, abs=1e-6)
    assert record["summary"]["min_eigenvalue"] >= -1e-9


def test_visibility_command(scenario_file, tmp_path):
    out = tmp_path / "out"
    code = main(["--scenario", scenario_file, "--out", str(out), "visibility"])
    assert code == 0
    record = json.loads((out / "run_record.json").read_text())
    assert record["summary"]["bound"] == pytest.approx(0.8659, abs=1e-4)
    assert record["summary"]["enumerated_minimum"] >= record["summary"]["bound"]


def test_tune_command_persists_and_improves(scenario_file, tmp_path):
    out = tmp_path / "out"
    code = main(["--scenario", scenario_file, "--out", str(out), "tune"])
    assert code == 0
    voltages = json.loads((out / "voltages.json").read_text())
    assert len(voltages["voltages"]) == 15
    record = json.loads((out / "run_record.json").read_text())
    assert record["summary"]["ratio_tuned"] > record["summary"]["ratio_initial"]
    assert (out / "spectrum_initial.csv").exists()
    assert (out / "spectrum_tuned.csv").exists()
    # resumable: a second run warm-starts from the stored voltages
    code = main(["--scenario", scenario_file, "--out", str(out),
                 "tune", "--resume"])
    assert code == 0


def test_output_env_variable(scenario_file, tmp_path, monkeypatch):
    target = tmp_path / "envout"
    monkeypatch.setenv("QFCSIM_OUT", str(target))
    code = main(["--scenario", scenario_file, "efficiency-curve"])
    assert code == 0
    assert (target / "efficiency_curve.csv").exists()


def _read_csvs(folder):
    return {name: (folder / name).read_bytes()
            for name in os.listdir(folder) if name.endswith(".csv")}


@pytest.mark.parametrize("preset", ["fig2b", "fig2e", "fig2f", "fig4d"])
def test_reproduce_presets_deterministic(preset, tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert main(["--out", str(out_a), "reproduce", preset]) == 0
    assert main(["--out", str(out_b), "reproduce", preset]) == 0
    csvs_a = _read_csvs(out_a)
    csvs_b = _read_csvs(out_b)
    assert csvs_a and csvs_a == csvs_b


def test_reproduce_fig2b_peak_row(tmp_path):
    out = tmp_path / "out"
    assert main(["--out", str(out), "reproduce", "fig2b"]) == 0
    rows = ingest_csv(out / "fig2b_efficiency.csv", EFFICIENCY_CURVE)
    best = max(rows, key=lambda r: r["eta"])
    # the curve argmax sits a little below the complete-conversion power of
    # 23 mW because the detuning prefactor falls with pump power
    assert 0.018 <= best["pump"] <= 0.028
    assert best["eta"] == pytest.approx(0.28, abs=0.01)


def test_reproduce_fig4d_mean_fidelity(tmp_path):
    out = tmp_path / "out"
    assert main(["--out", str(out), "reproduce", "fig4d"]) == 0
    record = json.loads((out / "run_record.json").read_text())
    assert 0.94 < record["summary"]["mean_fidelity"] < 0.98
