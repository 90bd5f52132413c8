"""Scenario-driven command line front end.

Subcommands: spectrum, tune, efficiency-curve, fit, noise, tomography,
visibility, reproduce.  Every run is driven by a TOML scenario (or a named
built-in preset for `reproduce`), writes CSV artifacts plus a run-record
JSON into the output directory, and is byte-deterministic for a fixed
scenario + seed.  Exit codes: 0 success, 1 operation error, 2 scenario or
input validation error.
"""

import argparse
import json
import os
import sys
from dataclasses import replace as dc_replace
from datetime import datetime, timezone

import numpy as np

from . import noise as noise_mod
from . import quantum
from .dispersion import phase_mismatch, solve_phase_matching
from .propagation import (
    PumpConfig,
    analytic_efficiency,
    detuning_efficiencies,
    fit_efficiency_curve,
    loss_normalized_efficiency,
    peak_efficiency,
)
from .scenario import Scenario, ScenarioError
from .tables import (
    COUNTS,
    EFFICIENCY_CURVE,
    NOISE_POINTS,
    TableError,
    ingest_csv,
    write_csv,
)
from .tuner import (
    HeaterArray,
    apply_heaters,
    detuning_calibration,
    objective_grid,
    sequential_tune,
    thermal_drift,
)

OUTPUT_ENV = "QFCSIM_OUT"


class CommandError(RuntimeError):
    """Operation failed after successful validation."""


def _out_dir(args):
    out = args.out or os.environ.get(OUTPUT_ENV) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _write_run_record(out, command, scenario_hash, summary, voltages=None):
    record = {
        "scenario_hash": scenario_hash,
        "command": command,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "summary": summary,
    }
    if voltages is not None:
        record["tuned_voltages"] = list(voltages)
    path = os.path.join(out, "run_record.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _report(args, lines):
    verbose = args.format == "report"
    for always, line in lines:
        if always or verbose:
            print(line)


def _load_scenario(args):
    if not args.scenario:
        raise ScenarioError("this command needs --scenario PATH")
    return Scenario.load(args.scenario, seed_override=args.seed)


def _wavelength_grid(scn, spec, halfwidth_factor=40.0, pitch_fraction=20.0):
    """Wavelength grid around the phase-matched point, detuning-equivalent."""
    from .dispersion import Mode

    model = scn.dispersion_model()
    pump = scn.pump()
    window = model.mode_dispersion(Mode.TE1550).window
    lam_pm = solve_phase_matching(model, pump.wavelength, window)
    dk_grid = objective_grid(spec, margin_factor=halfwidth_factor,
                             pitch_fraction=pitch_fraction)
    lam = lam_pm + model.dispersion_factor * dk_grid
    return model, lam_pm, np.sort(lam)


def cmd_spectrum(args):
    scn = _load_scenario(args)
    spec = scn.waveguide()
    pump = scn.pump()
    model, lam_pm, lam = _wavelength_grid(scn, spec)
    dk = np.array([phase_mismatch(model, l, pump.wavelength) for l in lam])
    eta = np.clip(detuning_efficiencies(spec, pump, dk, method="exact"), 0.0, 1.0)
    out = _out_dir(args)
    path = os.path.join(out, "spectrum.csv")
    write_csv(path, ["wavelength_m", "efficiency"],
              list(zip(lam.tolist(), eta.tolist())))
    peak_i = int(np.argmax(eta))
    summary = {
        "phase_matched_wavelength_m": lam_pm,
        "peak_wavelength_m": float(lam[peak_i]),
        "peak_efficiency": float(eta[peak_i]),
    }
    _write_run_record(out, "spectrum", scn.hash(), summary)
    _report(args, [
        (True, f"wrote {path}"),
        (True, f"peak efficiency {eta[peak_i]:.4f} at {lam[peak_i] * 1e9:.3f} nm"),
        (False, f"phase-matched wavelength {lam_pm * 1e9:.3f} nm"),
        (False, f"{len(lam)} samples, pump {pump.power * 1e3:.3f} mW "
                f"{pump.process.value}/{pump.direction.value}"),
    ])
    return 0


def _tune_once(scn, spec, power=None):
    settings = scn.tuning_settings()
    pump = scn.pump(power=power if power is not None else settings["power"])
    return sequential_tune(spec, pump, passes=settings["passes"]), pump


def cmd_tune(args):
    scn = _load_scenario(args)
    spec = scn.waveguide()
    if spec.heaters is None:
        raise ScenarioError("scenario is missing the [heaters] section")
    out = _out_dir(args)
    volt_path = os.path.join(out, "voltages.json")
    if args.resume and os.path.exists(volt_path):
        with open(volt_path, "r", encoding="utf-8") as fh:
            stored = json.load(fh)
        if stored.get("scenario_hash") == scn.hash():
            heaters = dc_replace(spec.heaters, voltages=tuple(stored["voltages"]))
            spec = dc_replace(spec, heaters=heaters)

    result, tune_pump = _tune_once(scn, spec)
    tuned_spec = spec.with_profile(
        apply_heaters(spec.mismatch_profile, result.heaters))

    report_before = detuning_calibration(spec, tune_pump)
    report_after = detuning_calibration(tuned_spec, tune_pump)

    model, lam_pm, lam = _wavelength_grid(scn, spec, halfwidth_factor=30.0)
    pump = scn.pump()
    for name, s in (("spectrum_initial.csv", spec), ("spectrum_tuned.csv", tuned_spec)):
        dk = np.array([phase_mismatch(model, l, pump.wavelength) for l in lam])
        eta = np.clip(detuning_efficiencies(s, pump, dk, method="exact"), 0.0, 1.0)
        write_csv(os.path.join(out, name), ["wavelength_m", "efficiency"],
                  list(zip(lam.tolist(), eta.tolist())))

    with open(volt_path, "w", encoding="utf-8") as fh:
        json.dump({"scenario_hash": scn.hash(),
                   "voltages": list(result.voltages)}, fh, indent=2)
        fh.write("\n")

    summary = {
        "ratio_initial": report_before.ratio,
        "ratio_tuned": report_after.ratio,
        "bandwidth_ratio_tuned": report_after.bandwidth_ratio,
        "peak_detuning_rad_per_m": result.peak_detuning,
    }
    _write_run_record(out, "tune", scn.hash(), summary, voltages=result.voltages)
    _report(args, [
        (True, f"R before tuning {report_before.ratio:.4f}, after {report_after.ratio:.4f}"),
        (True, f"voltages written to {volt_path}"),
        (False, f"B/B0 after tuning {report_after.bandwidth_ratio:.4f}"),
        (False, "voltages [V]: " + ", ".join(f"{v:.3f}" for v in result.voltages)),
    ])
    return 0


def cmd_efficiency_curve(args):
    scn = _load_scenario(args)
    spec = scn.waveguide(with_disorder=False, with_heaters=False)
    powers = scn.sweep_powers()
    etas = [analytic_efficiency(spec.eta_sfg_norm, p, spec.length,
                                spec.loss_1550, spec.loss_780) for p in powers]
    eta_pk, p_pk = peak_efficiency(spec.eta_sfg_norm, spec.length,
                                   spec.loss_1550, spec.loss_780)
    norm = loss_normalized_efficiency(eta_pk, p_pk, spec.length)
    out = _out_dir(args)
    path = os.path.join(out, "efficiency_curve.csv")
    write_csv(path, ["pump_W", "eta"], list(zip(powers.tolist(), etas)))
    summary = {
        "peak_efficiency": eta_pk,
        "peak_pump_W": p_pk,
        "loss_normalized_W_m2": norm,
    }
    _write_run_record(out, "efficiency-curve", scn.hash(), summary)
    _report(args, [
        (True, f"wrote {path}"),
        (True, f"peak efficiency {eta_pk:.4f} at {p_pk * 1e3:.2f} mW"),
        (False, f"loss-inclusive normalized efficiency {norm * 1e-4:.1f} W^-1 cm^-2"),
    ])
    return 0


def cmd_fit(args):
    scn = _load_scenario(args)
    if not args.input:
        raise ScenarioError("fit needs --input CURVE_CSV")
    rows = ingest_csv(args.input, EFFICIENCY_CURVE)
    points = [(row["pump"], row["eta"]) for row in rows]
    spec = scn.waveguide(with_disorder=False, with_heaters=False)
    eta_sfg = fit_efficiency_curve(points, spec.length, spec.loss_1550,
                                   spec.loss_780)
    out = _out_dir(args)
    summary = {"eta_sfg_W_m2": eta_sfg, "eta_sfg_pct_W_cm2": eta_sfg / 1e2,
               "points": len(points)}
    _write_run_record(out, "fit", scn.hash(), summary)
    _report(args, [
        (True, f"fitted eta_sfg = {eta_sfg * 1e-4:.1f} W^-1 cm^-2 "
               f"({eta_sfg / 1e2:.0f} %/W/cm^2) from {len(points)} points"),
    ])
    return 0


def cmd_noise(args):
    scn = _load_scenario(args)
    if args.input:
        rows = ingest_csv(args.input, NOISE_POINTS)
        points = [(row["pump"], row["flux"]) for row in rows]
        exponent = noise_mod.fit_power_scaling(points)
        out = _out_dir(args)
        _write_run_record(out, "noise", scn.hash(),
                          {"scaling_exponent": exponent, "points": len(points)})
        _report(args, [
            (True, f"measured power-scaling exponent {exponent:.3f} "
                   f"from {len(points)} points"),
        ])
        return 0
    spec = scn.waveguide(with_disorder=False, with_heaters=False)
    settings = scn.noise_settings()
    powers = scn.sweep_powers()
    linear = settings["linear_coefficient"] * powers
    quadratic = np.array([
        noise_mod.sfwm_flux(settings["eta_nl"], p, spec.length) for p in powers
    ])
    total = linear + quadratic
    exponent = noise_mod.fit_power_scaling(list(zip(powers, total)))
    out = _out_dir(args)
    path = os.path.join(out, "noise_budget.csv")
    write_csv(path, ["pump_W", "linear_cps_hz", "quadratic_cps_hz", "total_cps_hz"],
              list(zip(powers.tolist(), linear.tolist(), quadratic.tolist(),
                       total.tolist())))
    summary = {"scaling_exponent": exponent,
               "max_total_cps_hz": float(total.max())}
    _write_run_record(out, "noise", scn.hash(), summary)
    detuning = settings["detuning"]
    _report(args, [
        (True, f"wrote {path}"),
        (True, f"power-scaling exponent {exponent:.3f}"
               + (f" at {detuning * 1e9:.0f} nm detuning" if detuning else "")),
        (False, f"max total flux {total.max():.3e} cps/Hz "
                f"(single-photon limit ~1 cps/Hz)"),
    ])
    return 0


def cmd_tomography(args):
    scn = _load_scenario(args)
    if not args.input:
        raise ScenarioError("tomography needs --input COUNTS_CSV")
    rows = ingest_csv(args.input, COUNTS)
    bins = {}
    for row in rows:
        key = row["phase_setting"]
        triple = list(bins.get(key, (0.0, 0.0, 0.0)))
        triple[("e", "l", "ll").index(row["bin"])] += row["counts"]
        bins[key] = tuple(triple)
    record = quantum.projector_counts(bins)
    rho = quantum.mle_reconstruct(record)
    out = _out_dir(args)
    lines = [(True, "reconstructed density matrix:")]
    for i in range(2):
        row = "  ".join(f"{rho.matrix[i, j].real:+.6f}{rho.matrix[i, j].imag:+.6f}j"
                        for j in range(2))
        lines.append((True, "  " + row))
    summary = {
        "rho": [[[rho.matrix[i, j].real, rho.matrix[i, j].imag]
                 for j in range(2)] for i in range(2)],
        "min_eigenvalue": float(rho.eigenvalues().min()),
    }
    if args.state:
        psi = quantum.basis_states()[args.state]
        fid = quantum.fidelity(psi, rho)
        summary["fidelity"] = fid
        summary["state"] = args.state
        lines.append((True, f"fidelity to |{args.state}> = {fid:.4f}"))
    _write_run_record(out, "tomography", scn.hash(), summary)
    _report(args, lines)
    return 0


def cmd_visibility(args):
    scn = _load_scenario(args)
    q = scn.quantum_settings()
    v_i, v_s = q["v_idler"], q["v_signal"]
    bound = quantum.min_two_photon_visibility(v_i, v_s)
    enum = quantum.enumerate_min_two_photon_visibility(v_i, v_s)
    out = _out_dir(args)
    summary = {"v_idler": v_i, "v_signal": v_s,
               "bound": bound, "enumerated_minimum": enum}
    _write_run_record(out, "visibility", scn.hash(), summary)
    _report(args, [
        (True, f"two-photon visibility bound {bound:.4f} "
               f"(V_i={v_i}, V_s={v_s})"),
        (True, f"four-branch enumerated minimum {enum:.4f}"),
        (False, "the enumerated minimum is always >= the bound"),
    ])
    return 0


# -- reproduce presets -----------------------------------------------------

_WG_6MM = {
    "length": "6 mm", "loss_1550": "1 dB/cm", "loss_780": "20 dB/cm",
    "eta_sfg": "70000 %/W/cm^2", "cell_size": "50 um",
}
_WG_25MM = {
    "length": "2.5 mm", "loss_1550": "1 dB/cm", "loss_780": "20 dB/cm",
    "eta_sfg": "175000 %/W/cm^2", "cell_size": "50 um",
}
_HEATERS_15 = {"count": 15, "span": "0.4 mm", "kappa": "1300 rad/m/V^2",
               "v_max": "5 V"}
_DISPERSION = {"phase_match_signal": "1533 nm",
               "dispersion_factor": "2.6e-13 m^2/rad"}


def _preset(name):
    presets = {
        "fig2a": {
            "seed": 20,
            "waveguide": _WG_6MM,
            "dispersion": _DISPERSION,
            "heaters": _HEATERS_15,
            "disorder": {"sigma_step": "600 rad/m",
                         "correlation_length": "0.05 mm"},
            "pump": {"power": "20 mW", "wavelength": "1550 nm",
                     "direction": "forward", "process": "sfg"},
            "tuning": {"passes": 2, "power": "0.3 mW"},
        },
        "fig2b": {
            "waveguide": _WG_6MM,
            "dispersion": _DISPERSION,
            "pump": {"power": "20 mW"},
            "sweep": {"power_start": "1 mW", "power_stop": "60 mW",
                      "points": 60},
        },
        "fig2e": {
            "waveguide": _WG_6MM,
            "waveguide_short": _WG_25MM,
        },
        "fig2f": {
            "waveguide": _WG_6MM,
            "noise": {"eta_nl": "20 /W/m", "linear_coefficient": 5e-3,
                      "detuning": "20 nm"},
            "sweep": {"power_start": "2 mW", "power_stop": "50 mW",
                      "points": 25},
        },
        "fig4d": {
            "seed": 7,
            "quantum": {"pairs_per_setting": 10000,
                        "analyzer_visibility": 0.9,
                        "analyzer_phase_error": 0.18},
        },
        "s5": {
            "seed": 33,
            "waveguide": _WG_6MM,
            "dispersion": _DISPERSION,
            "heaters": _HEATERS_15,
            "disorder": {"sigma_step": "600 rad/m",
                         "correlation_length": "0.05 mm"},
            "pump": {"power": "20 mW"},
            "tuning": {"passes": 2, "power": "0.3 mW"},
            "thermal": {"kappa": "2e5 rad/m/W", "high_power": "50 mW"},
        },
    }
    if name not in presets:
        raise ScenarioError(
            f"unknown preset {name!r}; choose from {sorted(presets)}")
    return presets[name]


def _reproduce_fig2a(scn, out):
    spec = scn.waveguide()
    result, tune_pump = _tune_once(scn, spec)
    tuned = spec.with_profile(apply_heaters(spec.mismatch_profile, result.heaters))
    model, lam_pm, lam = _wavelength_grid(scn, spec, halfwidth_factor=30.0)
    pump = scn.pump()
    rows = []
    for s, label in ((spec, "initial"), (tuned, "optimized")):
        dk = np.array([phase_mismatch(model, l, pump.wavelength) for l in lam])
        eta = np.clip(detuning_efficiencies(s, pump, dk, method="exact"), 0, 1)
        rows.append(eta)
    write_csv(os.path.join(out, "fig2a_spectra.csv"),
              ["wavelength_m", "eta_initial", "eta_optimized"],
              list(zip(lam.tolist(), rows[0].tolist(), rows[1].tolist())))
    write_csv(os.path.join(out, "fig2a_voltages.csv"),
              ["heater", "voltage_V"],
              list(enumerate(result.voltages)))
    r_after = detuning_calibration(tuned, tune_pump).ratio
    return {"ratio_tuned": r_after, "voltages": list(result.voltages)}


def _reproduce_fig2b(scn, out, spec=None, stem="fig2b"):
    spec = spec if spec is not None else scn.waveguide(with_disorder=False,
                                                       with_heaters=False)
    powers = scn.sweep_powers()
    etas = [analytic_efficiency(spec.eta_sfg_norm, p, spec.length,
                                spec.loss_1550, spec.loss_780) for p in powers]
    write_csv(os.path.join(out, f"{stem}_efficiency.csv"),
              ["pump_W", "eta"], list(zip(powers.tolist(), etas)))
    eta_pk, p_pk = peak_efficiency(spec.eta_sfg_norm, spec.length,
                                   spec.loss_1550, spec.loss_780)
    return {"peak_efficiency": eta_pk, "peak_pump_W": p_pk}


def _reproduce_fig2e(scn, out):
    rows = []
    for wg_key in ("waveguide", "waveguide_short"):
        sub = Scenario({"waveguide": scn.raw[wg_key]})
        spec = sub.waveguide(with_disorder=False, with_heaters=False)
        eta_pk, p_pk = peak_efficiency(spec.eta_sfg_norm, spec.length,
                                       spec.loss_1550, spec.loss_780)
        norm = loss_normalized_efficiency(eta_pk, p_pk, spec.length)
        rows.append((spec.length, eta_pk, p_pk, norm))
    write_csv(os.path.join(out, "fig2e_peaks.csv"),
              ["length_m", "eta_peak", "pump_W", "eta_l_norm_W_m2"], rows)
    return {"devices": [{"length_m": r[0], "eta_peak": r[1], "pump_W": r[2],
                         "eta_l_norm_W_m2": r[3]} for r in rows]}


def _reproduce_fig2f(scn, out):
    spec = scn.waveguide(with_disorder=False, with_heaters=False)
    settings = scn.noise_settings()
    powers = scn.sweep_powers()
    linear = settings["linear_coefficient"] * powers
    quadratic = np.array([
        noise_mod.sfwm_flux(settings["eta_nl"], p, spec.length) for p in powers
    ])
    total = linear + quadratic
    write_csv(os.path.join(out, "fig2f_noise.csv"),
              ["pump_W", "linear_cps_hz", "quadratic_cps_hz", "total_cps_hz"],
              list(zip(powers.tolist(), linear.tolist(), quadratic.tolist(),
                       total.tolist())))
    exponent = noise_mod.fit_power_scaling(list(zip(powers, total)))
    return {"scaling_exponent": exponent}


def _reproduce_fig4d(scn, out):
    q = scn.quantum_settings()
    seed = scn.require_seed()
    rows = []
    fidelities = []
    for i, (label, psi) in enumerate(quantum.basis_states().items()):
        bins = quantum.sample_bins(psi, q["pairs_per_setting"],
                                   seed=seed + i,
                                   visibility=q["visibility"],
                                   phase_error=q["phase_error"])
        rho = quantum.mle_reconstruct(quantum.projector_counts(bins))
        fid = quantum.fidelity(psi, rho)
        fidelities.append(fid)
        rows.append((label, fid))
    mean = float(np.mean(fidelities))
    rows.append(("mean", mean))
    write_csv(os.path.join(out, "fig4d_fidelities.csv"),
              ["state", "fidelity"], rows)
    return {"mean_fidelity": mean}


def _reproduce_s5(scn, out):
    lengths = ("0.34 mm", "0.85 mm", "2.5 mm", "6 mm")
    heater_counts = {("2.5 mm"): 6, ("6 mm"): 15}
    rows = []
    for label in lengths:
        raw = {
            "seed": scn.seed,
            "waveguide": dict(_WG_6MM, length=label),
            "dispersion": _DISPERSION,
            "disorder": dict(scn.raw["disorder"]),
            "pump": dict(scn.raw["pump"]),
            "tuning": dict(scn.raw["tuning"]),
        }
        tuned_flag = label in heater_counts
        if tuned_flag:
            raw["heaters"] = dict(_HEATERS_15, count=heater_counts[label],
                                  start="0.05 mm" if label == "2.5 mm" else "0 mm")
        sub = Scenario(raw)
        spec = sub.waveguide()
        pump = sub.pump(power=sub.tuning_settings()["power"])
        if tuned_flag:
            result, _ = _tune_once(sub, spec)
            spec = spec.with_profile(
                apply_heaters(spec.mismatch_profile, result.heaters))
        report = detuning_calibration(spec, pump)
        rows.append((spec.length, int(tuned_flag), report.ratio,
                     report.bandwidth_ratio))
    write_csv(os.path.join(out, "s5_length_scaling.csv"),
              ["length_m", "tuned", "ratio", "bandwidth_ratio"], rows)

    # thermo-optic drift sequence on the 6-mm device
    kappa = scn._field(scn.section("thermal"), "thermal", "kappa",
                       "thermal_response")
    p_high = scn._field(scn.section("thermal"), "thermal", "high_power", "power")
    spec = scn.waveguide()
    result, tune_pump = _tune_once(scn, spec)
    tuned_profile = apply_heaters(spec.mismatch_profile, result.heaters)
    drift_rows = []
    r_low = detuning_calibration(spec.with_profile(tuned_profile), tune_pump).ratio
    drift_rows.append((0.0, r_low, 0))
    drifted = thermal_drift(tuned_profile, p_high, kappa)
    r_high = detuning_calibration(spec.with_profile(drifted), tune_pump).ratio
    drift_rows.append((p_high, r_high, 0))
    # re-tune against the drifted background (heaters act on top of drift)
    drifted_base = thermal_drift(spec.mismatch_profile, p_high, kappa)
    respec = spec.with_profile(drifted_base)
    re_result = sequential_tune(respec, tune_pump,
                                passes=scn.tuning_settings()["passes"])
    retuned = apply_heaters(drifted_base, re_result.heaters)
    r_retuned = detuning_calibration(spec.with_profile(retuned), tune_pump).ratio
    drift_rows.append((p_high, r_retuned, 1))
    write_csv(os.path.join(out, "s5_thermal_drift.csv"),
              ["pump_W", "ratio", "retuned"], drift_rows)
    return {"ratio_low_power": r_low, "ratio_high_power": r_high,
            "ratio_retuned": r_retuned}


def cmd_reproduce(args):
    raw = _preset(args.preset)
    scn = Scenario(raw, seed_override=args.seed)
    out = _out_dir(args)
    runner = {
        "fig2a": _reproduce_fig2a,
        "fig2b": _reproduce_fig2b,
        "fig2e": _reproduce_fig2e,
        "fig2f": _reproduce_fig2f,
        "fig4d": _reproduce_fig4d,
        "s5": _reproduce_s5,
    }[args.preset]
    summary = runner(scn, out)
    _write_run_record(out, f"reproduce {args.preset}", scn.hash(), summary)
    _report(args, [
        (True, f"reproduced {args.preset} into {out}"),
        (False, json.dumps(summary, indent=2, default=str)),
    ])
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qfcsim",
        description="chi(2) waveguide frequency-conversion simulator",
    )
    parser.add_argument("--scenario", help="scenario TOML file")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the scenario seed")
    parser.add_argument("--out", default=None,
                        help=f"output directory (default ${OUTPUT_ENV} or .)")
    parser.add_argument("--format", choices=("csv", "report"), default="csv",
                        help="csv: artifacts + brief summary; report: verbose")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("spectrum", help="emit the conversion spectrum CSV")
    tune = sub.add_parser("tune", help="run sequential phase-matching tuning")
    tune.add_argument("--resume", action="store_true",
                      help="warm-start from persisted voltages if they match")
    sub.add_parser("efficiency-curve", help="efficiency vs pump power CSV")
    fit = sub.add_parser("fit", help="fit eta_sfg to a measured curve")
    fit.add_argument("--input", help="efficiency curve CSV (pump, eta)")
    noise_cmd = sub.add_parser("noise", help="noise budget CSV and scaling exponent")
    noise_cmd.add_argument("--input", default=None,
                           help="measured (pump, flux) CSV to fit instead")
    tomo = sub.add_parser("tomography", help="reconstruct a qubit from counts")
    tomo.add_argument("--input", help="counts CSV (phase_setting, bin, counts)")
    tomo.add_argument("--state", choices=("e", "l", "+", "-", "L", "R"),
                      default=None, help="report fidelity to this state")
    sub.add_parser("visibility", help="two-photon visibility bound")
    rep = sub.add_parser("reproduce", help="regenerate a named figure analog")
    rep.add_argument("preset",
                     choices=("fig2a", "fig2b", "fig2e", "fig2f", "fig4d", "s5"))
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "spectrum": cmd_spectrum,
        "tune": cmd_tune,
        "efficiency-curve": cmd_efficiency_curve,
        "fit": cmd_fit,
        "noise": cmd_noise,
        "tomography": cmd_tomography,
        "visibility": cmd_visibility,
        "reproduce": cmd_reproduce,
    }
    try:
        return handlers[args.command](args)
    except (ScenarioError, TableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
