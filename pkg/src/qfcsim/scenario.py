"""Scenario files: TOML configuration with explicit unit suffixes.

A scenario collects everything one run needs: waveguide, dispersion,
heaters, disorder, pump, sweep grid, noise parameters, quantum fixtures and
the global seed.  Physical fields are strings with unit tags
(`loss_780 = "20 dB/cm"`); unit errors fail at load time, not deep inside a
sweep.  Scenarios are content-addressed: the hash is taken over the
key-sorted JSON rendering of the parsed tree, so formatting and key order
do not matter.
"""

import hashlib
import json

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import dispersion as disp
from . import noise as noise_mod
from .propagation import Direction, MismatchProfile, Process, PumpConfig, WaveguideSpec
from .tuner import DisorderSpec, HeaterArray, apply_heaters, generate_disorder
from .units import UnitError, parse_quantity


class ScenarioError(ValueError):
    """Missing section/field or invalid value in a scenario file."""


_MISSING = object()


class Scenario:
    """Parsed scenario tree plus typed accessors for each subsystem."""

    def __init__(self, raw, path=None, seed_override=None):
        if not isinstance(raw, dict):
            raise ScenarioError("scenario root must be a table")
        self.raw = raw
        self.path = path
        self._seed_override = seed_override

    @classmethod
    def load(cls, path, seed_override=None):
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except FileNotFoundError:
            raise ScenarioError(f"scenario file not found: {path}")
        except tomllib.TOMLDecodeError as exc:
            raise ScenarioError(f"scenario file {path} is not valid TOML: {exc}")
        return cls(raw, path=path, seed_override=seed_override)

    # -- plumbing ---------------------------------------------------------

    def hash(self):
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    def section(self, name):
        try:
            sec = self.raw[name]
        except KeyError:
            raise ScenarioError(f"scenario is missing the [{name}] section")
        if not isinstance(sec, dict):
            raise ScenarioError(f"[{name}] must be a table")
        return sec

    def has_section(self, name):
        return isinstance(self.raw.get(name), dict)

    def _field(self, section, sec_name, key, quantity=None, default=_MISSING):
        if key not in section:
            if default is not _MISSING:
                return default
            raise ScenarioError(f"[{sec_name}] is missing the {key!r} field")
        value = section[key]
        if quantity is None:
            return value
        try:
            return parse_quantity(value, quantity)
        except UnitError as exc:
            raise ScenarioError(f"[{sec_name}].{key}: {exc}")

    @property
    def seed(self):
        if self._seed_override is not None:
            return int(self._seed_override)
        seed = self.raw.get("seed")
        if seed is None:
            return None
        if not isinstance(seed, int):
            raise ScenarioError("top-level 'seed' must be an integer")
        return seed

    def require_seed(self):
        if self.seed is None:
            raise ScenarioError(
                "a global 'seed' is required when stochastic elements are enabled"
            )
        return self.seed

    # -- subsystem builders ----------------------------------------------

    def waveguide(self, with_disorder=True, with_heaters=True):
        """WaveguideSpec with the disorder profile and heater array attached."""
        sec = self.section("waveguide")
        length = self._field(sec, "waveguide", "length", "length")
        cell_size = self._field(sec, "waveguide", "cell_size", "length",
                                default=length / 120.0)
        spec = WaveguideSpec(
            length=length,
            loss_1550=self._field(sec, "waveguide", "loss_1550", "loss"),
            loss_780=self._field(sec, "waveguide", "loss_780", "loss"),
            eta_sfg_norm=self._field(sec, "waveguide", "eta_sfg", "norm_efficiency"),
            mismatch_profile=MismatchProfile.uniform(
                length, n_cells=max(1, round(length / cell_size))
            ),
            heaters=self.heaters() if (with_heaters and self.has_section("heaters"))
            else None,
        )
        if with_disorder and self.has_section("disorder"):
            profile = generate_disorder(self.disorder(cell_size), length)
            spec = spec.with_profile(profile)
        return spec

    def heaters(self):
        sec = self.section("heaters")
        return HeaterArray(
            count=int(self._field(sec, "heaters", "count")),
            span=self._field(sec, "heaters", "span", "length"),
            kappa_h=self._field(sec, "heaters", "kappa", "heater_response"),
            v_max=self._field(sec, "heaters", "v_max", "voltage", default=5.0),
            start=self._field(sec, "heaters", "start", "length", default=0.0),
        )

    def disorder(self, cell_size):
        sec = self.section("disorder")
        sigma = self._field(sec, "disorder", "sigma_step", "wavenumber")
        if sigma > 0:
            self.require_seed()
        return DisorderSpec(
            seed=self.seed if self.seed is not None else 0,
            cell_size=cell_size,
            sigma_step=sigma,
            correlation_length=self._field(sec, "disorder", "correlation_length",
                                           "length", default=0.0),
        )

    def pump(self, power=None):
        sec = self.section("pump")
        direction = self._field(sec, "pump", "direction", default="forward")
        process = self._field(sec, "pump", "process", default="sfg")
        try:
            direction = Direction(direction)
            process = Process(process)
        except ValueError as exc:
            raise ScenarioError(f"[pump]: {exc}")
        return PumpConfig(
            power=power if power is not None
            else self._field(sec, "pump", "power", "power"),
            wavelength=self._field(sec, "pump", "wavelength", "length",
                                   default=1550e-9),
            direction=direction,
            process=process,
        )

    def dispersion_model(self):
        sec = self.section("dispersion")
        if "modes" in sec:
            modes = []
            for entry in sec["modes"]:
                try:
                    label = disp.Mode(entry["label"])
                except (KeyError, ValueError):
                    raise ScenarioError(
                        "[dispersion.modes] entries need a 'label' of "
                        "te1550 | pump1550 | tm780"
                    )
                modes.append(disp.ModeDispersion(
                    mode=label,
                    reference_wavelength=parse_quantity(
                        entry["reference_wavelength"], "length"),
                    coefficients=tuple(entry["coefficients"]),
                    window=tuple(parse_quantity(w, "length")
                                 for w in entry["window"]),
                ))
            return disp.DispersionModel(
                modes=tuple(modes),
                dispersion_factor=self._field(sec, "dispersion",
                                              "dispersion_factor",
                                              "dispersion_factor"),
                group_index_780=self._field(sec, "dispersion", "group_index_780",
                                            "dimensionless", default=5.7),
            )
        return disp.matched_linear_model(
            lambda_signal=self._field(sec, "dispersion", "phase_match_signal",
                                      "length", default=1533e-9),
            lambda_pump=self._field(sec, "dispersion", "pump_wavelength",
                                    "length", default=1550e-9),
            dispersion_factor=self._field(sec, "dispersion", "dispersion_factor",
                                          "dispersion_factor", default=2.6e-13),
            n_signal=self._field(sec, "dispersion", "n_signal", "dimensionless",
                                 default=2.10),
            n_pump=self._field(sec, "dispersion", "n_pump", "dimensionless",
                               default=2.05),
            group_index_780=self._field(sec, "dispersion", "group_index_780",
                                        "dimensionless", default=5.7),
        )

    def sweep_powers(self):
        sec = self.section("sweep")
        import numpy as np

        start = self._field(sec, "sweep", "power_start", "power")
        stop = self._field(sec, "sweep", "power_stop", "power")
        points = int(self._field(sec, "sweep", "points", default=40))
        if points < 2 or stop <= start:
            raise ScenarioError("[sweep] needs power_stop > power_start and points >= 2")
        return np.linspace(start, stop, points)

    def raman_params(self):
        if not (self.has_section("noise") and "raman" in self.section("noise")):
            return noise_mod.INGAP_RAMAN
        sec = self.section("noise")["raman"]

        def fld(key, quantity, default):
            if key not in sec:
                return default
            try:
                return parse_quantity(sec[key], quantity)
            except UnitError as exc:
                raise ScenarioError(f"[noise.raman].{key}: {exc}")

        base = noise_mod.INGAP_RAMAN
        return noise_mod.RamanParams(
            peak_gain=fld("peak_gain", "raman_gain", base.peak_gain),
            solid_angle=fld("solid_angle", "solid_angle", base.solid_angle),
            background_ratio=fld("background_ratio", "dimensionless",
                                 base.background_ratio),
            raman_peak_bandwidth=fld("peak_bandwidth", "frequency",
                                     base.raman_peak_bandwidth),
            molecular_density=fld("molecular_density", "density",
                                  base.molecular_density),
            phonon_frequency=fld("phonon_frequency", "rate", base.phonon_frequency),
            temperature=fld("temperature", "temperature", base.temperature),
            n_eff=fld("n_eff", "dimensionless", base.n_eff),
            n_raman_medium=fld("n_raman_medium", "dimensionless",
                               base.n_raman_medium),
            group_index=fld("group_index", "dimensionless", base.group_index),
            field_integral_quartic=fld("field_integral_quartic", "inv_area",
                                       base.field_integral_quartic),
            field_integral_norm=fld("field_integral_norm", "dimensionless",
                                    base.field_integral_norm),
        )

    def noise_settings(self):
        sec = self.section("noise")
        return {
            "eta_nl": self._field(sec, "noise", "eta_nl",
                                  "nonlinear_coefficient", default=200.0),
            "linear_coefficient": self._field(sec, "noise", "linear_coefficient",
                                              "dimensionless", default=5e-3),
            "detuning": self._field(sec, "noise", "detuning", "length",
                                    default=None),
            "lambda_signal": self._field(sec, "noise", "signal_wavelength",
                                         "length", default=1630e-9),
        }

    def quantum_settings(self):
        sec = self.section("quantum")
        return {
            "pairs_per_setting": int(self._field(sec, "quantum",
                                                 "pairs_per_setting",
                                                 default=10_000)),
            "visibility": self._field(sec, "quantum", "analyzer_visibility",
                                      "dimensionless", default=1.0),
            "phase_error": self._field(sec, "quantum", "analyzer_phase_error",
                                       "dimensionless", default=0.0),
            "v_idler": self._field(sec, "quantum", "v_idler", "dimensionless",
                                   default=0.944),
            "v_signal": self._field(sec, "quantum", "v_signal", "dimensionless",
                                    default=0.9832),
        }

    def tuning_settings(self):
        sec = self.section("tuning") if self.has_section("tuning") else {}
        return {
            "passes": int(self._field(sec, "tuning", "passes", default=2)),
            "power": self._field(sec, "tuning", "power", "power", default=None),
        }


def tuned_waveguide(scenario, voltages=None):
    """Waveguide with heater shifts baked into the profile (for reporting)."""
    spec = scenario.waveguide()
    heaters = spec.heaters
    if voltages is not None:
        heaters = HeaterArray(count=heaters.count, span=heaters.span,
                              kappa_h=heaters.kappa_h,
                              voltages=tuple(voltages), v_max=heaters.v_max,
                              start=heaters.start)
    if heaters is None:
        return spec
    return spec.with_profile(apply_heaters(spec.mismatch_profile, heaters))
