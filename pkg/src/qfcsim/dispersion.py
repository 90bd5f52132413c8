"""Effective-index models and phase-matching solves.

Three guided modes take part in the conversion: the 1550-nm-band signal, the
1550-nm-band pump and the 780-nm-band sum mode.  Each is described by a
polynomial effective index n_eff(lam) = sum c_i (lam - lam_ref)^i valid over
an explicit wavelength window.  The frequency condition
1/lam_sum = 1/lam_signal + 1/lam_pump fixes the sum wavelength, and the phase
mismatch is

    dk = 2*pi * (n_sum/lam_sum - n_signal/lam_signal - n_pump/lam_pump).

No published index data exists for the device, so shipped models are
synthetic fixtures constructed analytically (see `matched_linear_model`).
"""

import enum
from dataclasses import dataclass, field

import numpy as np


class Mode(str, enum.Enum):
    TE1550 = "te1550"      # 1550-nm-band signal (TE00)
    PUMP1550 = "pump1550"  # 1550-nm-band pump
    TM780 = "tm780"        # 780-nm-band sum mode (TM00)


class WindowError(ValueError):
    """Wavelength outside a mode's declared validity window."""


class BracketError(ValueError):
    """Root not bracketed by the supplied wavelength interval."""


@dataclass(frozen=True)
class ModeDispersion:
    """Polynomial effective index of one mode around a reference wavelength.

    coefficients[i] multiplies (lam - reference_wavelength)^i; wavelengths in
    meters, index dimensionless.
    """

    mode: Mode
    reference_wavelength: float
    coefficients: tuple
    window: tuple  # (lam_min, lam_max), evaluation outside is an error

    def __post_init__(self):
        lo, hi = self.window
        if not lo < hi:
            raise ValueError(f"empty validity window {self.window} for {self.mode}")
        if not self.coefficients:
            raise ValueError("need at least one polynomial coefficient")
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))

    def index(self, wavelength):
        lo, hi = self.window
        if not (lo <= wavelength <= hi):
            raise WindowError(
                f"wavelength {wavelength:.6e} m outside validity window "
                f"[{lo:.6e}, {hi:.6e}] m of mode {self.mode.value}"
            )
        return float(
            np.polynomial.polynomial.polyval(
                wavelength - self.reference_wavelength, self.coefficients
            )
        )


@dataclass(frozen=True)
class DispersionModel:
    """One ModeDispersion per mode plus derived device constants.

    dispersion_factor is (d dk / d lam)^-1 at the phase-matching point
    [m per (rad/m)]; it converts detuning bandwidths to wavelength
    bandwidths and enters the self-calibrated efficiency ratio.
    group_index_780 is the 780-nm-band group index (5.7 for the device).
    """

    modes: tuple
    dispersion_factor: float
    group_index_780: float = 5.7

    def __post_init__(self):
        labels = [m.mode for m in self.modes]
        if len(labels) != 3 or set(labels) != set(Mode):
            raise ValueError("need exactly one ModeDispersion per mode label")
        if self.dispersion_factor <= 0:
            raise ValueError("dispersion_factor must be positive")

    def mode_dispersion(self, mode):
        for m in self.modes:
            if m.mode == mode:
                return m
        raise KeyError(mode)


def effective_index(model, mode, wavelength):
    """n_eff of `mode` at `wavelength` [m]; WindowError outside the window."""
    return model.mode_dispersion(Mode(mode)).index(wavelength)


def sum_wavelength(lambda_signal, lambda_pump):
    """Frequency condition: 1/lam_sum = 1/lam_signal + 1/lam_pump."""
    return 1.0 / (1.0 / lambda_signal + 1.0 / lambda_pump)


def phase_mismatch(model, lambda_signal, lambda_pump):
    """Wavevector mismatch dk [rad/m] for a signal/pump wavelength pair."""
    lam_sum = sum_wavelength(lambda_signal, lambda_pump)
    n_sig = effective_index(model, Mode.TE1550, lambda_signal)
    n_pump = effective_index(model, Mode.PUMP1550, lambda_pump)
    n_sum = effective_index(model, Mode.TM780, lam_sum)
    return 2.0 * np.pi * (n_sum / lam_sum - n_sig / lambda_signal - n_pump / lambda_pump)


#: absolute |dk| tolerance of the phase-matching solve [rad/m]
PHASE_MATCH_TOL = 1e-3


def solve_phase_matching(model, lambda_pump, bracket):
    """Signal wavelength with |dk| < 1e-3 rad/m, by bisection over `bracket`.

    If dk vanishes identically over the bracket (all-roots degenerate case)
    the bracket midpoint is returned; if dk has the same sign at both ends a
    BracketError is raised.  Deterministic: plain bisection to the fixed
    absolute tolerance.
    """
    lo, hi = bracket
    if not lo < hi:
        raise BracketError(f"empty bracket {bracket}")
    f_lo = phase_mismatch(model, lo, lambda_pump)
    f_hi = phase_mismatch(model, hi, lambda_pump)
    if abs(f_lo) < PHASE_MATCH_TOL and abs(f_hi) < PHASE_MATCH_TOL:
        # degenerate: every wavelength matches; documented tie rule
        return 0.5 * (lo + hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise BracketError(
            f"phase mismatch does not change sign over [{lo:.6e}, {hi:.6e}] m "
            f"(dk = {f_lo:.3e} and {f_hi:.3e} rad/m)"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = phase_mismatch(model, mid, lambda_pump)
        if abs(f_mid) < PHASE_MATCH_TOL:
            return mid
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo <= np.finfo(float).eps * max(abs(lo), abs(hi)):
            return mid
    return 0.5 * (lo + hi)


def finite_difference_slope(model, lambda_pump, lambda_signal, h=1e-12):
    """d dk / d lam_signal by central differences, for consistency checks."""
    up = phase_mismatch(model, lambda_signal + h, lambda_pump)
    dn = phase_mismatch(model, lambda_signal - h, lambda_pump)
    return (up - dn) / (2.0 * h)


def matched_linear_model(
    lambda_signal=1533e-9,
    lambda_pump=1550e-9,
    dispersion_factor=2.6e-13,
    n_signal=2.10,
    n_pump=2.05,
    signal_slope=-5.0e4,
    group_index_780=5.7,
    signal_window=(1.50e-6, 1.57e-6),
    pump_window=(1.50e-6, 1.60e-6),
    sum_window=(7.55e-7, 7.90e-7),
):
    """Construct a linear-dispersion model phase-matched at the given point.

    The sum-mode constant term is solved from dk=0 and its slope from the
    requested dispersion factor, so solve_phase_matching recovers
    `lambda_signal` exactly and d dk/d lam equals 1/dispersion_factor at the
    root.  This is the synthetic stand-in for the device's simulated
    dispersion; all numbers are configuration, not material physics.
    """
    lam_sum = sum_wavelength(lambda_signal, lambda_pump)
    n_sum0 = lam_sum * (n_signal / lambda_signal + n_pump / lambda_pump)
    slope = 1.0 / dispersion_factor
    # d dk/d lam = 2 pi/lam^2 [c1_sum*lam_sum - n_sum - c1_sig*lam + n_sig]
    sum_slope = (
        slope * lambda_signal**2 / (2.0 * np.pi)
        + n_sum0
        + signal_slope * lambda_signal
        - n_signal
    ) / lam_sum
    modes = (
        ModeDispersion(Mode.TE1550, lambda_signal, (n_signal, signal_slope), signal_window),
        ModeDispersion(Mode.PUMP1550, lambda_pump, (n_pump,), pump_window),
        ModeDispersion(Mode.TM780, lam_sum, (n_sum0, sum_slope), sum_window),
    )
    return DispersionModel(modes=modes, dispersion_factor=dispersion_factor,
                           group_index_780=group_index_780)
