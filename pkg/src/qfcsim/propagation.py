"""Coupled-mode propagation of the signal and converted fields.

With the pump undepleted and lossless, the photon-flux amplitudes b (1550
band) and c (780 band) obey

    db/dz = -i g c e^{-i phi(z)} - (alpha/2) b
    dc/dz = -i g b e^{+i phi(z)} - (beta/2)  c

with coupling rate g = sqrt(eta_sfg * P_p / 2) and accumulated mismatch
phase phi(z) = integral of dk(z').  dk(z) is piecewise constant on the
waveguide's mismatch profile; for a uniform profile phi(z) = dk*z and the
classic closed forms apply.  |b|^2 and |c|^2 are photon fluxes, so the
SFG and DFG efficiencies are flux ratios.

Two propagation engines are provided and cross-validated:

* `integrate` - deterministic fixed-step classical RK4 (the reference
  contract; steps never straddle a profile cell boundary, so the integrand
  stays smooth within each step);
* `transfer_matrices` - the exact per-cell propagator.  In the frame
  (b, C = c e^{-i phi}) each constant-dk cell has a constant coefficient
  matrix whose exponential is evaluated in closed form, which is what the
  tuner uses for its many spectrum evaluations.

A Backward pump means both beams enter the far facet: the profile is
traversed in reverse.  SFG converts b -> c, DFG converts c -> b.
"""

import enum
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import least_squares


class Direction(str, enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


class Process(str, enum.Enum):
    SFG = "sfg"
    DFG = "dfg"


class StepSizeError(ValueError):
    """Integration step violates the stability/accuracy precondition."""


class NumericalError(RuntimeError):
    """Propagation produced non-finite fields."""


class FitError(RuntimeError):
    """Efficiency-curve fit failed to converge."""


@dataclass(frozen=True)
class MismatchProfile:
    """Piecewise-constant dk(z) on a uniform cell grid tiling [0, L].

    offsets[i] is the mismatch [rad/m] on cell i of width cell_size.
    """

    cell_size: float
    offsets: tuple

    def __post_init__(self):
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        object.__setattr__(self, "offsets", tuple(float(o) for o in self.offsets))
        if not self.offsets:
            raise ValueError("profile needs at least one cell")

    @property
    def length(self):
        return self.cell_size * len(self.offsets)

    @classmethod
    def uniform(cls, length, offset=0.0, n_cells=1):
        return cls(cell_size=length / n_cells, offsets=(offset,) * n_cells)

    def offsets_array(self):
        return np.array(self.offsets)

    def shifted(self, delta):
        """New profile with `delta` (scalar or per-cell array) added."""
        new = self.offsets_array() + delta
        return MismatchProfile(self.cell_size, tuple(new))


@dataclass(frozen=True)
class WaveguideSpec:
    """Geometry, per-band losses, nonlinear strength and mismatch profile.

    Losses are power attenuation coefficients [1/m]; eta_sfg_norm is the
    weak-pump normalized SFG efficiency [W^-1 m^-2].  `heaters` optionally
    carries the nanoheater array acting on the profile (see tuner module).
    """

    length: float
    loss_1550: float
    loss_780: float
    eta_sfg_norm: float
    mismatch_profile: MismatchProfile = None
    heaters: object = None

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("waveguide length must be positive")
        if self.loss_1550 < 0 or self.loss_780 < 0:
            raise ValueError("losses must be nonnegative")
        if self.eta_sfg_norm < 0:
            raise ValueError("eta_sfg_norm must be nonnegative")
        if self.mismatch_profile is None:
            object.__setattr__(
                self, "mismatch_profile", MismatchProfile.uniform(self.length)
            )
        if not np.isclose(self.mismatch_profile.length, self.length, rtol=1e-9):
            raise ValueError(
                f"mismatch profile tiles {self.mismatch_profile.length:.6e} m, "
                f"waveguide is {self.length:.6e} m"
            )

    def with_profile(self, profile):
        return replace(self, mismatch_profile=profile)


@dataclass(frozen=True)
class PumpConfig:
    power: float
    wavelength: float = 1550e-9
    direction: Direction = Direction.FORWARD
    process: Process = Process.SFG

    def __post_init__(self):
        if self.power < 0:
            raise ValueError("pump power must be nonnegative")


@dataclass(frozen=True)
class FieldState:
    """Complex photon-flux amplitudes at position z (|b|^2, |c|^2 in 1/s)."""

    b: complex
    c: complex
    z: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.b) and np.isfinite(self.c)):
            raise ValueError("field amplitudes must be finite")


@dataclass(frozen=True)
class ConversionSpectrum:
    """Sampled efficiency vs signal wavelength for one pump setting."""

    process: Process
    direction: Direction
    pump_power: float
    wavelengths: tuple
    efficiencies: tuple

    def __post_init__(self):
        lam = np.asarray(self.wavelengths, dtype=float)
        eta = np.asarray(self.efficiencies, dtype=float)
        if lam.shape != eta.shape or lam.ndim != 1:
            raise ValueError("wavelengths and efficiencies must be matching 1-d sequences")
        if np.any(np.diff(lam) <= 0):
            raise ValueError("wavelengths must be strictly increasing")
        if np.any(eta < -1e-12) or np.any(eta > 1.0 + 1e-9):
            raise ValueError("efficiencies must lie in [0, 1]")
        object.__setattr__(self, "wavelengths", tuple(lam))
        object.__setattr__(self, "efficiencies", tuple(eta))

    def arrays(self):
        return np.array(self.wavelengths), np.array(self.efficiencies)


def coupling_rate(eta_sfg_norm, pump_power):
    """g = sqrt(eta_sfg * P_p / 2) [1/m] for near-degenerate signal and pump."""
    if eta_sfg_norm < 0 or pump_power < 0:
        raise ValueError("eta_sfg_norm and pump power must be nonnegative")
    return float(np.sqrt(eta_sfg_norm * pump_power / 2.0))


def max_step(spec, pump, extra_offset=0.0):
    """Largest step satisfying the integrator precondition.

    step <= min(0.1/g, 0.1/max|dk|, 0.1/max(alpha, beta), L/100); the dk
    bound includes any detuning offset added on top of the profile.
    """
    g = coupling_rate(spec.eta_sfg_norm, pump.power)
    dk_max = float(np.max(np.abs(spec.mismatch_profile.offsets_array() + extra_offset)))
    caps = [spec.length / 100.0]
    for rate in (g, dk_max, max(spec.loss_1550, spec.loss_780)):
        if rate > 0:
            caps.append(0.1 / rate)
    return min(caps)


def default_step(spec, pump, extra_offset=0.0):
    """Default integration step: a quarter of the precondition cap."""
    return max_step(spec, pump, extra_offset) / 4.0


def _traversal_offsets(spec, pump):
    offs = spec.mismatch_profile.offsets_array()
    if pump.direction == Direction.BACKWARD:
        offs = offs[::-1]
    return offs


def _input_state(pump):
    if pump.process == Process.SFG:
        return 1.0 + 0.0j, 0.0 + 0.0j
    return 0.0 + 0.0j, 1.0 + 0.0j


def _rk4_cells(offsets, cell, g, alpha, beta, b, c, step, extra_offset=0.0,
               record=None):
    """RK4 through the cell sequence; phi accumulated exactly per cell.

    `record`, if given, collects (z, b, c) after every step; z is the
    distance traversed from the entry facet.
    """
    phi0 = 0.0
    z_base = 0.0
    for off in offsets:
        dk = off + extra_offset
        n_sub = max(1, int(np.ceil(cell / step - 1e-12)))
        h = cell / n_sub
        for i in range(n_sub):
            z0 = i * h

            def deriv(bb, cc, zz):
                ph = phi0 + dk * zz
                rot = np.exp(-1j * ph)
                db = -1j * g * cc * rot - 0.5 * alpha * bb
                dc = -1j * g * bb / rot - 0.5 * beta * cc
                return db, dc

            k1b, k1c = deriv(b, c, z0)
            k2b, k2c = deriv(b + 0.5 * h * k1b, c + 0.5 * h * k1c, z0 + 0.5 * h)
            k3b, k3c = deriv(b + 0.5 * h * k2b, c + 0.5 * h * k2c, z0 + 0.5 * h)
            k4b, k4c = deriv(b + h * k3b, c + h * k3c, z0 + h)
            b = b + h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
            c = c + h / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c)
            if record is not None:
                record.append((z_base + z0 + h, b, c))
        phi0 += dk * cell
        z_base += cell
    return b, c


def integrate(spec, pump, state, step=None):
    """Propagate `state` through the full waveguide with fixed-step RK4.

    The input sits at the entry facet (z=0 for Forward, z=L for Backward).
    Returns the FieldState at the exit facet.  Raises StepSizeError if the
    requested step exceeds the stability cap and NumericalError on
    non-finite output.
    """
    cap = max_step(spec, pump)
    if step is None:
        step = cap / 4.0
    if step > cap * (1.0 + 1e-12):
        raise StepSizeError(f"step {step:.3e} m exceeds the precondition cap {cap:.3e} m")
    if step <= 0:
        raise StepSizeError("step must be positive")
    entry = 0.0 if pump.direction == Direction.FORWARD else spec.length
    if not np.isclose(state.z, entry, atol=1e-12 + 1e-9 * spec.length):
        raise ValueError(f"input state sits at z={state.z}, expected entry facet z={entry}")
    g = coupling_rate(spec.eta_sfg_norm, pump.power)
    offs = _traversal_offsets(spec, pump)
    b, c = _rk4_cells(offs, spec.mismatch_profile.cell_size, g,
                      spec.loss_1550, spec.loss_780, state.b, state.c, step)
    if not (np.isfinite(b) and np.isfinite(c)):
        raise NumericalError("propagation produced non-finite fields")
    exit_z = spec.length - entry
    return FieldState(b=b, c=c, z=exit_z)


def field_trajectory(spec, pump, state, step=None):
    """Like `integrate` but returns (z, b, c) arrays at every RK4 step.

    z measures distance traversed from the entry facet.
    """
    cap = max_step(spec, pump)
    if step is None:
        step = cap / 4.0
    if step > cap * (1.0 + 1e-12):
        raise StepSizeError(f"step {step:.3e} m exceeds the precondition cap {cap:.3e} m")
    g = coupling_rate(spec.eta_sfg_norm, pump.power)
    offs = _traversal_offsets(spec, pump)
    rec = [(0.0, complex(state.b), complex(state.c))]
    _rk4_cells(offs, spec.mismatch_profile.cell_size, g,
               spec.loss_1550, spec.loss_780, state.b, state.c, step, record=rec)
    z = np.array([r[0] for r in rec])
    b = np.array([r[1] for r in rec])
    c = np.array([r[2] for r in rec])
    return z, b, c


def _mat2_mul(a, b):
    """Batched 2x2 matrix product on (..., 2, 2) arrays."""
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=complex)
    out[..., 0, 0] = a[..., 0, 0] * b[..., 0, 0] + a[..., 0, 1] * b[..., 1, 0]
    out[..., 0, 1] = a[..., 0, 0] * b[..., 0, 1] + a[..., 0, 1] * b[..., 1, 1]
    out[..., 1, 0] = a[..., 1, 0] * b[..., 0, 0] + a[..., 1, 1] * b[..., 1, 0]
    out[..., 1, 1] = a[..., 1, 0] * b[..., 0, 1] + a[..., 1, 1] * b[..., 1, 1]
    return out


def cell_propagator(dk, length, g, alpha, beta):
    """Exact transfer matrix of one constant-dk cell in the (b, C) frame.

    C = c e^{-i phi} absorbs the accumulated phase, leaving the constant
    matrix A = [[-alpha/2, -ig], [-ig, -beta/2 - i dk]]; expm(A*length) is
    evaluated via the traceless 2x2 closed form.  Broadcasts over dk.
    """
    dk = np.asarray(dk, dtype=complex)
    a11 = -0.5 * alpha
    a22 = -0.5 * beta - 1j * dk
    s = 0.5 * (a11 + a22)
    m11 = a11 - s
    q = np.sqrt(m11 * m11 - g * g)  # M^2 = q^2 I, branch-independent below
    ql = q * length
    small = np.abs(ql) < 1e-6
    q_safe = np.where(small, 1.0, q)
    sinhc = np.where(small, length * (1.0 + ql * ql / 6.0), np.sinh(ql) / q_safe)
    ch = np.cosh(ql)
    pref = np.exp(s * length)
    out = np.empty(dk.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = pref * (ch + sinhc * m11)
    out[..., 0, 1] = pref * sinhc * (-1j * g)
    out[..., 1, 0] = pref * sinhc * (-1j * g)
    out[..., 1, 1] = pref * (ch - sinhc * m11)
    return out


def transfer_matrices(spec, pump, dk_offsets=0.0):
    """Exact waveguide transfer matrix for each detuning offset.

    Returns a (..., 2, 2) array mapping (b, C) at the entry facet to the
    exit facet; |M[1,0]|^2 is the SFG efficiency, |M[0,1]|^2 the DFG one.
    """
    dk_offsets = np.atleast_1d(np.asarray(dk_offsets, dtype=float))
    offs = _traversal_offsets(spec, pump)
    g = coupling_rate(spec.eta_sfg_norm, pump.power)
    cell = spec.mismatch_profile.cell_size
    m = np.broadcast_to(np.eye(2, dtype=complex), dk_offsets.shape + (2, 2)).copy()
    for off in offs:
        m = _mat2_mul(cell_propagator(off + dk_offsets, cell, g,
                                      spec.loss_1550, spec.loss_780), m)
    return m


def detuning_efficiencies(spec, pump, dk_offsets, method="exact", step=None):
    """Conversion efficiency vs detuning offset added on top of the profile.

    method="exact" uses the closed-form cell propagator; method="rk4" runs
    `integrate` per offset (the contract path, 10x slower but independent).
    """
    dk_offsets = np.atleast_1d(np.asarray(dk_offsets, dtype=float))
    col = 0 if pump.process == Process.DFG else 1
    row = 1 - col
    if method == "exact":
        m = transfer_matrices(spec, pump, dk_offsets)
        return np.abs(m[..., col, row]) ** 2
    if method != "rk4":
        raise ValueError(f"unknown method {method!r}")
    g = coupling_rate(spec.eta_sfg_norm, pump.power)
    offs = _traversal_offsets(spec, pump)
    cell = spec.mismatch_profile.cell_size
    out = np.empty(dk_offsets.shape)
    for i, dk in enumerate(dk_offsets):
        h = default_step(spec, pump, extra_offset=dk) if step is None else step
        b0, c0 = _input_state(pump)
        b, c = _rk4_cells(offs, cell, g, spec.loss_1550, spec.loss_780,
                          b0, c0, h, extra_offset=dk)
        out[i] = abs(c) ** 2 if pump.process == Process.SFG else abs(b) ** 2
    return out


def conversion_efficiency(spec, pump, method="exact", step=None):
    """End-to-end flux conversion efficiency for the configured process."""
    return float(detuning_efficiencies(spec, pump, np.array([0.0]),
                                       method=method, step=step)[0])


def _sin_ratio_sq(z):
    """(sin(z)/z)^2 for complex z, analytic through z=0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-8
    z_safe = np.where(small, 1.0, z)
    r = np.where(small, 1.0 - z * z / 6.0, np.sin(z_safe) / z_safe)
    return r * r


def analytic_efficiency(eta_sfg_norm, pump_power, length, loss_1550, loss_780):
    """Closed-form phase-matched conversion efficiency.

    eta = eta_max * sin^2(L/4 * sqrt(8 eta P - (beta-alpha)^2)) with
    eta_max = 8 eta P e^{-(alpha+beta)L/2} / (8 eta P - (beta-alpha)^2);
    written as 8 eta P e^{-(alpha+beta)L/2} (L/4)^2 (sin u / u)^2 so the
    overdamped branch 8 eta P < (beta-alpha)^2 is the analytic continuation
    (sin of imaginary argument -> sinh) and the expression is continuous
    through the branch point.
    """
    if min(eta_sfg_norm, pump_power, length) < 0 or min(loss_1550, loss_780) < 0:
        raise ValueError("inputs must be nonnegative")
    drive = 8.0 * eta_sfg_norm * pump_power
    s = drive - (loss_780 - loss_1550) ** 2
    u = 0.25 * length * np.sqrt(complex(s))
    value = drive * np.exp(-0.5 * (loss_1550 + loss_780) * length) \
        * (0.25 * length) ** 2 * _sin_ratio_sq(u)
    return float(np.real(value))


def peak_efficiency(eta_sfg_norm, length, loss_1550, loss_780):
    """(eta_max, P_p) at the first conversion maximum.

    The peak solves L/4 * sqrt(8 eta P - (beta-alpha)^2) = pi/2, i.e.
    P = ((2 pi / L)^2 + (beta-alpha)^2) / (8 eta); the pump power needed
    scales as 1/L^2 while the efficiency scales as e^{-(alpha+beta)L/2}.
    """
    if eta_sfg_norm <= 0 or length <= 0:
        raise ValueError("eta_sfg_norm and length must be positive")
    power = ((2.0 * np.pi / length) ** 2 + (loss_780 - loss_1550) ** 2) \
        / (8.0 * eta_sfg_norm)
    return analytic_efficiency(eta_sfg_norm, power, length, loss_1550, loss_780), power


def spectrum(spec, pump, wavelengths, dispersion, step=None, method="rk4"):
    """ConversionSpectrum over a strictly increasing signal wavelength grid.

    The dispersion-derived mismatch at each wavelength is added on top of
    the waveguide's profile; per-wavelength efficiencies come from the RK4
    integrator (method="exact" switches to the closed-form engine).
    Spectra are always parameterized by the 1550-band wavelength.
    """
    from . import dispersion as disp

    lam = np.asarray(wavelengths, dtype=float)
    if np.any(np.diff(lam) <= 0):
        raise ValueError("wavelength grid must be strictly increasing")
    dk = np.array([disp.phase_mismatch(dispersion, l, pump.wavelength) for l in lam])
    eta = detuning_efficiencies(spec, pump, dk, method=method, step=step)
    eta = np.clip(eta, 0.0, 1.0)
    return ConversionSpectrum(process=pump.process, direction=pump.direction,
                              pump_power=pump.power,
                              wavelengths=tuple(lam), efficiencies=tuple(eta))


def fit_efficiency_curve(points, length, loss_1550, loss_780):
    """Least-squares fit of eta_sfg_norm to measured (P_p, eta) points.

    Needs >= 4 points with at least one near the peak.  The initial guess
    comes from the lowest-power point's small-signal slope; convergence is
    1e-9 relative with a 1e4 evaluation budget (FitError beyond that).
    """
    pts = sorted((float(p), float(e)) for p, e in points)
    if len(pts) < 4:
        raise ValueError(f"need at least 4 points to fit, got {len(pts)}")
    powers = np.array([p for p, _ in pts])
    etas = np.array([e for _, e in pts])
    if np.any(powers < 0) or np.any(etas < 0):
        raise ValueError("powers and efficiencies must be nonnegative")

    # small-signal: eta ~ eta_sfg * P * 8 (L/4)^2 e^{-(a+b)L/2} (sinh u0/u0)^2
    u0 = 0.25 * length * abs(loss_780 - loss_1550)
    sinh_ratio = 1.0 if u0 < 1e-12 else np.sinh(u0) / u0
    slope_factor = 8.0 * (0.25 * length) ** 2 \
        * np.exp(-0.5 * (loss_1550 + loss_780) * length) * sinh_ratio ** 2
    p1, e1 = next(((p, e) for p, e in pts if p > 0 and e > 0), (None, None))
    x0 = e1 / (p1 * slope_factor) if p1 is not None else 1.0

    def residuals(x):
        return np.array([
            analytic_efficiency(x[0], p, length, loss_1550, loss_780) for p in powers
        ]) - etas

    res = least_squares(residuals, x0=[x0], bounds=([0.0], [np.inf]),
                        xtol=1e-9, ftol=1e-15, gtol=None, max_nfev=10_000)
    if not res.success:
        raise FitError(
            f"efficiency-curve fit did not converge: {res.message}; "
            f"residual norm {np.linalg.norm(res.fun):.3e}"
        )
    return float(res.x[0])


def loss_normalized_efficiency(eta_max, pump_power, length):
    """Benchmark metric eta_max / (P_p * L^2) [W^-1 m^-2]."""
    if eta_max <= 0 or pump_power <= 0 or length <= 0:
        raise ValueError("all inputs must be positive")
    return eta_max / (pump_power * length**2)
