"""Disorder, nanoheater actuation and sequential phase-matching tuning.

Film-thickness nonuniformity is modeled as a correlated random walk of the
local mismatch dk(z).  A heater array counteracts it: each heater adds a
one-sided Joule shift dk_j = kappa_h * V_j^2 over its span, so tuning
equalizes all segments up to a common mismatch level (the peak wavelength
shifts, the shape recovers).  The tuning procedure mirrors the experimental
one: segments are tuned one by one from the signal input end for SFG (from
the output end for DFG), each by a 1-D golden-section search maximizing the
converted peak over a detuning window, swept `passes` times, followed by a
final sweep that minimizes the residual signal transmission at the peak.

Spectrum quality is summarized by the self-calibrated ratio
R = eta_peak * 2*pi*(d dk/d lam)^-1 / (A * L) with A the spectrum area,
which is 1 for an ideal sinc^2 spectrum and insensitive to any overall
rescaling of the efficiency axis.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .propagation import (
    Direction,
    MismatchProfile,
    Process,
    _mat2_mul,
    cell_propagator,
    coupling_rate,
    detuning_efficiencies,
)

#: full width at half maximum of sinc^2(x L/2) in x, times L
SINC2_FWHM = 5.57


class ActuationError(ValueError):
    """Heater voltage outside the allowed range."""


class CoverageError(ValueError):
    """Spectrum does not cover the conversion lobe well enough."""


class DataError(ValueError):
    """Malformed measured data."""


@dataclass(frozen=True)
class HeaterArray:
    """Contiguous array of nanoheaters starting at `start` from the z=0 facet.

    Voltage maps to a uniform mismatch shift kappa_h * V^2 [rad/m] over each
    heater's span; no thermal crosstalk between neighbours is modeled.
    """

    count: int
    span: float
    kappa_h: float
    voltages: tuple = None
    v_max: float = 5.0
    start: float = 0.0

    def __post_init__(self):
        if self.count < 1 or self.span <= 0 or self.kappa_h < 0:
            raise ValueError("invalid heater geometry")
        if self.voltages is None:
            object.__setattr__(self, "voltages", (0.0,) * self.count)
        volts = tuple(float(v) for v in self.voltages)
        if len(volts) != self.count:
            raise ValueError(f"need {self.count} voltages, got {len(volts)}")
        if any(v < 0 or v > self.v_max for v in volts):
            raise ActuationError(
                f"voltages must lie in [0, {self.v_max}] V, got {volts}"
            )
        object.__setattr__(self, "voltages", volts)

    @property
    def total_span(self):
        return self.count * self.span

    def with_voltage(self, index, volt):
        volts = list(self.voltages)
        volts[index] = volt
        return replace(self, voltages=tuple(volts))

    def zeroed(self):
        return replace(self, voltages=(0.0,) * self.count)

    def shifts(self):
        """Per-heater mismatch shift kappa_h * V^2 [rad/m]."""
        return np.array([self.kappa_h * v * v for v in self.voltages])


@dataclass(frozen=True)
class DisorderSpec:
    """Correlated-random-walk disorder of the mismatch profile.

    Increments follow a stationary AR(1) process with per-step standard
    deviation sigma_step and correlation exp(-cell_size/correlation_length);
    the walk (cumulative sum) is the per-cell mismatch offset, zero mean in
    the ensemble sense.  Parameters are configuration, not physics claims.
    """

    seed: int
    cell_size: float
    sigma_step: float
    correlation_length: float = 0.0

    def __post_init__(self):
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        if self.sigma_step < 0 or self.correlation_length < 0:
            raise ValueError("sigma_step and correlation_length must be nonnegative")


@dataclass(frozen=True)
class CalibrationReport:
    """Self-calibration metrics of one conversion spectrum.

    ratio is R; area has units of the spectrum's x axis times efficiency;
    bandwidth / bandwidth_ideal are the measured and ideal FWHM on that same
    axis.  eta0_corrected = eta_sfg_measured / R when a measured normalized
    efficiency is supplied.
    """

    ratio: float
    area: float
    bandwidth: float
    bandwidth_ideal: float
    eta0_corrected: float = None

    @property
    def bandwidth_ratio(self):
        return self.bandwidth / self.bandwidth_ideal


@dataclass(frozen=True)
class TuneResult:
    """Outcome of sequential_tune: tuned heaters plus objective history."""

    heaters: HeaterArray
    peak_history: tuple
    residual_history: tuple
    peak_detuning: float

    @property
    def voltages(self):
        return self.heaters.voltages


def disorder_substream(seed, label="disorder"):
    """Deterministic named RNG substream derived from a scenario seed."""
    name_key = int.from_bytes(label.encode("utf-8"), "big") % (2**32)
    return np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                        spawn_key=(name_key,)))


def generate_disorder(spec, length, rng=None):
    """Mismatch profile from a seeded correlated random walk over `length`."""
    n = round(length / spec.cell_size)
    if not math.isclose(n * spec.cell_size, length, rel_tol=1e-9):
        raise ValueError("cell_size must divide the waveguide length")
    if rng is None:
        rng = disorder_substream(spec.seed)
    xi = rng.standard_normal(n)
    if spec.correlation_length > 0:
        rho = math.exp(-spec.cell_size / spec.correlation_length)
    else:
        rho = 0.0
    steps = np.empty(n)
    steps[0] = spec.sigma_step * xi[0]
    scale = spec.sigma_step * math.sqrt(1.0 - rho * rho)
    for i in range(1, n):
        steps[i] = rho * steps[i - 1] + scale * xi[i]
    return MismatchProfile(spec.cell_size, tuple(np.cumsum(steps)))


def _heater_cell_range(heaters, index, cell_size, n_cells):
    lo = heaters.start + index * heaters.span
    hi = lo + heaters.span
    i0 = int(round(lo / cell_size))
    i1 = int(round(hi / cell_size))
    if not (math.isclose(i0 * cell_size, lo, rel_tol=1e-9, abs_tol=1e-15)
            and math.isclose(i1 * cell_size, hi, rel_tol=1e-9, abs_tol=1e-15)):
        raise ValueError("heater spans must align with profile cell boundaries")
    if i0 < 0 or i1 > n_cells:
        raise ValueError("heater span extends beyond the waveguide")
    return i0, i1


def apply_heaters(profile, heaters):
    """Profile with each heater's kappa_h * V^2 shift added over its span."""
    offsets = profile.offsets_array()
    shifts = heaters.shifts()
    for j in range(heaters.count):
        i0, i1 = _heater_cell_range(heaters, j, profile.cell_size, len(offsets))
        offsets[i0:i1] += shifts[j]
    return MismatchProfile(profile.cell_size, tuple(offsets))


def thermal_drift(profile, pump_power, kappa_thermal, decay_length=None,
                  nonuniform_weight=0.5):
    """Pump-induced thermo-optic shift of the mismatch profile.

    Adds kappa_thermal * P_p * (1 + w * exp(-z/decay_length)) per cell: a
    uniform term plus a longitudinally decaying one standing in for
    absorption heating near the input facet.  decay_length defaults to the
    profile length; decay_length=inf makes the shift uniform (and hence
    fully correctable by re-tuning).
    """
    if pump_power < 0:
        raise ValueError("pump power must be nonnegative")
    if decay_length is None:
        decay_length = profile.length
    n = len(profile.offsets)
    z = (np.arange(n) + 0.5) * profile.cell_size
    decay = np.exp(-z / decay_length) if np.isfinite(decay_length) else np.ones(n)
    shift = kappa_thermal * pump_power * (1.0 + nonuniform_weight * decay)
    return profile.shifted(shift)


def _golden_max(func, lo, hi, tol):
    """Golden-section maximization, deterministic to an absolute x tolerance."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = func(c), func(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = func(d)
    x = 0.5 * (a + b)
    return x, func(x)


def _scan_golden_max(func, lo, hi, tol, n_scan=16):
    """Bracketing scan followed by golden-section refinement.

    The voltage -> shift map is quadratic, so at large kappa_h the segment
    objective is multimodal over [0, v_max]; a deterministic even scan
    locates the best bracket before the unimodal golden search.
    """
    xs = np.linspace(lo, hi, n_scan + 1)
    vals = [func(x) for x in xs]
    best = int(np.argmax(vals))
    a = xs[max(best - 1, 0)]
    b = xs[min(best + 1, n_scan)]
    x, f = _golden_max(func, a, b, tol)
    if vals[best] > f:
        return float(xs[best]), vals[best]
    return x, f


class _SpectrumEngine:
    """Cached exact-propagator evaluation of tuning objectives.

    Works in "tune order": the cell sequence is oriented so the tuned
    region grows from index 0 - the signal entry facet for SFG, the exit
    facet for DFG (the per-cell matrices are symmetric, so reversing the
    sequence transposes the product and |T[1,0]| measures the conversion of
    the physical cell range either way).  Prefix/suffix products are cached
    per segment so a candidate voltage only recomputes its own cells.
    """

    def __init__(self, spec, pump, dk_grid):
        self.spec = spec
        self.pump = pump
        self.grid = dk_grid
        self.g = coupling_rate(spec.eta_sfg_norm, pump.power)
        self.cell = spec.mismatch_profile.cell_size
        self.n_cells = len(spec.mismatch_profile.offsets)
        reverse = (pump.direction == Direction.BACKWARD) != \
            (pump.process == Process.DFG)
        self.reverse = reverse

    def tune_offsets(self, offsets):
        return offsets[::-1] if self.reverse else offsets

    def tune_range(self, i0, i1):
        """Map a z-cell range onto tune-order indices."""
        if self.reverse:
            return self.n_cells - i1, self.n_cells - i0
        return i0, i1

    def _cell_matrix(self, offset):
        return cell_propagator(offset + self.grid, self.cell, self.g,
                               self.spec.loss_1550, self.spec.loss_780)

    def _chain(self, offsets, m0=None):
        m = m0
        if m is None:
            m = np.broadcast_to(np.eye(2, dtype=complex),
                                self.grid.shape + (2, 2)).copy()
        for off in offsets:
            m = _mat2_mul(self._cell_matrix(off), m)
        return m

    def full_matrix(self, offsets):
        return self._chain(self.tune_offsets(offsets))

    def cache_segment(self, offsets, i0, i1, with_suffix=True):
        """Prefix/suffix products around z-cells [i0, i1) in tune order."""
        offs = self.tune_offsets(offsets)
        j0, j1 = self.tune_range(i0, i1)
        self._prefix = self._chain(offs[:j0])
        self._suffix = self._chain(offs[j1:]) if with_suffix else None
        self._segment_offsets = offs[j0:j1]

    def segment_matrix(self, shift, partial=False):
        """Transfer matrix with the cached segment shifted by `shift`.

        partial=True stops at the segment's end (the tuned-so-far region),
        which is the quantity the sequential alignment monitors.
        """
        m = self._chain(self._segment_offsets + shift, m0=self._prefix)
        if partial:
            return m
        return _mat2_mul(self._suffix, m)

    def efficiencies(self, matrix):
        return np.abs(matrix[..., 1, 0]) ** 2

    def residual(self, matrix):
        """Transmission of the injected band at each detuning."""
        if self.pump.process == Process.SFG:
            return np.abs(matrix[..., 0, 0]) ** 2
        return np.abs(matrix[..., 1, 1]) ** 2


def objective_grid(spec, margin_factor=25.0, pitch_fraction=20.0,
                   extra_low=0.0):
    """Detuning grid covering the profile's conversion features.

    A cell at mismatch offset mu converts where the added detuning cancels
    it (x = -mu), so the grid spans [-max_offset, -min_offset] widened by
    margin_factor/L on each side (sinc^2 tails), sampled at
    B0/pitch_fraction with B0 = 5.57/L the ideal detuning FWHM.  extra_low
    extends the low end for heater headroom.
    """
    length = spec.length
    offsets = spec.mismatch_profile.offsets_array()
    lo = -offsets.max() - extra_low - margin_factor / length
    hi = -offsets.min() + margin_factor / length
    pitch = SINC2_FWHM / length / pitch_fraction
    n = int(np.ceil((hi - lo) / pitch)) + 1
    return lo + pitch * np.arange(n)


def sequential_tune(spec, pump, passes=2, voltage_tol=0.01, grid=None,
                    window_factor=12.0):
    """Tune the heater array segment by segment; returns a TuneResult.

    Mirrors the experimental procedure.  Heaters shift the mismatch one way
    only (kappa_h V^2 >= 0), so segments are equalized upward to an anchor
    level: the first heater in tune order lifts its span to the highest
    span-mean mismatch of the profile, isolating its conversion response
    from the untuned background; every following heater is then set by a
    scanned golden-section search (absolute tolerance `voltage_tol` volts)
    maximizing the converted peak over a detuning window of half-width
    `window_factor`/L around the anchor.  Sweeps run from the signal input
    end for SFG and from the output end for DFG, `passes` times (the anchor
    heater rejoins from the second pass).  Updates are accepted only when
    they improve the objective, so the recorded peak history is
    nondecreasing.  A final sweep minimizes the residual transmission of
    the injected band at the tuned peak.  Deterministic for fixed grids.
    """
    heaters = spec.heaters
    if heaters is None:
        raise ValueError("waveguide spec carries no heater array")
    base = spec.mismatch_profile
    base_offsets = base.offsets_array()

    n_cells = len(base.offsets)
    ranges = [_heater_cell_range(heaters, j, base.cell_size, n_cells)
              for j in range(heaters.count)]
    order = list(range(heaters.count))
    if pump.process == Process.DFG:
        order = order[::-1]  # tune from the signal output side
    if pump.direction == Direction.BACKWARD:
        order = order[::-1]  # entry facet is at z = L

    # anchor: lift the first-ordered span to the highest span-mean level
    # (capped at the correction capacity), so the other spans can reach it
    # with a nonnegative shift
    span_means = [base_offsets[i0:i1].mean() for i0, i1 in ranges]
    capacity = heaters.kappa_h * heaters.v_max**2
    target = min(max(span_means), min(span_means) + 0.85 * capacity)
    j0 = order[0]
    target = max(target, span_means[j0])
    if heaters.kappa_h > 0:
        lift = max(target - span_means[j0], 0.0)
        v_anchor = min(math.sqrt(lift / heaters.kappa_h), heaters.v_max)
        heaters = heaters.with_voltage(j0, v_anchor)

    if grid is None:
        # spans equalized at mismatch `target` convert at detuning -target;
        # the grid passes through -target exactly so the aligned state is
        # sampled at its true peak
        length = spec.length
        pitch = SINC2_FWHM / length / 20.0
        half_n = int(np.ceil(window_factor / length / pitch))
        grid = -target + pitch * np.arange(-half_n, half_n + 1)
    engine = _SpectrumEngine(spec, pump, np.asarray(grid, dtype=float))

    def tune_segment(j, partial):
        """One golden-section update; partial=True monitors the tuned-so-far
        region only (the sequential alignment signal), partial=False the
        full spectrum."""
        i0, i1 = ranges[j]
        others = heaters.with_voltage(j, 0.0)
        offsets = apply_heaters(base, others).offsets_array()
        engine.cache_segment(offsets, i0, i1, with_suffix=not partial)

        def peak_of(volt):
            shift = heaters.kappa_h * volt * volt
            matrix = engine.segment_matrix(shift, partial=partial)
            return float(engine.efficiencies(matrix).max())

        current = peak_of(heaters.voltages[j])
        v_new, f_new = _scan_golden_max(peak_of, 0.0, heaters.v_max, voltage_tol)
        if f_new > current:
            return heaters.with_voltage(j, v_new), f_new
        return heaters, current

    # pass 1 aligns each segment with the combined response of the already
    # tuned ones (growing from the anchor); later passes refine against the
    # full spectrum, where parking a segment out of band never pays off
    # once everything is aligned
    peak_history = []
    for sweep in range(passes):
        segments = order[1:] if sweep == 0 else order
        for j in segments:
            heaters, value = tune_segment(j, partial=(sweep == 0))
            peak_history.append(value)

    # stage 2: deepen the transmission dip of the injected band at the peak
    tuned_offsets = apply_heaters(base, heaters).offsets_array()
    eff = engine.efficiencies(engine.full_matrix(tuned_offsets))
    peak_idx = int(np.argmax(eff))
    peak_dk = float(engine.grid[peak_idx])
    residual_history = []
    for j in order:
        i0, i1 = ranges[j]
        others = heaters.with_voltage(j, 0.0)
        offsets = apply_heaters(base, others).offsets_array()
        engine.cache_segment(offsets, i0, i1)

        def residual_of(volt):
            shift = heaters.kappa_h * volt * volt
            return float(engine.residual(engine.segment_matrix(shift))[peak_idx])

        current = residual_of(heaters.voltages[j])
        v_new, f_new = _scan_golden_max(lambda v: -residual_of(v), 0.0,
                                        heaters.v_max, voltage_tol)
        if -f_new < current:
            heaters = heaters.with_voltage(j, v_new)
            current = -f_new
        residual_history.append(current)

    return TuneResult(heaters=heaters, peak_history=tuple(peak_history),
                      residual_history=tuple(residual_history),
                      peak_detuning=peak_dk)


def corrected_eta0(eta_sfg_measured, ratio):
    """Phase-mismatch-corrected normalized efficiency eta0 = eta / R."""
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    return eta_sfg_measured / ratio


def _half_power_width(x, y):
    """FWHM via linear interpolation of the half-maximum crossings."""
    peak_idx = int(np.argmax(y))
    half = y[peak_idx] / 2.0
    left = None
    for i in range(peak_idx, 0, -1):
        if y[i - 1] <= half <= y[i]:
            frac = (y[i] - half) / (y[i] - y[i - 1])
            left = x[i] - frac * (x[i] - x[i - 1])
            break
    right = None
    for i in range(peak_idx, len(y) - 1):
        if y[i + 1] <= half <= y[i]:
            frac = (y[i] - half) / (y[i] - y[i + 1])
            right = x[i] + frac * (x[i + 1] - x[i])
            break
    if left is None or right is None:
        raise CoverageError("spectrum does not resolve both half-power crossings")
    return right - left


def _calibration(x, eta, length, x_per_dk, eta_sfg_measured=None):
    """Shared R / bandwidth computation on either a wavelength or dk axis."""
    x = np.asarray(x, dtype=float)
    eta = np.asarray(eta, dtype=float)
    peak = float(eta.max())
    if peak <= 0:
        raise CoverageError("spectrum has no conversion peak")
    if eta[0] > 0.01 * peak or eta[-1] > 0.01 * peak:
        raise CoverageError(
            "spectrum must cover the full lobe (edge samples below 1% of peak); "
            f"edges are {eta[0] / peak:.2%} and {eta[-1] / peak:.2%} of the peak"
        )
    area = float(np.trapezoid(eta, x))
    ratio = peak * 2.0 * np.pi * x_per_dk / (area * length)
    bandwidth = _half_power_width(x, eta)
    bandwidth_ideal = SINC2_FWHM / length * x_per_dk
    eta0 = None if eta_sfg_measured is None else corrected_eta0(eta_sfg_measured, ratio)
    return CalibrationReport(ratio=ratio, area=area, bandwidth=bandwidth,
                             bandwidth_ideal=bandwidth_ideal, eta0_corrected=eta0)


def self_calibrated_R(spectrum, dispersion_factor, length, eta_sfg_measured=None):
    """CalibrationReport of a wavelength spectrum.

    R = eta_peak * 2*pi*dispersion_factor / (A * L) with A the trapezoidal
    spectrum area and B0 = (5.57/L) * dispersion_factor the ideal FWHM; the
    spectrum must cover the lobe out into the tails (they fall off as
    1/dk^2, so narrow windows inflate R).  R is unchanged by any uniform
    rescaling of the efficiency axis, hence "self-calibrated".
    """
    lam, eta = spectrum.arrays()
    return _calibration(lam, eta, length, dispersion_factor, eta_sfg_measured)


def detuning_calibration(spec, pump, grid=None, pitch_fraction=40.0,
                         margin_factor=140.0, eta_sfg_measured=None,
                         method="exact"):
    """CalibrationReport computed directly on a detuning axis.

    The dispersion factor cancels between peak and area on this axis, so no
    dispersion model is needed; the default window half-width of 140/L keeps
    the truncated sinc^2 tail below ~0.5% of the area.
    """
    if grid is None:
        grid = objective_grid(spec, margin_factor=margin_factor,
                              pitch_fraction=pitch_fraction)
    eta = detuning_efficiencies(spec, pump, grid, method=method)
    return _calibration(grid, eta, spec.length, 1.0, eta_sfg_measured)


def bandwidth_to_hz(bandwidth_lambda, wavelength):
    """Convert a wavelength FWHM [m] to frequency [Hz] at `wavelength`."""
    from scipy.constants import c

    return c / wavelength**2 * bandwidth_lambda


def extract_loss_from_segment_shg(peaks, segment_length):
    """780-nm-band loss [dB/cm] from per-segment SHG peak powers.

    Implements Loss = [10*log10(sum_i(P_i/P_{i+1}) / N)] / L_seg with N the
    number of ratios (len(peaks)-1): the mean dB drop per segment divided
    by the segment length, exact on noiseless exponential decays for any
    loss value and segment count.  Returns dB/cm (reporting convention of
    the estimator; the 1/m loss is ln(10)/10 * 100 * this value).
    """
    peaks = [float(p) for p in peaks]
    if len(peaks) < 2:
        raise DataError("need at least two segment peaks")
    if any(p <= 0 for p in peaks):
        raise DataError(f"segment peaks must be positive, got {peaks}")
    n = len(peaks) - 1
    ratios = sum(peaks[i] / peaks[i + 1] for i in range(n))
    return 10.0 * math.log10(ratios / n) / (segment_length * 100.0)
