"""Two-photon interference bounds and time-bin qubit tomography.

Interference layer: unbalanced interferometer pairs with amplitude
transmission/reflection (T, R), T^2 + R^2 = 1.  Frame-local fringe formulas
give the single- and two-photon visibilities and the worst-case two-photon
visibility compatible with measured single-photon visibilities.

Tomography layer: a time-bin qubit (alpha_e, alpha_l) analyzed by an
unbalanced interferometer produces counts in early / late / late-late bins
for four phase settings, mapped onto six projector counts, Stokes
parameters, and a 2x2 density matrix by linear inversion or constrained
maximum-likelihood estimation.

Analyzer convention (fixed here, used consistently everywhere): one
detected output port of a balanced analyzer,

    p_e  = |alpha_e|^2 / 4
    p_ll = |alpha_l|^2 / 4
    p_l  = |alpha_e e^{-i phase} - alpha_l|^2 / 4

so the projector mapping reads N-=n(0,l), N+=n(pi,l), N_L=n(pi/2,l),
N_R=n(3pi/2,l), N0=n(0,e)+n(pi,e), N1=n(0,ll)+n(pi,ll), and the Stokes
parameters come out with textbook Pauli signs for |+> = (|e>+|l>)/sqrt(2)
and |L> = (|e>+i|l>)/sqrt(2).
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

PHASE_SETTINGS = ("0", "pi/2", "pi", "3pi/2")
_PHASE_VALUES = {"0": 0.0, "pi/2": math.pi / 2, "pi": math.pi,
                 "3pi/2": 3 * math.pi / 2}

PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class EstimationError(RuntimeError):
    """Maximum-likelihood reconstruction failed to converge."""


class NoSignalError(ValueError):
    """Count record carries no population (S0 = 0)."""


@dataclass(frozen=True)
class SplitterPair:
    """Amplitude coefficients of the two splitters of one interferometer."""

    t1: float
    r1: float
    t2: float
    r2: float

    def __post_init__(self):
        for t, r in ((self.t1, self.r1), (self.t2, self.r2)):
            if abs(t * t + r * r - 1.0) > 1e-12:
                raise ValueError(f"T^2 + R^2 = {t*t + r*r} != 1")

    @classmethod
    def from_intensity(cls, t1_sq, t2_sq):
        """Build from intensity splitting ratios (e.g. 0.5 for 50/50)."""
        return cls(math.sqrt(t1_sq), math.sqrt(1.0 - t1_sq),
                   math.sqrt(t2_sq), math.sqrt(1.0 - t2_sq))

    @classmethod
    def balanced(cls):
        return cls.from_intensity(0.5, 0.5)


@dataclass(frozen=True)
class TimeBinQubit:
    """Pure qubit (alpha_e, alpha_l) in the early/late basis, normalized."""

    early: complex
    late: complex

    def __post_init__(self):
        norm = abs(self.early) ** 2 + abs(self.late) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"|alpha_e|^2 + |alpha_l|^2 = {norm} != 1")

    def ket(self):
        return np.array([self.early, self.late], dtype=complex)

    def projector(self):
        k = self.ket()
        return np.outer(k, k.conj())


def basis_states():
    """The six tomography basis states e, l, +, -, L, R."""
    s = 1.0 / math.sqrt(2.0)
    return {
        "e": TimeBinQubit(1.0, 0.0),
        "l": TimeBinQubit(0.0, 1.0),
        "+": TimeBinQubit(s, s),
        "-": TimeBinQubit(s, -s),
        "L": TimeBinQubit(s, 1j * s),
        "R": TimeBinQubit(s, -1j * s),
    }


@dataclass(frozen=True)
class CountRecord:
    """Six projector counts, optionally with the raw per-phase bins.

    Counts are nonnegative reals so noiseless expected-value records can be
    fed through the same pipeline as integer data.
    """

    n0: float
    n1: float
    n_plus: float
    n_minus: float
    n_left: float
    n_right: float
    raw_bins: dict = None

    def __post_init__(self):
        for name in ("n0", "n1", "n_plus", "n_minus", "n_left", "n_right"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class DensityMatrix:
    """2x2 density matrix; Hermitian and unit trace enforced at construction.

    Positivity is not enforced (linear inversion can produce negative
    eigenvalues); check is_physical() where it matters.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("density matrix must be 2x2")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise ValueError("density matrix must be Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-9:
            raise ValueError(f"trace is {np.trace(m).real}, expected 1")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.matrix)

    def is_physical(self, tol=1e-9):
        return bool(self.eigenvalues().min() >= -tol)

    def bloch_vector(self):
        return tuple(float(np.trace(self.matrix @ PAULI[i]).real) for i in (1, 2, 3))


def franson_coincidence(phase_sum, visibility):
    """Central/side Franson coincidence probabilities (relative units).

    p_center = (1 + V cos(phi1 + phi2)) / 2, normalized so the ideal V=1
    in-phase case gives 1; the non-interfering |s>|l> and |l>|s> side peaks
    carry 1/4 each.
    """
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {visibility}")
    p_center = 0.5 * (1.0 + visibility * math.cos(phase_sum))
    return p_center, 0.25


def single_photon_visibility(pair):
    """V = 2 T1 T2 R1 R2 / (T1^2 T2^2 + R1^2 R2^2)."""
    tt = pair.t1 * pair.t2
    rr = pair.r1 * pair.r2
    return 2.0 * tt * rr / (tt * tt + rr * rr)


def two_photon_visibility(idler, signal):
    """Two-photon fringe visibility of an interferometer pair."""
    tt = idler.t1 * idler.t2 * signal.t1 * signal.t2
    rr = idler.r1 * idler.r2 * signal.r1 * signal.r2
    return 2.0 * tt * rr / (tt * tt + rr * rr)


def min_two_photon_visibility(v_idler, v_signal):
    """Worst-case two-photon visibility from single-photon visibilities.

    Returns 1 / (2/(V_i V_s) - 1), the bound consistent with the published
    per-pair numbers; raises if an input visibility is out of range.
    """
    for v in (v_idler, v_signal):
        if not 0.0 < v <= 1.0:
            raise ValueError(f"visibility must lie in (0, 1], got {v}")
    denom = 2.0 / (v_idler * v_signal) - 1.0
    value = 1.0 / denom
    if not 0.0 < value <= 1.0:
        raise ValueError(f"bound {value} outside (0, 1] for "
                         f"V_i={v_idler}, V_s={v_signal}")
    return value


def _splitter_ratios(visibility):
    """Both roots t = (T1 T2)/(R1 R2) of 2t/(t^2+1) = V."""
    root = math.sqrt(max(0.0, 1.0 - visibility * visibility))
    return (1.0 + root) / visibility, (1.0 - root) / visibility


def enumerate_min_two_photon_visibility(v_idler, v_signal):
    """Exact minimization over splitter assignments.

    Each measured single-photon visibility fixes the product ratio
    t = T1T2/R1R2 up to the branch t <-> 1/t; the four branch combinations
    are enumerated through the two-photon formula 2u/(u^2+1), u = t_i t_s,
    and the minimum returned.  Always >= min_two_photon_visibility.
    """
    t_i = _splitter_ratios(v_idler)
    t_s = _splitter_ratios(v_signal)
    values = []
    for ti in t_i:
        for ts in t_s:
            u = ti * ts
            values.append(2.0 * u / (u * u + 1.0))
    return min(values)


def analyzer_bins(qubit, phase, visibility=1.0, phase_error=0.0):
    """(p_e, p_l, p_ll) detection probabilities at one analyzer phase.

    Single output port of a balanced analyzer; `visibility` scales the
    interference term of the central bin and `phase_error` offsets the
    nominal phase, both standing in for hardware imperfections.
    """
    a_e, a_l = complex(qubit.early), complex(qubit.late)
    p_e = 0.25 * abs(a_e) ** 2
    p_ll = 0.25 * abs(a_l) ** 2
    cross = (a_e * a_l.conjugate()
             * cmath.exp(-1j * (phase + phase_error))).real
    p_l = 0.25 * (abs(a_e) ** 2 + abs(a_l) ** 2 - 2.0 * visibility * cross)
    return p_e, p_l, p_ll


def expected_bins(qubit, pairs_per_setting, visibility=1.0, phase_error=0.0):
    """Noiseless expected bin counts for the four phase settings."""
    out = {}
    for label in PHASE_SETTINGS:
        p_e, p_l, p_ll = analyzer_bins(qubit, _PHASE_VALUES[label],
                                       visibility, phase_error)
        out[label] = (pairs_per_setting * p_e, pairs_per_setting * p_l,
                      pairs_per_setting * p_ll)
    return out


def sample_bins(qubit, pairs_per_setting, seed, visibility=1.0, phase_error=0.0):
    """Poisson-sampled bin counts; the seed is explicit, never global."""
    rng = np.random.default_rng(seed)
    out = {}
    for label in PHASE_SETTINGS:
        p_e, p_l, p_ll = analyzer_bins(qubit, _PHASE_VALUES[label],
                                       visibility, phase_error)
        out[label] = tuple(
            int(rng.poisson(pairs_per_setting * p)) for p in (p_e, p_l, p_ll)
        )
    return out


def projector_counts(bins):
    """CountRecord from raw bins {phase label: (n_e, n_l, n_ll)}.

    N0 = n(0,e) + n(pi,e);  N1 = n(0,ll) + n(pi,ll);  N- = n(0,l);
    N+ = n(pi,l);  N_L = n(pi/2,l);  N_R = n(3pi/2,l).
    """
    missing = [p for p in PHASE_SETTINGS if p not in bins]
    if missing:
        raise ValueError(f"missing phase settings {missing}; need {PHASE_SETTINGS}")
    for label, triple in bins.items():
        if len(triple) != 3 or any(v < 0 for v in triple):
            raise ValueError(f"bins for phase {label!r} must be 3 nonnegative counts")
    return CountRecord(
        n0=bins["0"][0] + bins["pi"][0],
        n1=bins["0"][2] + bins["pi"][2],
        n_minus=bins["0"][1],
        n_plus=bins["pi"][1],
        n_left=bins["pi/2"][1],
        n_right=bins["3pi/2"][1],
        raw_bins={k: tuple(v) for k, v in bins.items()},
    )


def stokes(record):
    """(S0, S1, S2, S3) = (N0+N1, N+-N-, N_L-N_R, N0-N1)."""
    s0 = record.n0 + record.n1
    if s0 <= 0:
        raise NoSignalError("S0 = N0 + N1 must be positive")
    return (s0, record.n_plus - record.n_minus,
            record.n_left - record.n_right, record.n0 - record.n1)


def linear_reconstruct(stokes_params):
    """Linear inversion rho = (sigma0 + sum_i (S_i/S0) sigma_i) / 2.

    Hermitian with unit trace by construction; eigenvalues may be negative
    for noisy data (check is_physical before trusting it downstream).
    """
    s0, s1, s2, s3 = stokes_params
    if s0 <= 0:
        raise NoSignalError("S0 must be positive")
    m = 0.5 * (PAULI[0] + s1 / s0 * PAULI[1] + s2 / s0 * PAULI[2]
               + s3 / s0 * PAULI[3])
    return DensityMatrix(m)


def _rho_from_params(t):
    """rho = G^dagger G / tr(G^dagger G), G lower triangular in 4 reals."""
    g = np.array([[t[0], 0.0], [t[2] + 1j * t[3], t[1]]], dtype=complex)
    m = g.conj().T @ g
    return m / np.trace(m).real


def _params_from_rho(rho):
    """Cholesky-style parameters of a (floored) physical density matrix."""
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 1e-6, None)
    rho_pos = (v * w) @ v.conj().T
    rho_pos /= np.trace(rho_pos).real
    chol = np.linalg.cholesky(rho_pos)  # lower triangular L, rho = L L^dag
    g = chol.conj().T                   # rho = G^dag G with G upper... transpose below
    # want rho = G^dag G with G = [[t0,0],[t2+it3,t1]]: G = L^dag works since
    # (L^dag)^dag L^dag = L L^dag = rho, and L^dag is upper triangular; use
    # the mirrored factorization rho = U^dag U instead, U = L^dag.
    return np.array([g[0, 0].real, g[1, 1].real, g[1, 0].real, g[1, 0].imag])


_BASIS_KETS = None


def _measurement_sets(record):
    """(total, count, ket) triples grouped per measurement basis."""
    global _BASIS_KETS
    if _BASIS_KETS is None:
        b = basis_states()
        _BASIS_KETS = {k: b[k].ket() for k in ("e", "l", "+", "-", "L", "R")}
    pairs = (
        (record.n0, record.n1, "e", "l"),
        (record.n_plus, record.n_minus, "+", "-"),
        (record.n_left, record.n_right, "L", "R"),
    )
    sets = []
    for n_a, n_b, key_a, key_b in pairs:
        total = n_a + n_b
        if total > 0:
            sets.append((total, n_a, _BASIS_KETS[key_a]))
            sets.append((total, n_b, _BASIS_KETS[key_b]))
    return sets


def mle_reconstruct(record, gradient_tol=1e-8, max_iterations=100_000):
    """Physical density matrix by constrained maximum likelihood.

    rho is parameterized as G^dag G / tr(G^dag G) over four reals (so it is
    positive and unit trace by construction) and the Gaussian approximation
    of the Poisson log-likelihood of the six projector counts is minimized
    with BFGS from the eigenvalue-clipped linear inversion; converged when
    the (count-normalized) gradient norm drops below `gradient_tol`.
    """
    sets = _measurement_sets(record)
    if not sets:
        raise NoSignalError("record carries no counts")
    scale = sum(s[0] for s in sets) / 2.0

    def objective_and_grad(t):
        g = np.array([[t[0], 0.0], [t[2] + 1j * t[3], t[1]]], dtype=complex)
        norm = float(t[0] ** 2 + t[1] ** 2 + t[2] ** 2 + t[3] ** 2)
        if norm < 1e-300:
            return 1e300, np.zeros(4)
        d_g = (
            np.array([[1, 0], [0, 0]], dtype=complex),
            np.array([[0, 0], [0, 1]], dtype=complex),
            np.array([[0, 0], [1, 0]], dtype=complex),
            np.array([[0, 0], [1j, 0]], dtype=complex),
        )
        f = 0.0
        grad = np.zeros(4)
        for total, count, ket in sets:
            gk = g @ ket
            quad = float(np.vdot(gk, gk).real)      # <psi|G^dag G|psi>
            mu = total * quad / norm
            mu_safe = max(mu, 1e-12 * scale)
            f += (mu - count) ** 2 / (2.0 * mu_safe) / scale
            dfdmu = (mu_safe**2 - count**2) / (2.0 * mu_safe**2) / scale
            for i in range(4):
                d_quad = 2.0 * float(np.vdot(gk, d_g[i] @ ket).real)
                d_mu = total * (d_quad * norm - quad * 2.0 * t[i]) / norm**2
                grad[i] += dfdmu * d_mu
        return f, grad

    x0 = _params_from_rho(linear_reconstruct(stokes(record)).matrix)
    res = minimize(objective_and_grad, x0, jac=True, method="BFGS",
                   options={"gtol": gradient_tol, "maxiter": max_iterations})
    grad_norm = float(np.linalg.norm(res.jac))
    if grad_norm > 1e-6:
        raise EstimationError(
            f"MLE did not converge: gradient norm {grad_norm:.3e} after "
            f"{res.nit} iterations ({res.message})"
        )
    rho = _rho_from_params(res.x)
    # numerical cleanup: exact Hermiticity for the dataclass invariant
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.trace(rho).real)


def fidelity(qubit, rho):
    """F = <psi| rho |psi>, real in [0, 1]."""
    ket = qubit.ket()
    value = float(np.real(ket.conj() @ (np.asarray(rho.matrix) @ ket)))
    return min(max(value, 0.0), 1.0)


def trace_distance(rho_a, rho_b):
    """T(a, b) = ||a - b||_1 / 2."""
    diff = np.asarray(rho_a.matrix) - np.asarray(rho_b.matrix)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
