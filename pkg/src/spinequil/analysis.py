"""Equilibration diagnostics for a state expanded in the energy eigenbasis.

Everything here works on the energy coefficients ``c_k``, a
:class:`~spinequil.hamiltonian.Spectrum` and (where needed) the observable
already transformed to the energy basis. Pairwise quantities over energy gaps
are evaluated as dense matrix-vector contractions; the ``D**2`` list of pairs
is never built.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InsufficientDataError, NeverCrossedError, NoDynamicsError
from .hamiltonian import DEFAULT_DIM_CAP, check_dimension
from .observables import expand_in_energy_basis
from .states import build_initial_state

__all__ = [
    "LdosHistogram",
    "DosHistogram",
    "FluctuationSignal",
    "GapWeights",
    "BoundReport",
    "PowerLawFit",
    "EquilibrationReport",
    "effective_dimension",
    "ldos",
    "dos_histogram",
    "diagonal_average",
    "evolve_state",
    "time_signal",
    "gap_weights",
    "equilibration_time",
    "first_decay_time",
    "check_fluctuation_bound",
    "fit_power_law",
    "count_degenerate_levels",
    "analyze_state",
]

BIN_WIDTH = 2.0


def _matrix(M):
    return np.asarray(getattr(M, "matrix", M))


def _check_normalized(c, tol=1e-9):
    norm2 = float(np.sum(np.abs(c) ** 2))
    if abs(norm2 - 1.0) > tol:
        raise DomainError(f"coefficients not normalized: sum |c|^2 = {norm2!r}")
    return norm2


def effective_dimension(c, energies=None, degeneracy_tol=1e-9):
    """Participation ratio ``1 / sum_k |c_k|**4``.

    If ``energies`` is given, weights of eigenvalues closer than
    ``degeneracy_tol`` are pooled first, i.e. the projector onto each
    degenerate eigenspace is used. This makes the result independent of the
    basis chosen inside degenerate blocks.
    """
    c = np.asarray(c)
    _check_normalized(c)
    p = np.abs(c) ** 2
    if energies is not None:
        energies = np.asarray(energies)
        order = np.argsort(energies, kind="stable")
        breaks = np.flatnonzero(np.diff(energies[order]) >= degeneracy_tol) + 1
        p = np.add.reduceat(p[order], np.concatenate(([0], breaks)))
    return float(1.0 / np.sum(p ** 2))


def _bin_edges(values, anchor, width):
    lo = math.floor((float(np.min(values)) - anchor) / width)
    hi = math.floor((float(np.max(values)) - anchor) / width)
    edges = anchor + width * np.arange(lo, hi + 2, dtype=float)
    bins = np.floor((values - anchor) / width).astype(np.int64) - lo
    return edges, bins


@dataclass(frozen=True)
class LdosHistogram:
    bin_edges: np.ndarray
    weights: np.ndarray
    mean: float
    std: float


@dataclass(frozen=True)
class DosHistogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    mean: float
    std: float
    skewness: float


def ldos(c, spectrum, anchor=0.0, width=BIN_WIDTH):
    """Local density of states binned into intervals of ``width``.

    Bin edges sit at ``anchor + width * j``. Also returns the weighted mean
    and standard deviation of the energy distribution ``|c_k|**2``.
    """
    c = np.asarray(c)
    _check_normalized(c)
    E = spectrum.energies
    p = np.abs(c) ** 2
    edges, bins = _bin_edges(E, anchor, width)
    weights = np.bincount(bins, weights=p, minlength=edges.size - 1)
    mean = float(p @ E)
    var = float(p @ (E - mean) ** 2)
    return LdosHistogram(edges, weights, mean, math.sqrt(max(var, 0.0)))


def dos_histogram(spectrum, anchor=0.0, width=BIN_WIDTH):
    """Eigenvalue counts per bin plus the unweighted spectral moments."""
    E = spectrum.energies
    edges, bins = _bin_edges(E, anchor, width)
    counts = np.bincount(bins, minlength=edges.size - 1)
    mean = float(np.mean(E))
    dev = E - mean
    std = float(np.sqrt(np.mean(dev ** 2)))
    skewness = float(np.mean(dev ** 3) / std ** 3) if std > 0 else 0.0
    return DosHistogram(edges, counts, mean, std, skewness)


def diagonal_average(c, M_energy):
    """Diagonal-ensemble value ``sum_k |c_k|**2 M_kk``."""
    p = np.abs(np.asarray(c)) ** 2
    return float(p @ np.real(np.diagonal(_matrix(M_energy))))


def evolve_state(c, spectrum, t):
    """Product-basis state at time ``t``: ``sum_k c_k e^{-i E_k t} |E_k>``."""
    c = np.asarray(c)
    return spectrum.vectors @ (c * np.exp(-1j * spectrum.energies * t))


@dataclass(frozen=True)
class FluctuationSignal:
    """Relative fluctuation ``g(t) = (M(t) - Mbar) / delta_m`` on a time grid."""

    times: np.ndarray
    values: np.ndarray
    delta_m: float
    mean_value: float = float("nan")

    @property
    def abs2(self):
        return np.abs(self.values) ** 2

    @property
    def time_average_abs2(self):
        return float(np.mean(self.abs2))


def time_signal(c, M_energy, spectrum, times, delta_m=None, dim_cap=DEFAULT_DIM_CAP):
    """Evaluate the relative fluctuation of ``M`` on the grid ``times``.

    ``M(t) = a(t)^dagger M a(t)`` with ``a_k(t) = c_k e^{-i E_k t}``; the
    infinite-time average is the diagonal-ensemble value. ``delta_m`` is the
    spread between the largest and smallest eigenvalue of the observable and
    defaults to ``2 n``, the value for the total Pauli z magnetization.
    """
    c = np.asarray(c)
    E = spectrum.energies
    D = E.shape[0]
    check_dimension(int(round(math.log2(D))), dim_cap)
    M = _matrix(M_energy)
    if M.shape != (D, D) or c.shape != (D,):
        raise DomainError("dimension mismatch between coefficients, observable and spectrum")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or not np.all(np.isfinite(times)) or np.any(np.diff(times) < 0):
        raise DomainError("times must be a finite ascending 1-d array")
    if delta_m is None:
        delta_m = 2.0 * math.log2(D)

    mbar = diagonal_average(c, M)
    real_m = not np.iscomplexobj(M)
    chunk = max(1, 2 ** 22 // D)
    out = np.empty(times.size, dtype=complex)
    for start in range(0, times.size, chunk):
        t = times[start:start + chunk]
        a = c[:, None] * np.exp(-1j * np.outer(E, t))
        if real_m:
            # two real products avoid promoting M to complex; contiguous
            # operands keep matmul on the BLAS path
            Ma = M @ np.ascontiguousarray(a.real) + 1j * (M @ np.ascontiguousarray(a.imag))
        else:
            Ma = M @ a
        out[start:start + chunk] = np.sum(a.conj() * Ma, axis=0)
    values = (out - mbar) / delta_m
    return FluctuationSignal(times, values, float(delta_m), mbar)


@dataclass(frozen=True)
class GapWeights:
    """Explicit gap list ``G_(i,j) = E_j - E_i`` with normalized weights ``q``."""

    pairs: np.ndarray
    gaps: np.ndarray
    nu: np.ndarray
    q: np.ndarray


def gap_weights(c, M_energy, spectrum, max_dim=2 ** 10):
    """Materialize every ordered pair ``i != j`` with its gap and weight.

    Diagnostic helper for small systems; :func:`equilibration_time` does not
    use it.
    """
    c = np.asarray(c)
    E = spectrum.energies
    D = E.shape[0]
    if D > max_dim:
        raise DomainError(f"gap list for D={D} exceeds max_dim={max_dim}")
    M = _matrix(M_energy)
    i, j = np.nonzero(~np.eye(D, dtype=bool))
    nu = c[j].conj() * M[j, i] * c[i] / 2.0
    w = np.abs(nu) ** 2
    total = w.sum()
    if total == 0:
        raise NoDynamicsError("all gap weights vanish")
    return GapWeights(np.stack([i, j], axis=1), E[j] - E[i], nu, w / total)


def equilibration_time(c, M_energy, spectrum):
    """Dephasing estimate ``pi / sqrt(sum_a q_a G_a**2)``.

    ``q_a`` is proportional to ``|c_i|^2 |c_j|^2 |M_ij|^2`` over pairs
    ``i != j``; constant prefactors cancel in the normalization.
    """
    c = np.asarray(c)
    E = spectrum.energies
    M = _matrix(M_energy)
    p = np.abs(c) ** 2
    W = np.abs(M) ** 2
    np.fill_diagonal(W, 0.0)
    scale = max(1.0, float(np.max(W)))

    Wp = W @ p
    den = float(p @ Wp)
    if den <= 1e-24 * scale:
        raise NoDynamicsError("state has no off-diagonal weight on the observable")
    # Gaps are shift invariant; centring the energies limits cancellation.
    Ec = E - float(p @ E)
    pE = p * Ec
    num = 2.0 * (float((pE * Ec) @ Wp) - float(pE @ (W @ pE)))
    if num <= 0:
        raise NoDynamicsError("gap dispersion vanished")
    return math.pi / math.sqrt(num / den)


def first_decay_time(signal, threshold_fraction):
    """Earliest time with ``|g|^2 <= threshold_fraction * |g(t0)|^2``.

    Linear interpolation between the two samples bracketing the crossing.
    """
    if not 0 < threshold_fraction < 1:
        raise DomainError("threshold_fraction must lie in (0, 1)")
    y = signal.abs2
    t = signal.times
    if y.size == 0 or y[0] == 0:
        raise DomainError("signal starts at zero; no decay to measure")
    target = threshold_fraction * y[0]
    below = np.flatnonzero(y[1:] <= target)
    if below.size == 0:
        raise NeverCrossedError(
            f"|g|^2 never fell below {threshold_fraction} of its initial value "
            f"in [{t[0]}, {t[-1]}]"
        )
    i = int(below[0]) + 1
    y0, y1 = y[i - 1], y[i]
    if y1 == y0:
        return float(t[i])
    return float(t[i - 1] + (target - y0) / (y1 - y0) * (t[i] - t[i - 1]))


@dataclass(frozen=True)
class BoundReport:
    lhs: float
    bound_literal: float
    bound_squared: float

    @property
    def violated(self):
        return self.lhs > self.bound_squared


def check_fluctuation_bound(signal, d_eff, norm_M):
    """Compare the sampled mean of ``(M(t) - Mbar)**2`` with the d_eff bound.

    Reports both ``||M|| / d_eff`` and ``||M||**2 / d_eff``; only the squared
    form is a valid bound, and ``violated`` refers to it.
    """
    lhs = signal.time_average_abs2 * signal.delta_m ** 2
    return BoundReport(float(lhs), norm_M / d_eff, norm_M ** 2 / d_eff)


@dataclass(frozen=True)
class PowerLawFit:
    a: float
    b: float
    residual: float
    point_count: int


def fit_power_law(points):
    """Least-squares fit of ``b * D**a`` on log-log axes."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DomainError("points must be a sequence of (D, d_eff) pairs")
    if pts.shape[0] < 3:
        raise InsufficientDataError(f"need at least 3 points, got {pts.shape[0]}")
    if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
        raise DomainError("power-law fit needs finite positive values")
    x, y = np.log(pts[:, 0]), np.log(pts[:, 1])
    A = np.column_stack([x, np.ones_like(x)])
    (a, logb), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (a * x + logb)
    return PowerLawFit(float(a), float(math.exp(logb)), float(np.sqrt(np.mean(resid ** 2))), len(pts))


def count_degenerate_levels(spectrum, tol=1e-10):
    return int(np.count_nonzero(np.diff(spectrum.energies) < tol))


@dataclass(frozen=True)
class EquilibrationReport:
    n: int
    k: int
    case: str
    direction: str
    d_eff: float
    ldos_mean: float
    ldos_std: float
    T_eq: float
    first_decay_time: float
    time_average_abs2: float
    bound: BoundReport = None
    degenerate_levels: int = 0
    extras: dict = field(default_factory=dict)


def analyze_state(spec, spectrum, M_energy, times, threshold_fraction=0.1,
                  bound_times=None, norm_M=None, dim_cap=DEFAULT_DIM_CAP):
    """Run every diagnostic for one coarse-grained initial state."""
    psi = build_initial_state(spec, dim_cap=dim_cap)
    c = expand_in_energy_basis(psi, spectrum)
    d_eff = effective_dimension(c)
    hist = ldos(c, spectrum)
    t_eq = equilibration_time(c, M_energy, spectrum)
    signal = time_signal(c, M_energy, spectrum, times, dim_cap=dim_cap)
    t_decay = first_decay_time(signal, threshold_fraction)
    bound = None
    if bound_times is not None:
        norm = float(spec.n) if norm_M is None else norm_M
        long_signal = time_signal(c, M_energy, spectrum, bound_times, dim_cap=dim_cap)
        bound = check_fluctuation_bound(long_signal, d_eff, norm)
    return EquilibrationReport(
        n=spec.n,
        k=spec.k,
        case=spec.case.value,
        direction=spec.direction.label,
        d_eff=d_eff,
        ldos_mean=hist.mean,
        ldos_std=hist.std,
        T_eq=t_eq,
        first_decay_time=t_decay,
        time_average_abs2=signal.time_average_abs2,
        bound=bound,
        degenerate_levels=count_degenerate_levels(spectrum),
    )
