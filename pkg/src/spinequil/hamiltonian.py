"""Spin-1/2 XYZ chain with next-nearest-neighbour zz coupling.

Basis convention: a basis index ``b`` in ``[0, 2**n)`` encodes site ``i``
(1-based) in bit ``i - 1``; a cleared bit is spin up, a set bit is spin down.
All operators are built in this z-product basis.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, EigensolverError, ResourceLimitError

__all__ = [
    "DEFAULT_DIM_CAP",
    "HamiltonianSpec",
    "DEFAULT_PARAMS",
    "Spectrum",
    "GapReport",
    "check_dimension",
    "basis_bits",
    "build_hamiltonian",
    "diagonalize",
    "scan_degenerate_gaps",
]

DEFAULT_DIM_CAP = 2 ** 14


@dataclass(frozen=True)
class HamiltonianSpec:
    """Chain length and couplings.

    ``J`` and ``hz`` carry units of inverse time; ``Jy`` and ``Jz`` are
    dimensionless multipliers of the y and z nearest-neighbour couplings.
    """

    n: int
    J: float = 1.0
    Jy: float = 1.4
    Jz: float = 0.5
    hz: float = 0.01

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        for name in ("Jy", "Jz", "hz"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise DomainError(f"{name} must be finite and >= 0, got {value!r}")
        if not np.isfinite(self.J):
            raise DomainError(f"J must be finite, got {self.J!r}")

    @property
    def dim(self):
        return 2 ** self.n

    def with_n(self, n):
        return HamiltonianSpec(n, self.J, self.Jy, self.Jz, self.hz)


DEFAULT_PARAMS = dict(J=1.0, Jy=1.4, Jz=0.5, hz=0.01)


def check_dimension(n, dim_cap=DEFAULT_DIM_CAP):
    dim = 2 ** n
    if dim > dim_cap:
        raise ResourceLimitError(dim, dim_cap)
    return dim


def basis_bits(n):
    """Return a ``(2**n, n)`` array of 0/1 occupation of the down state per site."""
    idx = np.arange(2 ** n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(np.int8)


def build_hamiltonian(spec, dim_cap=DEFAULT_DIM_CAP):
    """Assemble the dense Hamiltonian for ``spec`` with open boundaries.

    H = sum_i J (Sx_i Sx_{i+1} + Jy Sy_i Sy_{i+1} + Jz Sz_i Sz_{i+1}
                 + Sz_i Sz_{i+2} + hz Sz_i),  S = sigma / 2.

    Bond terms that would reach past site ``n`` are dropped. The result is a
    real symmetric ``float64`` array.
    """
    n = spec.n
    dim = check_dimension(n, dim_cap)
    idx = np.arange(dim, dtype=np.int64)
    z = 1.0 - 2.0 * basis_bits(n)

    diag = np.zeros(dim)
    rows, cols, vals = [idx], [idx], [diag]
    for i in range(n - 1):
        diag += spec.Jz * z[:, i] * z[:, i + 1] / 4.0
        # sx sx flips the pair with amplitude 1; sy sy gives -1 on aligned
        # pairs and +1 on anti-aligned pairs.
        aligned = z[:, i] == z[:, i + 1]
        amp = spec.J * (1.0 + np.where(aligned, -spec.Jy, spec.Jy)) / 4.0
        rows.append(idx ^ (0b11 << i))
        cols.append(idx)
        vals.append(amp)
    for i in range(n - 2):
        diag += z[:, i] * z[:, i + 2] / 4.0
    diag += spec.hz * z.sum(axis=1) / 2.0
    diag *= spec.J

    coo = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    )
    return coo.toarray()


@dataclass(frozen=True)
class Spectrum:
    """Ascending energies with paired orthonormal eigenvectors (columns)."""

    energies: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        self.energies.setflags(write=False)
        self.vectors.setflags(write=False)

    @property
    def dim(self):
        return self.energies.shape[0]


def _fix_signs(vectors):
    # Largest-magnitude component of each column made real and positive.
    pivot = np.argmax(np.abs(vectors), axis=0)
    ref = vectors[pivot, np.arange(vectors.shape[1])]
    phase = np.abs(ref) / ref
    return vectors * phase[None, :]


def diagonalize(H, check=True):
    """Full dense diagonalization of a Hermitian matrix.

    Eigenvector phases are fixed so that the largest-magnitude entry of each
    vector is real and positive, which makes the output reproducible.

    Parameters
    ----------
    H : (D, D) ndarray
        Hermitian matrix.
    check : bool
        Verify orthonormality and the eigen-residual; raise
        :class:`EigensolverError` if either exceeds its tolerance.
    """
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {H.shape}")
    if not np.allclose(H, H.conj().T, atol=1e-12, rtol=0):
        raise DomainError("matrix is not Hermitian")
    try:
        energies, vectors = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigh did not converge: {exc}") from exc
    vectors = _fix_signs(vectors)

    if check:
        dim = H.shape[0]
        scale = max(np.max(np.abs(H)), 1.0)
        residual = np.max(np.abs(H @ vectors - vectors * energies[None, :]))
        if residual >= 1e-8 * scale * dim:
            raise EigensolverError("eigen-residual above tolerance", residual)
        ortho = np.max(np.abs(vectors.conj().T @ vectors - np.eye(dim)))
        if ortho >= 1e-10:
            raise EigensolverError("eigenvectors not orthonormal", ortho)

    return Spectrum(np.ascontiguousarray(energies), np.ascontiguousarray(vectors))


@dataclass(frozen=True)
class GapReport:
    degenerate_energies: int
    degenerate_gaps: int
    distinct_levels: int
    tol: float


def scan_degenerate_gaps(energies, tol, max_dim=2 ** 12):
    """Count level degeneracies and coinciding energy gaps.

    Levels closer than ``tol`` are first merged into distinct levels; the
    number of merged eigenvalue pairs is ``degenerate_energies``. Gaps are then
    taken between distinct levels only, so coincidences that follow trivially
    from a level degeneracy or from two zero gaps are not counted.
    ``degenerate_gaps`` is the number of unordered pairs of distinct positive
    gaps that differ by less than ``tol``.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    energies = np.sort(np.asarray(getattr(energies, "energies", energies), dtype=float))
    if energies.size > max_dim:
        raise ResourceLimitError(energies.size, max_dim)

    # Cluster consecutive levels separated by less than tol.
    breaks = np.flatnonzero(np.diff(energies) >= tol) + 1
    clusters = np.split(energies, breaks)
    degenerate_energies = sum(c.size * (c.size - 1) // 2 for c in clusters)
    levels = np.array([c.mean() for c in clusters])

    iu, ju = np.triu_indices(levels.size, k=1)
    gaps = np.sort(levels[ju] - levels[iu])
    upper = np.searchsorted(gaps, gaps + tol, side="left")
    collisions = int(np.sum(upper - np.arange(gaps.size) - 1))
    return GapReport(int(degenerate_energies), collisions, int(levels.size), tol)
