"""Total magnetization observable and energy-basis transforms."""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .hamiltonian import DEFAULT_DIM_CAP, basis_bits, check_dimension
from .states import Direction

__all__ = [
    "Observable",
    "build_magnetization",
    "to_energy_basis",
    "expand_in_energy_basis",
]


@dataclass(frozen=True)
class Observable:
    """Hermitian matrix tagged with the basis it is written in."""

    matrix: np.ndarray
    basis: str = "product"

    def __post_init__(self):
        if self.basis not in ("product", "energy"):
            raise DomainError(f"unknown basis tag {self.basis!r}")
        self.matrix.setflags(write=False)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def norm(self):
        """Operator (spectral) norm."""
        m = self.matrix
        if np.count_nonzero(m) == np.count_nonzero(np.diagonal(m)):
            return float(np.max(np.abs(np.diagonal(m))))
        return float(np.linalg.norm(m, 2))


def build_magnetization(n, direction=None, dim_cap=DEFAULT_DIM_CAP):
    """Total Pauli magnetization ``sum_i n.sigma_i`` along ``direction``.

    Uses Pauli matrices, so each site contributes eigenvalues +1/-1 and the
    z-component is ``n - 2 * popcount(b)`` on basis state ``b``.
    """
    direction = Direction.z() if direction is None else Direction.parse(direction)
    dim = check_dimension(n, dim_cap)
    nx, ny, nz = direction.unit_vector
    bits = basis_bits(n)
    diag = nz * (n - 2.0 * bits.sum(axis=1))
    if direction.theta == 0.0:
        return Observable(np.diag(diag))

    M = np.diag(diag).astype(complex)
    idx = np.arange(dim, dtype=np.int64)
    for i in range(n):
        # <flip_i b| (nx sx + ny sy) |b>: sy takes up -> i down, down -> -i up.
        amp = nx + ny * np.where(bits[:, i] == 0, 1j, -1j)
        M[idx ^ (1 << i), idx] += amp
    if np.max(np.abs(M.imag)) == 0.0:
        M = M.real.copy()
    return Observable(M)


def to_energy_basis(M, spectrum):
    """Matrix elements ``<E_i|M|E_j>`` in the energy eigenbasis."""
    if M.basis != "product":
        raise DomainError("observable is already in the energy basis")
    if M.dim != spectrum.dim:
        raise DomainError(f"dimension mismatch: observable {M.dim}, spectrum {spectrum.dim}")
    V = spectrum.vectors
    m = M.matrix
    if np.count_nonzero(m) == np.count_nonzero(np.diagonal(m)):
        out = V.conj().T @ (np.diagonal(m)[:, None] * V)
    else:
        out = V.conj().T @ (m @ V)
    out = 0.5 * (out + out.conj().T)
    return Observable(out, basis="energy")


def expand_in_energy_basis(state, spectrum):
    """Coefficients ``c_k = <E_k|psi>`` ordered like ``spectrum.energies``."""
    state = np.asarray(state)
    if state.shape != (spectrum.dim,):
        raise DomainError(f"state has shape {state.shape}, expected ({spectrum.dim},)")
    return spectrum.vectors.conj().T @ state
