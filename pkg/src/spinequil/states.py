"""Coarse-grained k-flipped initial states.

Case A superposes every product state with exactly ``k`` down spins (a Dicke
state); case B superposes every product state with at most ``k`` down spins.
Both are uniform, all-positive superpositions in the z basis, optionally
rotated so that the quantization axis points along ``(theta, phi)``.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .hamiltonian import DEFAULT_DIM_CAP, check_dimension

__all__ = [
    "Case",
    "Direction",
    "CoarseGrainedSpec",
    "support_indices",
    "build_z_basis_state",
    "single_spin_rotation",
    "rotate_to_direction",
    "build_initial_state",
]


class Case(str, enum.Enum):
    A = "a"  # exactly k flips
    B = "b"  # at most k flips

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown case {value!r}; expected 'a' or 'b'") from None


@dataclass(frozen=True)
class Direction:
    """Quantization axis (polar ``theta``, azimuth ``phi``, radians)."""

    theta: float = 0.0
    phi: float = 0.0
    name: str = ""

    @classmethod
    def z(cls):
        return cls(0.0, 0.0, "z")

    @classmethod
    def x(cls):
        return cls(math.pi / 2, 0.0, "x")

    @classmethod
    def y(cls):
        return cls(math.pi / 2, math.pi / 2, "y")

    @classmethod
    def from_degrees(cls, theta_deg, phi_deg):
        name = f"t{_fmt_angle(theta_deg)}p{_fmt_angle(phi_deg)}"
        return cls(math.radians(theta_deg), math.radians(phi_deg), name)

    @classmethod
    def parse(cls, text):
        """Parse ``z``, ``x``, ``y`` or ``angles:<theta_deg>,<phi_deg>``."""
        if isinstance(text, Direction):
            return text
        text = str(text).strip().lower()
        named = {"z": cls.z, "x": cls.x, "y": cls.y}
        if text in named:
            return named[text]()
        if text.startswith("angles:"):
            parts = text[len("angles:"):].split(",")
            if len(parts) == 2:
                try:
                    theta, phi = float(parts[0]), float(parts[1])
                except ValueError:
                    pass
                else:
                    if math.isfinite(theta) and math.isfinite(phi):
                        return cls.from_degrees(theta, phi)
        raise DomainError(f"cannot parse direction {text!r}")

    @property
    def label(self):
        if self.name:
            return self.name
        return f"t{_fmt_angle(math.degrees(self.theta))}p{_fmt_angle(math.degrees(self.phi))}"

    @property
    def unit_vector(self):
        st = math.sin(self.theta)
        v = np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])
        # exact zeros on the named axes (cos(pi/2) is 6e-17 in floating point)
        v[np.abs(v) < 1e-15] = 0.0
        return v


def _fmt_angle(deg):
    deg = float(deg)
    return str(int(deg)) if deg.is_integer() else repr(deg)


@dataclass(frozen=True)
class CoarseGrainedSpec:
    n: int
    k: int
    case: Case = Case.A
    direction: Direction = Direction(0.0, 0.0, "z")

    def __post_init__(self):
        object.__setattr__(self, "case", Case.parse(self.case))
        object.__setattr__(self, "direction", Direction.parse(self.direction))
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if int(self.k) != self.k or not 0 <= self.k <= self.n:
            raise DomainError(f"k must satisfy 0 <= k <= n={self.n}, got {self.k!r}")

    @property
    def support_size(self):
        if self.case is Case.A:
            return math.comb(self.n, self.k)
        return sum(math.comb(self.n, j) for j in range(self.k + 1))


def support_indices(n, k, case):
    """Basis indices with exactly (case A) or at most (case B) ``k`` set bits."""
    case = Case.parse(case)
    if not 0 <= k <= n:
        raise DomainError(f"k must satisfy 0 <= k <= n={n}, got {k}")
    idx = np.arange(2 ** n, dtype=np.int64)
    flips = np.zeros(idx.shape, dtype=np.int64)
    for b in range(n):
        flips += (idx >> b) & 1
    mask = flips == k if case is Case.A else flips <= k
    return idx[mask]


def build_z_basis_state(n, k, case, dim_cap=DEFAULT_DIM_CAP):
    """Uniform superposition of the k-flipped z-basis product states."""
    check_dimension(n, dim_cap)
    support = support_indices(n, k, case)
    psi = np.zeros(2 ** n)
    psi[support] = 1.0 / math.sqrt(support.size)
    return psi


def single_spin_rotation(theta, phi):
    """SU(2) matrix taking z-up to the +1 eigenstate of n.sigma.

    Columns are the images of up and down:
    up -> cos(theta/2) up + e^{i phi} sin(theta/2) down,
    down -> -e^{-i phi} sin(theta/2) up + cos(theta/2) down.
    """
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [[c, -np.exp(-1j * phi) * s], [np.exp(1j * phi) * s, c]],
        dtype=complex,
    )


def rotate_to_direction(state, n, theta, phi):
    """Apply the same single-spin rotation to every site of ``state``."""
    state = np.asarray(state)
    if state.shape != (2 ** n,):
        raise DomainError(f"state has shape {state.shape}, expected ({2 ** n},)")
    if theta == 0.0:
        return state.copy()
    U = single_spin_rotation(theta, phi)
    # C-order reshape puts the highest bit (site n) on axis 0; every axis gets
    # the same U so the site order does not matter.
    psi = state.astype(complex).reshape((2,) * n)
    for axis in range(n):
        psi = np.moveaxis(np.tensordot(U, psi, axes=([1], [axis])), 0, axis)
    psi = psi.reshape(-1)
    return psi / np.linalg.norm(psi)


def build_initial_state(spec, dim_cap=DEFAULT_DIM_CAP):
    """k-flipped state for ``spec`` along its quantization direction."""
    psi = build_z_basis_state(spec.n, spec.k, spec.case, dim_cap=dim_cap)
    return rotate_to_direction(psi, spec.n, spec.direction.theta, spec.direction.phi)
