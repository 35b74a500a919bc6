"""On-disk cache of diagonalized Hamiltonians.

Entries are ``.npz`` files named by a SHA-256 of the model parameters and the
cache format version; bumping :data:`CACHE_VERSION` orphans every old entry.
"""

import hashlib
import json
import logging
import os
from pathlib import Path

import numpy as np

from .hamiltonian import DEFAULT_DIM_CAP, Spectrum, build_hamiltonian, diagonalize

logger = logging.getLogger(__name__)

CACHE_VERSION = 1
CACHE_ENV = "SPINEQUIL_CACHE_DIR"


def cache_key(spec):
    payload = json.dumps(
        {"v": CACHE_VERSION, "n": spec.n, "J": spec.J, "Jy": spec.Jy, "Jz": spec.Jz, "hz": spec.hz},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:32]


class SpectrumCache:
    """Memoize spectra in memory and, if a directory is configured, on disk.

    Parameters
    ----------
    directory : path-like or None
        Cache directory. ``None`` reads ``$SPINEQUIL_CACHE_DIR``; if that is
        unset too, only the in-memory layer is used.
    """

    def __init__(self, directory=None, dim_cap=DEFAULT_DIM_CAP):
        if directory is None:
            directory = os.environ.get(CACHE_ENV) or None
        self.directory = Path(directory) if directory is not None else None
        self.dim_cap = dim_cap
        self._memory = {}

    def _path(self, key):
        return self.directory / f"spectrum-v{CACHE_VERSION}-{key}.npz"

    def get(self, spec):
        key = cache_key(spec)
        if key in self._memory:
            return self._memory[key]
        spectrum = self._load(key) if self.directory is not None else None
        if spectrum is None:
            H = build_hamiltonian(spec, dim_cap=self.dim_cap)
            spectrum = diagonalize(H)
            if self.directory is not None:
                self._store(key, spectrum)
        self._memory[key] = spectrum
        return spectrum

    def _load(self, key):
        path = self._path(key)
        if not path.exists():
            return None
        try:
            with np.load(path) as data:
                if int(data["version"]) != CACHE_VERSION:
                    return None
                return Spectrum(data["energies"].copy(), data["vectors"].copy())
        except (OSError, KeyError, ValueError) as exc:
            logger.warning("ignoring unreadable cache entry %s: %s", path, exc)
            return None

    def _store(self, key, spectrum):
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self._path(key)
        tmp = path.with_suffix(".tmp.npz")
        np.savez(tmp, version=CACHE_VERSION, energies=spectrum.energies, vectors=spectrum.vectors)
        os.replace(tmp, path)
