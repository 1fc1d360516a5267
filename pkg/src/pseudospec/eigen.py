"""Dense non-Hermitian eigenvalues and the real/complex split of a spectrum."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from . import _kernels
from .errors import NoConvergence, NonFinite

MATRIX_IM_THRESHOLD = 1e-6
PHYSICS_IM_THRESHOLD = 1e-2


def _checked(A) -> np.ndarray:
    a = np.asarray(A)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise NonFinite("matrix has non-finite entries")
    return np.array(a, dtype=np.complex128, order="C", copy=True)


def eigenvalues(A, max_iter: int = _kernels.ITERS_PER_EIGENVALUE) -> np.ndarray:
    """All eigenvalues of a dense complex matrix, sorted by (real, imag).

    Balancing, unitary Hessenberg reduction, then single-shift QR with
    deflation.  Raises NoConvergence if an eigenvalue needs more than
    ``max_iter`` sweeps.
    """
    a = _checked(A)
    if a.shape[0] == 0:
        return np.zeros(0, dtype=np.complex128)
    _kernels.balance(a)
    _kernels.hessenberg(a)
    w, lo, hi = _kernels.hqr(a, max_iter)
    if lo >= 0:
        raise NoConvergence(
            f"QR iteration stalled on block [{lo}, {hi}] after {max_iter} sweeps", (lo, hi))
    return w[np.lexsort((w.imag, w.real))]


def eigenvector(A, eigenvalue: complex, iterations: int = 3) -> np.ndarray:
    """Unit eigenvector for a converged eigenvalue, by inverse iteration."""
    a = _checked(A)
    n = a.shape[0]
    scale = max(np.abs(a).max(), 1.0)
    shift = complex(eigenvalue) + 1e3 * np.finfo(float).eps * scale
    lu = lu_factor(a - shift * np.eye(n), check_finite=False)
    v = np.ones(n, dtype=np.complex128) / math.sqrt(n)
    for _ in range(iterations):
        v = lu_solve(lu, v, check_finite=False)
        v /= np.linalg.norm(v)
    return v


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    real_subset: np.ndarray
    complex_subset: np.ndarray
    above_ceiling: np.ndarray
    im_threshold: float
    energy_ceiling: float
    metadata: dict = field(default_factory=dict)

    @property
    def max_abs_imag_real_subset(self) -> float:
        return float(np.abs(self.real_subset.imag).max()) if self.real_subset.size else 0.0

    def to_dict(self) -> dict:
        pairs = lambda z: [[float(v.real), float(v.imag)] for v in z]  # noqa: E731
        return {
            "eigenvalues": pairs(self.eigenvalues),
            "real": pairs(self.real_subset),
            "complex": pairs(self.complex_subset),
            "above_ceiling_count": int(self.above_ceiling.size),
            "im_threshold": self.im_threshold,
            "energy_ceiling": self.energy_ceiling if math.isfinite(self.energy_ceiling) else None,
            "metadata": self.metadata,
        }


def spectrum_report(
    eigs,
    im_threshold: float = MATRIX_IM_THRESHOLD,
    energy_ceiling: float = math.inf,
    metadata: dict | None = None,
) -> SpectrumReport:
    """Split eigenvalues with ``Re <= ceiling`` by ``|Im| <= im_threshold``."""
    if not im_threshold > 0:
        raise ValueError("im_threshold must be positive")
    z = np.asarray(eigs, dtype=np.complex128).ravel()
    z = z[np.lexsort((z.imag, z.real))] if z.size else z
    below = z[z.real <= energy_ceiling]
    is_real = np.abs(below.imag) <= im_threshold
    return SpectrumReport(
        eigenvalues=z,
        real_subset=below[is_real],
        complex_subset=below[~is_real],
        above_ceiling=z[z.real > energy_ceiling],
        im_threshold=float(im_threshold),
        energy_ceiling=float(energy_ceiling),
        metadata=dict(metadata or {}),
    )
