"""Finite-difference operators on the interior nodes of a Grid.

All matrices act on the ``n - 2`` interior nodes; the wavefunction is pinned
to zero at both ends (Dirichlet).  Residuals are measured by the action on
smooth probe vectors over interior rows, never by matrix-norm differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, ZeroVector
from .grid import ComplexField, Grid

ORDER_WINDOW = (1.7, 2.3)


def _as_interior(values, grid: Grid) -> np.ndarray:
    v = np.asarray(values)
    if v.shape == (grid.n,):
        return v[1:-1]
    if v.shape == (grid.n - 2,):
        return v
    raise DimensionMismatch(f"expected {grid.n} or {grid.n - 2} values, got {v.shape}")


def first_difference(grid: Grid) -> np.ndarray:
    """Central difference: exactly antisymmetric, ``+-1/(2h)`` off the diagonal."""
    m = grid.n - 2
    D = np.zeros((m, m))
    k = 0.5 / grid.h
    idx = np.arange(m - 1)
    D[idx, idx + 1] = k
    D[idx + 1, idx] = -k
    return D


def second_difference(grid: Grid) -> np.ndarray:
    """``(1, -2, 1)/h^2`` stencil."""
    m = grid.n - 2
    L = np.zeros((m, m))
    idx = np.arange(m)
    L[idx, idx] = -2.0 / grid.h**2
    L[idx[:-1], idx[:-1] + 1] = 1.0 / grid.h**2
    L[idx[:-1] + 1, idx[:-1]] = 1.0 / grid.h**2
    return L


def discretize_hamiltonian(V: ComplexField) -> np.ndarray:
    """``H = -d^2/dx^2 + V`` with the 3-point stencil."""
    H = -second_difference(V.grid).astype(np.complex128)
    H[np.diag_indices_from(H)] += V.values[1:-1]
    return H


def discretize_O(f, g, grid: Grid, adjoint: bool = False) -> np.ndarray:
    """``O = d/dx + f + i g``; with ``adjoint``, ``O^+ = -d/dx + f - i g``.

    The adjoint matrix is the exact conjugate transpose of the plain one.
    """
    D = first_difference(grid)
    w = _as_interior(f, grid) + 1j * _as_interior(g, grid)
    if adjoint:
        M = (-D).astype(np.complex128)
        M[np.diag_indices_from(M)] += np.conj(w)
    else:
        M = D.astype(np.complex128)
        M[np.diag_indices_from(M)] += w
    return M


def build_eta(f, g, grid: Grid, mode: str = "composed", f1=None, g1=None) -> np.ndarray:
    """Intertwining operator ``eta``.

    ``composed``: ``O^+ O``, Hermitian and positive semidefinite by
    construction.  ``direct``: ``-d^2 - 2 i g d/dx + f^2 - f' + g^2 - i g'``
    assembled with the 3-point second difference; needs ``f1`` and ``g1``.
    """
    if mode == "composed":
        O = discretize_O(f, g, grid)
        M = O.conj().T @ O
        return 0.5 * (M + M.conj().T)
    if mode == "direct":
        if f1 is None or g1 is None:
            raise ValueError("direct eta needs f' and g'")
        fi, gi = _as_interior(f, grid), _as_interior(g, grid)
        f1i, g1i = _as_interior(f1, grid), _as_interior(g1, grid)
        E = -second_difference(grid).astype(np.complex128)
        E += (-2j * gi)[:, None] * first_difference(grid)
        E[np.diag_indices_from(E)] += fi**2 - f1i + gi**2 - 1j * g1i
        return E
    raise ValueError(f"unknown eta mode {mode!r}")


def _rows(grid: Grid) -> slice:
    m = grid.interior_margin
    return slice(m, grid.n - 2 - m)


def _norm(v: np.ndarray, grid: Grid) -> float:
    return float(np.linalg.norm(v[_rows(grid)]))


def _probe_vectors(probes, grid: Grid) -> list[np.ndarray]:
    out = []
    for p in probes:
        vals = p(grid.x) if callable(p) else p
        out.append(np.asarray(_as_interior(vals, grid), dtype=np.complex128))
    return out


def gaussian_probes() -> list[Callable[[np.ndarray], np.ndarray]]:
    """Smooth probes that vanish to roundoff at the walls of a wide box."""
    return [
        lambda x: np.exp(-(x**2) / 4),
        lambda x: x * np.exp(-(x**2) / 4),
        lambda x: np.sin(x) * np.exp(-(x**2) / 2),
    ]


def pseudo_hermiticity_residual(H: np.ndarray, eta: np.ndarray, probes: Sequence, grid: Grid) -> float:
    """``max_p |(eta H - H^+ eta) p| / (|eta H|_est |p|)`` over interior rows.

    ``|eta H|_est`` is the largest ``|eta H p| / |p|`` among the probes, a
    grid-independent scale.
    """
    if H.shape != eta.shape or H.shape[0] != H.shape[1]:
        raise DimensionMismatch(f"H is {H.shape}, eta is {eta.shape}")
    if H.shape[0] != grid.n - 2:
        raise DimensionMismatch("operators do not match the grid")
    Hc = H.conj().T
    worst = 0.0
    scale = 0.0
    for p in _probe_vectors(probes, grid):
        pn = _norm(p, grid)
        if pn == 0.0:
            raise ZeroVector("probe vanishes on the interior")
        etaHp = eta @ (H @ p)
        defect = etaHp - Hc @ (eta @ p)
        scale = max(scale, _norm(etaHp, grid) / pn)
        worst = max(worst, _norm(defect, grid) / pn)
    return worst / scale if scale > 0 else worst


def eigen_residual(H: np.ndarray, phi: ComplexField, energy: complex) -> float:
    """``|H phi - E phi| / |phi|`` over interior rows."""
    grid = phi.grid
    if H.shape != (grid.n - 2, grid.n - 2):
        raise DimensionMismatch(f"H is {H.shape}, phi has {grid.n} nodes")
    v = phi.values[1:-1]
    n = _norm(v, grid)
    if n == 0.0:
        raise ZeroVector("phi vanishes on the interior")
    return _norm(H @ v - energy * v, grid) / n


def kernel_residual(O: np.ndarray, phi: ComplexField) -> float:
    """``|O phi| / |phi|`` over interior rows."""
    grid = phi.grid
    if O.shape != (grid.n - 2, grid.n - 2):
        raise DimensionMismatch(f"O is {O.shape}, phi has {grid.n} nodes")
    v = phi.values[1:-1]
    n = _norm(v, grid)
    if n == 0.0:
        raise ZeroVector("phi vanishes on the interior")
    return _norm(O @ v, grid) / n


def quadratic_form(eta: np.ndarray, psi) -> float:
    """``psi^+ eta psi`` (real for Hermitian eta)."""
    psi = np.asarray(psi, dtype=np.complex128)
    return float(np.vdot(psi, eta @ psi).real)


@dataclass(frozen=True)
class ResidualReport:
    relation: str
    h: float
    residual: float
    h_fine: float
    residual_fine: float

    @property
    def ratio(self) -> float:
        if self.residual == 0.0:
            return 0.0 if self.residual_fine == 0.0 else math.inf
        return self.residual_fine / self.residual

    @property
    def order(self) -> float:
        if self.residual == 0.0 or self.residual_fine == 0.0:
            return math.inf if self.residual_fine == 0.0 else -math.inf
        return math.log(self.residual / self.residual_fine) / math.log(self.h / self.h_fine)

    def second_order(self, floor: float = 1e-13) -> bool:
        """Order inside the window, or both residuals at roundoff level."""
        if self.residual <= floor and self.residual_fine <= floor:
            return True
        return ORDER_WINDOW[0] <= self.order <= ORDER_WINDOW[1]

    def to_dict(self) -> dict:
        order = self.order
        return {
            "relation": self.relation,
            "h": self.h,
            "residual": self.residual,
            "h_fine": self.h_fine,
            "residual_fine": self.residual_fine,
            "order": order if math.isfinite(order) else None,
        }


def convergence(relation: str, measure: Callable[[Grid], float], grid: Grid) -> ResidualReport:
    """Evaluate ``measure`` on ``grid`` and on its refinement (h/2)."""
    fine = grid.refined()
    return ResidualReport(relation, grid.h, measure(grid), fine.h, measure(fine))
