"""Uniform grids, trapezoid antiderivatives and the growing-box L2 probe."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import GridError, NonFinite


@dataclass(frozen=True)
class Grid:
    """``n`` equally spaced nodes on ``[x_min, x_max]`` (``n`` odd)."""

    x_min: float
    x_max: float
    n: int
    interior_margin: int = 2

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise GridError("grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise GridError(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if self.n < 3 or self.n % 2 == 0:
            raise GridError(f"n must be odd and >= 3, got {self.n}")
        if self.interior_margin < 1:
            raise GridError(f"interior_margin must be >= 1, got {self.interior_margin}")

    @classmethod
    def symmetric(cls, half_width: float, h: float, interior_margin: int = 2) -> Grid:
        """Grid on ``[-L, L]`` whose spacing is as close to ``h`` as possible."""
        half = max(1, round(half_width / h))
        return cls(-half_width, half_width, 2 * half + 1, interior_margin)

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @cached_property
    def x(self) -> np.ndarray:
        xs = np.linspace(self.x_min, self.x_max, self.n)
        xs.setflags(write=False)
        return xs

    @property
    def mid_index(self) -> int:
        return self.n // 2

    @property
    def interior(self) -> slice:
        return slice(self.interior_margin, self.n - self.interior_margin)

    def refined(self) -> Grid:
        """Same interval, half the spacing."""
        return Grid(self.x_min, self.x_max, 2 * self.n - 1, self.interior_margin)


@dataclass(frozen=True)
class ComplexField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        if values.shape != (self.grid.n,):
            raise GridError(f"field has shape {values.shape}, grid has {self.grid.n} nodes")
        if not np.isfinite(values).all():
            raise NonFinite("field values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def interior(self) -> np.ndarray:
        return self.values[self.grid.interior]


def cumulative_integral(samples, grid: Grid, base_index: int = 0) -> np.ndarray:
    """Trapezoid antiderivative ``F`` of ``samples`` with ``F[base_index] = 0``."""
    s = np.asarray(samples)
    if s.shape != (grid.n,):
        raise GridError(f"expected {grid.n} samples, got {s.shape}")
    steps = 0.5 * grid.h * (s[1:] + s[:-1])
    F = np.concatenate([np.zeros(1, dtype=steps.dtype), np.cumsum(steps)])
    return F - F[base_index]


def trapezoid(samples, grid: Grid) -> float:
    s = np.asarray(samples)
    return float(grid.h * (s.sum() - 0.5 * (s[0] + s[-1])))


class Normalizability(str, Enum):
    NORMALIZABLE = "Normalizable"
    NOT_NORMALIZABLE = "NotNormalizable"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class ProbeConfig:
    """Thresholds of the growing-box L2 test (none come from theory).

    ``plateau``: last relative increase below which the norm is taken as
    converged.  ``growth``: factor over the last two widths that signals
    divergence.
    """

    plateau: float = 1e-5
    growth: float = 2.0
    h: float = 0.01
    widths: tuple[float, ...] = (4.0, 8.0, 12.0, 16.0)


DEFAULT_PROBE = ProbeConfig()


@dataclass(frozen=True)
class NormalizabilityVerdict:
    verdict: Normalizability
    widths: tuple[float, ...]
    integrals: tuple[float, ...]
    reason: str = ""

    @property
    def total(self) -> float:
        return self.integrals[-1] if self.integrals else float("nan")

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "widths": list(self.widths),
            "integrals": [i if math.isfinite(i) else None for i in self.integrals],
            "reason": self.reason,
        }


def l2_norm_growth(
    phi_builder: Callable[[float], ComplexField],
    widths: Sequence[float],
    config: ProbeConfig = DEFAULT_PROBE,
) -> NormalizabilityVerdict:
    """Decide whether ``|phi|^2`` is integrable from ``I(L) = int_{-L}^{L} |phi|^2``."""
    widths = tuple(float(w) for w in widths)
    if len(widths) < 4 or any(b <= a for a, b in zip(widths, widths[1:])):
        raise ValueError("need at least 4 strictly increasing widths")
    integrals: list[float] = []
    for L in widths:
        try:
            phi = phi_builder(L)
            with np.errstate(over="ignore"):
                value = trapezoid(np.abs(phi.values) ** 2, phi.grid)
        except (OverflowError, NonFinite):
            integrals.append(math.inf)
            return NormalizabilityVerdict(
                Normalizability.NOT_NORMALIZABLE, widths[: len(integrals)],
                tuple(integrals), f"|phi|^2 overflows by L={L:g}")
        if not math.isfinite(value):
            integrals.append(math.inf)
            return NormalizabilityVerdict(
                Normalizability.NOT_NORMALIZABLE, widths[: len(integrals)],
                tuple(integrals), f"integral overflows by L={L:g}")
        integrals.append(value)

    I = integrals
    if I[-1] <= 0.0:
        return NormalizabilityVerdict(Normalizability.INDETERMINATE, widths, tuple(I),
                                      "phi vanishes identically")
    if I[-3] > 0 and I[-1] / I[-3] >= config.growth:
        return NormalizabilityVerdict(
            Normalizability.NOT_NORMALIZABLE, widths, tuple(I),
            f"I grows by {I[-1] / I[-3]:.3g}x over the last two widths")
    last = (I[-1] - I[-2]) / I[-1]
    prev = (I[-2] - I[-3]) / I[-2]
    if last < config.plateau and last <= prev:
        return NormalizabilityVerdict(Normalizability.NORMALIZABLE, widths, tuple(I),
                                      f"last relative increase {last:.2e}")
    return NormalizabilityVerdict(
        Normalizability.INDETERMINATE, widths, tuple(I),
        f"last relative increase {last:.2e}, growth {I[-1] / I[-3]:.3g}x")
