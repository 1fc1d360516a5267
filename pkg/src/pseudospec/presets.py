"""The three worked examples as ready-made configurations.

Each preset also keeps the closed-form Hamiltonian as printed, so tests can
compare the constructed potential against it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import ModelSpec


def example1_printed(x, alpha=0.0, beta=0.0, im_sign=-1.0):
    """``x^2 + (alpha/4) e^{2x^2} - e^{-2x^2} + im_sign * 4 i x e^{-x^2} + beta - 1``.

    As printed the imaginary term carries ``-``; the construction with
    ``g = e^{-x^2}`` gives ``+`` (``im_sign=+1``).
    """
    x = np.asarray(x, dtype=float)
    return (x**2 + 0.25 * alpha * np.exp(2 * x**2) - np.exp(-2 * x**2)
            + im_sign * 4j * x * np.exp(-(x**2)) + beta - 1.0)


def example2_printed(x):
    """``-2 i cosh(x) - sinh(x)^2`` (corresponds to beta = -1/4)."""
    x = np.asarray(x, dtype=float)
    return -2j * np.cosh(x) - np.sinh(x) ** 2


def example3_printed(x, beta=0.0):
    """``-(2i - 1/4) / cosh(x)^2 + beta - 3/4``."""
    x = np.asarray(x, dtype=float)
    return -(2j - 0.25) / np.cosh(x) ** 2 + beta - 0.75


@dataclass(frozen=True)
class Preset:
    name: str
    g: str
    alpha: float
    beta: float
    e_imag: float | None
    x_min: float
    x_max: float
    n: int
    printed: Callable

    def spec(self, alpha=None, beta=None, e_imag=None) -> ModelSpec:
        """Preset parameters with overrides; overriding alpha alone drops E_i."""
        b = self.beta if beta is None else beta
        if e_imag is not None:
            return ModelSpec.build(self.g, alpha=alpha, beta=b, e_imag=e_imag)
        if alpha is not None:
            return ModelSpec.build(self.g, alpha=alpha, beta=b)
        return ModelSpec.build(self.g, alpha=self.alpha, beta=b, e_imag=self.e_imag)


PRESETS = {
    "example1": Preset("example1", "exp(-x^2)", 0.0, 0.0, None, -10.0, 10.0, 1601, example1_printed),
    "example2": Preset("example2", "sinh(x)", 1.0, -0.25, -1.0, -6.0, 6.0, 1601, example2_printed),
    "example3": Preset("example3", "tanh(x)", 1.0, 0.0, -1.0, -12.0, 12.0, 1601, example3_printed),
}


def preset_spec(name: str, **overrides) -> ModelSpec:
    return PRESETS[name].spec(**overrides)
