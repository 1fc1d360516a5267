"""Complex potentials built from a real generating function ``g``.

With ``O = d/dx + f + i g`` and ``eta = O^+ O`` the Schrodinger operator
``H = -d^2/dx^2 + V`` satisfies ``eta H = H^+ eta`` when

    Im V = -2 g'
    Re V = f^2 - f' - g^2 + beta,   f^2 - f' = (2 g g'' - g'^2 + alpha) / (4 g^2)

The kernel of ``O``, ``phi = exp(-int (f + i g))``, is the only state whose
eta-norm vanishes; it is an eigenfunction with energy ``beta + i E_i`` when
``f = -(E_i + g') / (2 g)`` and ``E_i^2 = alpha``.

Ratios with ``g`` in the denominator have removable singularities at simple
zeros of ``g``.  Inside a small window around each zero the functions are
evaluated from Taylor series of numerator and denominator (see
:func:`pseudospec.expr.taylor`), never by dividing two small numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import brentq

from . import expr as ex
from .errors import (
    ConstructionError,
    DomainError,
    InconsistentSpec,
    NonSimpleZero,
    PotentialSingular,
    QuadratureError,
    SingularSuperpotential,
)
from .grid import (
    DEFAULT_PROBE,
    ComplexField,
    Grid,
    Normalizability,
    NormalizabilityVerdict,
    ProbeConfig,
    cumulative_integral,
    l2_norm_growth,
)

# consistency tolerance for E_i^2 = alpha
ALPHA_TOL = 1e-10
# window around a simple zero, in grid spacings
ZERO_WINDOW_SPACINGS = 10
SERIES_ORDER = 16
# a zero is simple if |g'| exceeds this
SLOPE_MIN = 1e-8
# |E_i + g'(x0)| allowed at a zero before f is declared singular
REGULARITY_TOL = 1e-8
PT_TOL = 1e-10
DEFAULT_SCAN_H = 1e-3


@dataclass(frozen=True)
class ModelSpec:
    """Generating function plus the real constants of the construction."""

    g: ex.Expr
    alpha: float
    beta: float = 0.0
    e_imag: float | None = None

    def __post_init__(self):
        for name in ("alpha", "beta"):
            if not math.isfinite(getattr(self, name)):
                raise InconsistentSpec(f"{name} must be finite")
        if self.e_imag is not None:
            if not math.isfinite(self.e_imag):
                raise InconsistentSpec("e_imag must be finite")
            if abs(self.e_imag**2 - self.alpha) > ALPHA_TOL:
                raise InconsistentSpec(
                    f"E_i^2 = {self.e_imag**2:g} differs from alpha = {self.alpha:g}")
        if not self.g.depends_on_x and ex.evaluate(self.g, 0.0) == 0.0:
            raise InconsistentSpec("g must not vanish identically")

    @classmethod
    def build(cls, g, alpha=None, beta=0.0, e_imag=None) -> ModelSpec:
        """Accept DSL text or an Expr; derive ``alpha`` from ``e_imag`` if omitted."""
        if isinstance(g, str):
            g = ex.parse(g)
        if alpha is None:
            alpha = 0.0 if e_imag is None else float(e_imag) ** 2
        return cls(g, float(alpha), float(beta), None if e_imag is None else float(e_imag))

    def with_e_imag(self, e_imag: float) -> ModelSpec:
        return replace(self, e_imag=float(e_imag))

    @cached_property
    def dg(self) -> tuple[ex.Expr, ex.Expr, ex.Expr, ex.Expr]:
        """``(g, g', g'', g''')``."""
        return tuple(ex.derivatives(self.g, 3))

    @property
    def energy(self) -> complex:
        if self.e_imag is None:
            raise InconsistentSpec("kernel energy needs e_imag")
        return complex(self.beta, self.e_imag)


@dataclass(frozen=True)
class SimpleZero:
    location: float
    slope: float


# ---------------------------------------------------------------------------
# zeros of g


def _scan_nodes(x: np.ndarray, h: float | None) -> tuple[np.ndarray, float]:
    lo, hi = float(np.min(x)), float(np.max(x))
    if h is None:
        h = DEFAULT_SCAN_H
        if x.size > 1:
            steps = np.diff(np.sort(x.ravel()))
            steps = steps[steps > 0]
            if steps.size:
                h = float(steps.min())
    if hi - lo < h:
        w = ZERO_WINDOW_SPACINGS * h
        lo, hi = lo - w, hi + w
    n = int(math.ceil((hi - lo) / h)) + 1
    return np.linspace(lo, hi, max(n, 2)), h


def find_simple_zeros(g: ex.Expr, nodes: np.ndarray) -> list[SimpleZero]:
    """Zeros of ``g`` on the span of ``nodes`` (sorted, uniform).

    Sign changes between neighbours are refined with Brent's method; zeros
    landing exactly on a node are taken as is.  Raises NonSimpleZero when
    ``|g'| <= SLOPE_MIN`` at a zero.
    """
    nodes = np.asarray(nodes, dtype=float)
    vals = ex.evaluate(g, nodes)
    dg = ex.differentiate(g)
    zeros: list[SimpleZero] = []
    for i in np.flatnonzero(vals == 0.0):
        neighbours = vals[max(i - 1, 0) : i + 2]
        if np.count_nonzero(neighbours == 0.0) > 1:
            raise OverflowError(
                f"g underflows to 0 near x={nodes[i]:g}; shrink the domain")
        zeros.append(SimpleZero(float(nodes[i]), ex.evaluate(dg, float(nodes[i]))))
    for i in np.flatnonzero(vals[:-1] * vals[1:] < 0.0):
        a, b = float(nodes[i]), float(nodes[i + 1])
        x0 = brentq(lambda t: ex.evaluate(g, t), a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        g0 = ex.evaluate(g, x0)
        if abs(g0) > 1e-8 * max(abs(vals[i]), abs(vals[i + 1])):
            raise DomainError(f"g changes sign through a singularity near x={x0:g}")
        zeros.append(SimpleZero(x0, ex.evaluate(dg, x0)))
    for z in zeros:
        if abs(z.slope) <= SLOPE_MIN:
            raise NonSimpleZero(f"g has a non-simple zero at x={z.location:g} (g'={z.slope:g})")
    return sorted(zeros, key=lambda z: z.location)


# ---------------------------------------------------------------------------
# series machinery near zeros


def _derivative_series(G: np.ndarray, k: int, n: int) -> np.ndarray:
    """Taylor coefficients of the k-th derivative from those of the function."""
    idx = np.arange(n)
    fac = np.ones(n)
    for j in range(1, k + 1):
        fac *= idx + j
    return G[k : k + n] * fac


def _smul(a, b):
    return np.convolve(a, b)[: len(a)]


def _sdiv(a, b):
    c = np.zeros(len(a))
    c[0] = a[0] / b[0]
    for k in range(1, len(a)):
        c[k] = (a[k] - np.dot(b[1 : k + 1], c[k - 1 :: -1])) / b[0]
    return c


def _window(coeffs: np.ndarray, h: float) -> float:
    """Window half-width where the truncated series stays accurate."""
    w = ZERO_WINDOW_SPACINGS * h
    tail = np.abs(coeffs[-4:])
    tail = tail[tail > 0]
    if tail.size:
        k = np.arange(len(coeffs) - 4, len(coeffs))[-tail.size :]
        radius = float(np.min(tail ** (-1.0 / k)))
        w = min(w, 0.5 * radius)
    return w


class _Evaluator:
    """Evaluates f, its derivatives and the -(E_i + g')/(2g) ratio on an array of points."""

    def __init__(self, spec: ModelSpec, x, h: float | None = None):
        self.spec = spec
        self.scalar = np.ndim(x) == 0
        self.x = np.atleast_1d(np.asarray(x, dtype=float))
        nodes, self.h = _scan_nodes(self.x, h)
        self.zeros = find_simple_zeros(spec.g, nodes)
        g, g1, g2, g3 = spec.dg
        self.g = ex.evaluate(g, self.x)
        self.g1 = ex.evaluate(g1, self.x)
        self.g2 = ex.evaluate(g2, self.x)
        self._g3_expr = g3

    @cached_property
    def g3(self):
        return ex.evaluate(self._g3_expr, self.x)

    def _zero_series(self, z: SimpleZero, n: int):
        G = ex.taylor(self.spec.g, z.location, n + 2)
        return G[: n], _derivative_series(G, 1, n), _derivative_series(G, 2, n)

    def _out(self, arr):
        return arr[0] if self.scalar else arr

    def f_derivs(self, e_imag: float):
        """``(f, f', f'')`` for ``f = -(E_i + g') / (2 g)``."""
        with np.errstate(all="ignore"):
            D = 2.0 * self.g
            f = -(e_imag + self.g1) / D
            f1 = (-self.g2 - f * 2.0 * self.g1) / D
            f2 = (-self.g3 - 2.0 * f1 * 2.0 * self.g1 - f * 2.0 * self.g2) / D
        for z in self.zeros:
            if abs(e_imag + z.slope) > REGULARITY_TOL * max(1.0, abs(z.slope)):
                raise SingularSuperpotential(
                    f"g(x0)=0 at x0={z.location:.12g} with g'(x0)={z.slope:.12g}; "
                    f"f is regular only for E_i={-z.slope:.12g}, got {e_imag:g}")
            G, G1, G2 = self._zero_series(z, SERIES_ORDER + 2)
            num = -G1.copy()
            num[0] -= e_imag
            F = _sdiv(num[1:], 2.0 * G[1:])
            mask = np.abs(self.x - z.location) < _window(F, self.h)
            d = self.x[mask] - z.location
            f[mask] = P.polyval(d, F)
            f1[mask] = P.polyval(d, P.polyder(F))
            f2[mask] = P.polyval(d, P.polyder(F, 2))
        if not (np.isfinite(f).all() and np.isfinite(f1).all() and np.isfinite(f2).all()):
            raise SingularSuperpotential("f is not finite on the requested points")
        return f, f1, f2

    def ratio(self, alpha: float):
        """``(2 g g'' - g'^2 + alpha) / (4 g^2)``."""
        with np.errstate(all="ignore"):
            r = (2.0 * self.g * self.g2 - self.g1**2 + alpha) / (4.0 * self.g**2)
        for z in self.zeros:
            if abs(alpha - z.slope**2) > REGULARITY_TOL * max(1.0, z.slope**2):
                raise PotentialSingular(
                    f"potential has a pole at x={z.location:.12g}: g'(x0)^2={z.slope**2:.12g} "
                    f"but alpha={alpha:g}")
            G, G1, G2 = self._zero_series(z, SERIES_ORDER + 2)
            num = 2.0 * _smul(G, G2) - _smul(G1, G1)
            num[0] += alpha
            R = _sdiv(num[2:], 4.0 * _smul(G, G)[2:])
            mask = np.abs(self.x - z.location) < _window(R, self.h)
            r[mask] = P.polyval(self.x[mask] - z.location, R)
        if not np.isfinite(r).all():
            bad = self.x[~np.isfinite(r)]
            if np.any(self.g[~np.isfinite(r)] == 0.0):
                raise PotentialSingular(f"g vanishes at x={bad[0]:g}")
            raise OverflowError(f"potential overflows at x={bad[0]:g}")
        return r

    def potential(self, alpha: float, beta: float):
        re = self.ratio(alpha) - self.g**2 + beta
        im = -2.0 * self.g1
        v = re + 1j * im
        if not np.isfinite(v).all():
            raise OverflowError("potential is not representable on the requested points")
        return v


# ---------------------------------------------------------------------------
# public operations


def superpotential_f(spec: ModelSpec, x, h: float | None = None):
    """``f = -(E_i + g') / (2 g)``, with the removable singularities filled in."""
    if spec.e_imag is None:
        raise InconsistentSpec("superpotential needs e_imag")
    ev = _Evaluator(spec, x, h)
    return ev._out(ev.f_derivs(spec.e_imag)[0])


def superpotential_derivatives(spec: ModelSpec, x, h: float | None = None):
    """``(f, f', f'')`` as arrays."""
    if spec.e_imag is None:
        raise InconsistentSpec("superpotential needs e_imag")
    return _Evaluator(spec, x, h).f_derivs(spec.e_imag)


def fsq_minus_fprime(spec: ModelSpec, x, h: float | None = None):
    """Right-hand side ``(2 g g'' - g'^2 + alpha) / (4 g^2)`` of the Riccati relation."""
    ev = _Evaluator(spec, x, h)
    return ev._out(ev.ratio(spec.alpha))


def potential(spec: ModelSpec, x, h: float | None = None):
    """Complex potential ``V(x)`` from ``g, g', g'', alpha, beta``."""
    ev = _Evaluator(spec, x, h)
    return ev._out(ev.potential(spec.alpha, spec.beta))


def potential_field(spec: ModelSpec, grid: Grid) -> ComplexField:
    return ComplexField(grid, potential(spec, grid.x, grid.h))


def is_regular(spec: ModelSpec, e_imag: float, grid: Grid) -> bool:
    """Whether ``f`` for this ``E_i`` is regular at every zero of g on the grid."""
    try:
        zeros = find_simple_zeros(spec.g, grid.x)
    except NonSimpleZero:
        return False
    return all(abs(e_imag + z.slope) <= REGULARITY_TOL * max(1.0, abs(z.slope)) for z in zeros)


def resolve_e_imag(spec: ModelSpec, grid: Grid) -> float:
    """E_i for the kernel state: the given one, or the regular root of ``E_i^2 = alpha``."""
    if spec.e_imag is not None:
        return spec.e_imag
    if spec.alpha < 0:
        raise InconsistentSpec("alpha < 0: no real E_i satisfies E_i^2 = alpha")
    root = math.sqrt(spec.alpha)
    for cand in ((-root, root) if root else (0.0,)):
        if is_regular(spec, cand, grid):
            return cand
    raise SingularSuperpotential(f"neither sign of E_i = +-{root:g} gives a regular f")


def candidate_eigenfunction(
    spec: ModelSpec, grid: Grid, base_index: int | None = None
) -> tuple[ComplexField, complex]:
    """Kernel state ``phi = exp(-int (f + i g))`` and its energy ``beta + i E_i``.

    The antiderivative is taken from ``base_index`` (default: the midpoint),
    so ``phi`` equals 1 there.
    """
    if spec.e_imag is None:
        raise InconsistentSpec("candidate eigenfunction needs e_imag")
    if base_index is None:
        base_index = grid.mid_index
    f = superpotential_f(spec, grid.x, grid.h)
    g = ex.evaluate(spec.g, grid.x)
    if not (np.isfinite(f).all() and np.isfinite(g).all()):
        raise QuadratureError("f or g is not finite on the grid")
    S = cumulative_integral(f + 1j * g, grid, base_index)
    if np.max(-S.real) > 700.0:
        raise OverflowError("|phi| exceeds the floating-point range on this grid")
    return ComplexField(grid, np.exp(-S)), spec.energy


# ---------------------------------------------------------------------------
# classification


class Verdict(str, Enum):
    REAL_SPECTRUM_GUARANTEED = "RealSpectrumGuaranteed"
    KNOWN_REAL_EIGENFUNCTION = "KnownRealEigenfunction"
    REAL_SPECTRUM_BY_EXCLUSION = "RealSpectrumByExclusion"
    COMPLEX_EIGENVALUE_PRESENT = "ComplexEigenvaluePresent"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class Classification:
    """Outcome of the alpha-trichotomy.  A reported claim, not a proof:
    completeness of the eigenbasis is assumed."""

    verdict: Verdict
    energy: complex | None = None
    e_imag: float | None = None
    reason: str = ""
    evidence: dict[str, NormalizabilityVerdict] = field(default_factory=dict)

    def __str__(self):
        if self.energy is None:
            return self.verdict.value
        return f"{self.verdict.value}{{E={_fmt_complex(self.energy)}}}"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "energy": None if self.energy is None else [self.energy.real, self.energy.imag],
            "e_imag": self.e_imag,
            "reason": self.reason,
            "evidence": {k: v.to_dict() for k, v in self.evidence.items()},
        }


def _fmt_complex(z: complex) -> str:
    if z.imag == 0:
        return f"{z.real:g}"
    return f"{z.real:g}{z.imag:+g}i"


def classify(spec: ModelSpec, probe: ProbeConfig = DEFAULT_PROBE) -> Classification:
    """Apply the alpha-trichotomy, probing normalizability of the kernel state."""
    if spec.alpha < 0:
        return Classification(
            Verdict.REAL_SPECTRUM_GUARANTEED,
            reason="alpha < 0: E_i^2 = alpha has no real solution, so no kernel "
                   "element of O is an eigenfunction")
    if spec.e_imag is not None:
        candidates = [spec.e_imag]
    elif spec.alpha == 0:
        candidates = [0.0]
    else:
        root = math.sqrt(spec.alpha)
        candidates = [-root, root]

    widest = Grid.symmetric(max(probe.widths), probe.h)
    regular = [e for e in candidates if is_regular(spec, e, widest)]
    if not regular:
        if spec.alpha == 0:
            return Classification(
                Verdict.REAL_SPECTRUM_GUARANTEED,
                reason="no regular kernel eigenfunction; with alpha = 0 any kernel "
                       "eigenvalue would be real anyway")
        return Classification(Verdict.REAL_SPECTRUM_BY_EXCLUSION,
                              reason="no regular kernel eigenfunction")

    evidence: dict[str, NormalizabilityVerdict] = {}
    for e in regular:
        s = spec.with_e_imag(e)

        def build(L, s=s):
            return candidate_eigenfunction(s, Grid.symmetric(L, probe.h))[0]

        evidence[f"{e:+g}"] = l2_norm_growth(build, probe.widths, probe)

    verdicts = {k: v.verdict for k, v in evidence.items()}
    if spec.alpha == 0:
        v = verdicts["+0"]
        if v is Normalizability.NORMALIZABLE:
            return Classification(Verdict.KNOWN_REAL_EIGENFUNCTION, complex(spec.beta, 0.0), 0.0,
                                  "alpha = 0: kernel state is square integrable", evidence)
        if v is Normalizability.NOT_NORMALIZABLE:
            return Classification(Verdict.REAL_SPECTRUM_GUARANTEED, None, None,
                                  "alpha = 0 and the kernel state is not in L2", evidence)
        return Classification(Verdict.INDETERMINATE, None, None,
                              "L2 probe inconclusive", evidence)

    for e in regular:
        if verdicts[f"{e:+g}"] is Normalizability.NORMALIZABLE:
            return Classification(Verdict.COMPLEX_EIGENVALUE_PRESENT, complex(spec.beta, e), e,
                                  f"kernel state with E_i={e:g} is square integrable", evidence)
    if all(v is Normalizability.NOT_NORMALIZABLE for v in verdicts.values()):
        return Classification(Verdict.REAL_SPECTRUM_BY_EXCLUSION, None, None,
                              "every regular kernel state lies outside L2", evidence)
    return Classification(Verdict.INDETERMINATE, None, None, "L2 probe inconclusive", evidence)


# ---------------------------------------------------------------------------
# identity checks


@dataclass(frozen=True)
class IdentityReport:
    e_imag: float
    kernel_consistency: float
    third_order: float
    third_order_printed: float
    eigen_relation: float
    g_evenness: float
    pt_symmetric: bool
    pt_potential: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def check_identities(spec: ModelSpec, grid: Grid) -> IdentityReport:
    """Maximum residuals of the construction identities over interior nodes.

    * ``kernel_consistency``: ``f^2 - f' - (2gg'' - g'^2 + E_i^2)/(4g^2)`` with
      ``f = -(E_i + g')/(2g)``.
    * ``third_order``: ``4g'(f^2 - f') + 2g(f^2 - f')' - g'''``.
    * ``third_order_printed``: the same with ``f^2 + f'``; informational, it
      does not vanish in general.
    * ``eigen_relation``: ``-phi''/phi + V - (beta + i E_i)`` with
      ``phi''/phi = (f + ig)^2 - (f' + ig')``.
    * ``g_evenness`` / ``pt_potential``: ``max|g(x) - g(-x)|`` and
      ``max|V(-x)* - V(x)|``.
    """
    e_imag = resolve_e_imag(spec, grid)
    s = spec.with_e_imag(e_imag) if spec.e_imag is None else spec
    sl = grid.interior
    x = grid.x
    ev = _Evaluator(s, x, grid.h)
    f, f1, f2 = ev.f_derivs(e_imag)
    g, g1, g3 = ev.g, ev.g1, ev.g3
    r = ev.ratio(e_imag**2)
    q = f**2 - f1
    q1 = 2.0 * f * f1 - f2
    p = f**2 + f1
    p1 = 2.0 * f * f1 + f2
    kernel = np.abs(q - r)[sl]
    third = np.abs(4.0 * g1 * q + 2.0 * g * q1 - g3)[sl]
    printed = np.abs(4.0 * g1 * p + 2.0 * g * p1 - g3)[sl]

    V = ev.potential(s.alpha, s.beta)
    w = f + 1j * g
    w1 = f1 + 1j * g1
    eig = np.abs(-(w**2 - w1) + V - s.energy)[sl]

    try:
        g_neg = ex.evaluate(spec.g, -x)
        V_neg = potential(s, -x, grid.h)
        evenness = float(np.max(np.abs(g - g_neg)))
        pt_pot = float(np.max(np.abs(np.conj(V_neg) - V)))
    except (DomainError, ConstructionError, OverflowError):
        evenness = pt_pot = math.inf
    return IdentityReport(
        e_imag=e_imag,
        kernel_consistency=float(kernel.max()),
        third_order=float(third.max()),
        third_order_printed=float(printed.max()),
        eigen_relation=float(eig.max()),
        g_evenness=evenness,
        pt_symmetric=evenness <= PT_TOL,
        pt_potential=pt_pot,
    )
