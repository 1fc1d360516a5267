"""``pseudospec`` command line: construct | verify | spectrum | classify.

Exit codes: 0 ok, 1 a check failed, 2 config/parse error, 3 construction or
domain error, 4 eigensolver failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import _kernels
from . import expr as ex
from .eigen import PHYSICS_IM_THRESHOLD, eigenvalues, spectrum_report
from .errors import (
    ConstructionError,
    DomainError,
    ExprSyntaxError,
    GridError,
    InconsistentSpec,
    NoConvergence,
    NonFinite,
)
from .grid import ComplexField, Grid
from .linop import (
    build_eta,
    convergence,
    discretize_hamiltonian,
    discretize_O,
    eigen_residual,
    gaussian_probes,
    kernel_residual,
    pseudo_hermiticity_residual,
)
from .model import (
    ModelSpec,
    candidate_eigenfunction,
    check_identities,
    classify,
    potential,
    resolve_e_imag,
    superpotential_f,
)
from .presets import PRESETS

SCHEMA = "pseudospec/1"
EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_CONSTRUCTION, EXIT_SOLVER = 0, 1, 2, 3, 4

# eigenvalue roundoff is about eps * max|V|; above this the spectrum is noise
POTENTIAL_RANGE_LIMIT = 1e10
# walls lower than the inner region by this much mark a non-confining box
TRUNCATION_DROP = 1.0
IDENTITY_TOL = 1e-8
DEFAULT_DOMAIN = (-10.0, 10.0, 1601)


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    g: str
    alpha: float | None
    beta: float
    e_imag: float | None
    x_min: float
    x_max: float
    n: int
    interior_margin: int = 2
    im_threshold: float = PHYSICS_IM_THRESHOLD
    energy_ceiling: float = 5.0
    format: str | None = "csv"
    out: str | None = None
    preset: str | None = None

    def __post_init__(self):
        if self.n % 2 == 0 or self.n < 3:
            raise ConfigError(f"--n must be odd and >= 3, got {self.n}")
        if not self.x_min < self.x_max:
            raise ConfigError("need --xmin < --xmax")
        if not self.im_threshold > 0:
            raise ConfigError("--im-threshold must be positive")

    def spec(self) -> ModelSpec:
        if self.preset is not None:
            return PRESETS[self.preset].spec(self.alpha, self.beta, self.e_imag)
        return ModelSpec.build(self.g, self.alpha, self.beta, self.e_imag)

    def grid(self) -> Grid:
        return Grid(self.x_min, self.x_max, self.n, self.interior_margin)

    def to_dict(self) -> dict:
        d = asdict(self)
        if not math.isfinite(d["energy_ceiling"]):
            d["energy_ceiling"] = None
        return d


def config_from_args(args) -> RunConfig:
    if args.preset is None and args.g is None:
        raise ConfigError("give --preset or --g")
    if args.preset is not None:
        p = PRESETS[args.preset]
        g, beta, domain = p.g, p.beta, (p.x_min, p.x_max, p.n)
    else:
        g, beta, domain = args.g, 0.0, DEFAULT_DOMAIN
    return RunConfig(
        g=g,
        alpha=args.alpha,
        beta=beta if args.beta is None else args.beta,
        e_imag=args.ei,
        x_min=domain[0] if args.xmin is None else args.xmin,
        x_max=domain[1] if args.xmax is None else args.xmax,
        n=domain[2] if args.n is None else args.n,
        interior_margin=args.margin,
        im_threshold=args.im_threshold,
        energy_ceiling=args.ceiling,
        format=args.format,
        out=args.out,
        preset=args.preset,
    )


# ---------------------------------------------------------------------------
# output helpers


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _json(payload: dict) -> str:
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def _csv(columns: dict[str, np.ndarray]) -> str:
    buf = io.StringIO()
    data = np.column_stack(list(columns.values()))
    np.savetxt(buf, data, fmt="%.17g", delimiter=",", header=",".join(columns), comments="")
    return buf.getvalue()


def _envelope(command: str, cfg: RunConfig, spec: ModelSpec) -> dict:
    return {
        "schema": SCHEMA,
        "command": command,
        "config": cfg.to_dict(),
        "model": {"g": str(spec.g), "alpha": spec.alpha, "beta": spec.beta,
                  "e_imag": spec.e_imag},
    }


def _kernel_spec(spec: ModelSpec, grid: Grid) -> ModelSpec | None:
    """Spec with a usable E_i, or None when alpha < 0 or no sign is regular.

    An explicitly requested E_i that makes f singular is an error.
    """
    if spec.e_imag is not None:
        superpotential_f(spec, grid.x, grid.h)
        return spec
    if spec.alpha < 0:
        return None
    try:
        return spec.with_e_imag(resolve_e_imag(spec, grid))
    except ConstructionError:
        return None


# ---------------------------------------------------------------------------
# commands


def run_construct(cfg: RunConfig) -> int:
    spec, grid = cfg.spec(), cfg.grid()
    V = potential(spec, grid.x, grid.h)
    columns = {"x": grid.x, "re_V": V.real, "im_V": V.imag}
    ks = _kernel_spec(spec, grid)
    energy = None
    if ks is not None:
        columns["f"] = superpotential_f(ks, grid.x, grid.h)
        phi, energy = candidate_eigenfunction(ks, grid)
        columns["re_phi"] = phi.values.real
        columns["im_phi"] = phi.values.imag
    if cfg.format == "csv":
        _emit(_csv(columns), cfg.out)
    else:
        payload = _envelope("construct", cfg, spec)
        payload["e_imag"] = None if ks is None else ks.e_imag
        payload["energy"] = None if energy is None else [energy.real, energy.imag]
        payload["columns"] = {k: v.tolist() for k, v in columns.items()}
        _emit(_json(payload), cfg.out)
    return EXIT_OK


def _check(name, passed, **detail) -> dict:
    return {"name": name, "applicable": True, "passed": bool(passed), "detail": detail}


def _skipped(name, reason) -> dict:
    return {"name": name, "applicable": False, "passed": None, "detail": {"reason": reason}}


def _operators(spec: ModelSpec, grid: Grid):
    V = ComplexField(grid, potential(spec, grid.x, grid.h))
    f = superpotential_f(spec, grid.x, grid.h)
    g = ex.evaluate(spec.g, grid.x)
    return discretize_hamiltonian(V), f, g


def run_verify(cfg: RunConfig) -> int:
    spec, grid = cfg.spec(), cfg.grid()
    V = potential(spec, grid.x, grid.h)
    ks = _kernel_spec(spec, grid)
    checks = []
    payload = _envelope("verify", cfg, spec)
    payload["identities"] = None
    if ks is None:
        reason = ("alpha < 0: no real E_i, f is not given by the kernel relation"
                  if spec.alpha < 0 else "no regular superpotential for either sign of E_i")
        for name in ("identities", "pseudo_hermiticity", "kernel_residual", "eigen_residual"):
            checks.append(_skipped(name, reason))
    else:
        ident = check_identities(ks, grid)
        payload["identities"] = ident.to_dict()
        tol = IDENTITY_TOL * max(1.0, float(np.abs(V[grid.interior]).max()))
        worst = max(ident.kernel_consistency, ident.third_order, ident.eigen_relation)
        checks.append(_check("identities", worst <= tol, max_residual=worst, tolerance=tol))

        def eta_measure(G):
            H, f, g = _operators(ks, G)
            return pseudo_hermiticity_residual(H, build_eta(f, g, G), gaussian_probes(), G)

        rep = convergence("eta H = H^+ eta", eta_measure, grid)
        # probes that are not negligible at the walls spoil the norm estimate
        wall = max(abs(p(np.array([grid.x_min, grid.x_max]))).max() for p in gaussian_probes())
        checks.append(_check("pseudo_hermiticity", rep.second_order(), **rep.to_dict(),
                             probe_at_wall=float(wall)))

        try:
            def kernel_measure(G):
                phi, _ = candidate_eigenfunction(ks, G)
                _, f, g = _operators(ks, G)
                return kernel_residual(discretize_O(f, g, G), phi)

            def eigen_measure(G):
                phi, E = candidate_eigenfunction(ks, G)
                H, _, _ = _operators(ks, G)
                return eigen_residual(H, phi, E)

            for name, measure, rel in (("kernel_residual", kernel_measure, "O phi = 0"),
                                       ("eigen_residual", eigen_measure, "H phi = E phi")):
                rep = convergence(rel, measure, grid)
                checks.append(_check(name, rep.second_order(), **rep.to_dict(),
                                     energy=[ks.energy.real, ks.energy.imag]))
        except OverflowError as exc:
            for name in ("kernel_residual", "eigen_residual"):
                checks.append(_skipped(name, f"phi not representable: {exc}"))

    payload["checks"] = checks
    payload["passed"] = all(c["passed"] for c in checks if c["applicable"])
    _emit(_json(payload), cfg.out)
    return EXIT_OK if payload["passed"] else EXIT_CHECK


def suggest_domain(spec: ModelSpec, grid: Grid, limit: float = POTENTIAL_RANGE_LIMIT):
    """Widest window around the grid centre where ``|V| <= limit``."""
    centre = 0.5 * (grid.x_min + grid.x_max)
    half = 0.5 * (grid.x_max - grid.x_min)
    for frac in np.linspace(1.0, 0.05, 96):
        xs = np.linspace(centre - frac * half, centre + frac * half, 401)
        try:
            if np.abs(potential(spec, xs)).max() <= limit:
                return centre - frac * half, centre + frac * half
        except (OverflowError, ConstructionError, DomainError):
            continue
    return None


def truncation_dominated(V: np.ndarray, grid: Grid) -> bool:
    """Walls sit well below the inner 90% of the box: the potential is not confining."""
    edge = max(1, grid.n // 20)
    inner = V.real[edge:-edge]
    walls = np.concatenate([V.real[:edge], V.real[-edge:]])
    return bool(walls.min() < inner.min() - TRUNCATION_DROP)


def run_spectrum(cfg: RunConfig) -> int:
    spec, grid = cfg.spec(), cfg.grid()
    try:
        V = potential(spec, grid.x, grid.h)
    except OverflowError as exc:
        raise OverflowError(f"{exc}; {_suggestion(spec, grid)}") from None
    vmax = float(np.abs(V).max())
    if vmax > POTENTIAL_RANGE_LIMIT:
        raise OverflowError(
            f"max|V| = {vmax:.3g} exceeds the usable range {POTENTIAL_RANGE_LIMIT:.0e}; "
            f"{_suggestion(spec, grid)}")
    H = discretize_hamiltonian(ComplexField(grid, V))
    eigs = eigenvalues(H)
    meta = {
        "x_min": grid.x_min, "x_max": grid.x_max, "n": grid.n, "h": grid.h,
        "dimension": grid.n - 2,
        "truncation_dominated": truncation_dominated(V, grid),
        "backend": _kernels.backend_name(),
    }
    report = spectrum_report(eigs, cfg.im_threshold, cfg.energy_ceiling, meta)
    if cfg.format == "csv":
        z = report.eigenvalues
        below = z.real <= report.energy_ceiling
        kind = np.where(~below, 2, np.where(np.abs(z.imag) <= report.im_threshold, 0, 1))
        _emit(_csv({"re": z.real, "im": z.imag, "class": kind}), cfg.out)
    else:
        payload = _envelope("spectrum", cfg, spec)
        payload.update(report.to_dict())
        _emit(_json(payload), cfg.out)
    return EXIT_OK


def _suggestion(spec, grid) -> str:
    window = suggest_domain(spec, grid)
    if window is None:
        return "no usable sub-window found"
    return f"try --xmin {window[0]:.3g} --xmax {window[1]:.3g}"


def run_classify(cfg: RunConfig) -> int:
    spec = cfg.spec()
    result = classify(spec)
    print(str(result))
    payload = _envelope("classify", cfg, spec)
    payload["classification"] = result.to_dict()
    if cfg.out is not None:
        _emit(_json(payload), cfg.out)
    elif cfg.format == "json":
        _emit(_json(payload), None)
    return EXIT_OK


COMMANDS = {
    "construct": run_construct,
    "verify": run_verify,
    "spectrum": run_spectrum,
    "classify": run_classify,
}


def _finite(text: str) -> float:
    v = float(text)
    if not math.isfinite(v) and v != math.inf:
        raise argparse.ArgumentTypeError(f"not a finite number: {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=sorted(PRESETS))
    src.add_argument("--g", help="generating function, e.g. 'tanh(x)'")
    common.add_argument("--alpha", type=_finite)
    common.add_argument("--beta", type=_finite)
    common.add_argument("--ei", type=_finite, help="imaginary part E_i of the kernel energy")
    common.add_argument("--xmin", type=_finite)
    common.add_argument("--xmax", type=_finite)
    common.add_argument("--n", type=int, help="number of grid nodes (odd)")
    common.add_argument("--margin", type=int, default=2, help="interior margin in nodes")
    common.add_argument("--im-threshold", type=_finite, default=PHYSICS_IM_THRESHOLD)
    common.add_argument("--ceiling", type=_finite, default=5.0, help="energy ceiling")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--out", help="output path (default: stdout)")

    parser = argparse.ArgumentParser(
        prog="pseudospec",
        description="Pseudo-Hermitian Hamiltonians from a generating function g(x).")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "construct": "sample V, f and the kernel state phi",
        "verify": "check identities, intertwining and residual convergence",
        "spectrum": "eigenvalues of the discretised Hamiltonian",
        "classify": "apply the alpha trichotomy",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None and args.command in ("construct", "spectrum"):
        args.format = "csv"
    elif args.format is None and args.command == "verify":
        args.format = "json"
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, ExprSyntaxError, GridError, InconsistentSpec) as exc:
        print(f"pseudospec: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConstructionError, DomainError, OverflowError, NonFinite) as exc:
        print(f"pseudospec: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    except NoConvergence as exc:
        print(f"pseudospec: eigensolver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
