"""Command-line entry point.

Every subcommand writes one CSV (to ``--out`` or standard output) whose
first line is ``# config: {...}`` with the full resolved configuration.
Exit codes: 0 success, 1 invalid arguments, 2 solver failure.
"""
import argparse
from dataclasses import dataclass, asdict, field
import json
import os
import sys

from .discretization import StencilSet, check_alpha_h
from .experiments import (
    BlowupRow,
    ConcentrationRow,
    ConvergenceRow,
    SweepRow,
    blowup_profile,
    comparison_sanity,
    concentration_profile,
    convergence_study,
    grid_for,
    liouville_check,
    resolution_rule,
    rows_to_csv,
    sweep_alpha,
)
from .mesh import Domain, build_grid, field_to_csv
from .operator_core import PucciPair
from .oracles import oracle_interval, oracle_rectangle_linear
from .solver import ConvergenceError, ShiftTooSmallError, SolverConfig, principal_eigen

__all__ = ["RunConfig", "build_parser", "run", "main"]

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for solver failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class RunConfig:
    subcommand: str
    domain: str = "interval"
    lengths: tuple = (1.0,)
    a: float = 1.0
    A: float = 4.0
    alpha: float = None
    alphas: tuple = None
    nx: int = None
    ny: int = None
    alpha_h: float = 0.1
    base: int = 64
    mode: str = "positive"
    stencil: str = "default"
    tol_lambda: float = 1e-8
    tol_residual: float = 1e-10
    max_power_iters: int = 5000
    init: str = "ones"
    seed: int = 0
    out: str = None
    extra: dict = field(default_factory=dict)

    def to_json(self):
        d = asdict(self)
        d.pop("out")
        return json.dumps(d, sort_keys=True, separators=(",", ":"))


def _float_list(text):
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _int_list(text):
    try:
        vals = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _common(p, solver=True):
    p.add_argument("--domain", choices=("interval", "rectangle"), default="interval")
    p.add_argument("--L", type=float, default=1.0, help="interval length")
    p.add_argument("--Lx", type=float, default=None)
    p.add_argument("--Ly", type=float, default=None)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--A", type=float, default=4.0)
    p.add_argument("--out", default=None, help="output CSV path (default: standard output)")
    p.add_argument("--dump-config", action="store_true", help="print the resolved configuration and exit")
    if solver:
        p.add_argument("--stencil", choices=("default", "wide"), default="default")
        p.add_argument("--tol-lambda", type=float, default=1e-8)
        p.add_argument("--tol-residual", type=float, default=1e-10)
        p.add_argument("--max-power-iters", type=int, default=5000)
        p.add_argument("--init", choices=("ones", "random"), default="ones")
        p.add_argument("--seed", type=int, default=0)


def _resolution(p):
    p.add_argument("--nx", type=int, default=None)
    p.add_argument("--ny", type=int, default=None)
    p.add_argument("--alpha-h", type=float, default=0.1, help="target alpha*h when --nx is not given")
    p.add_argument("--base", type=int, default=64, help="base node count of the resolution rule")


def build_parser():
    parser = _Parser(prog="pucci-robin", description="Principal demi-eigenvalues of Pucci operators with Robin data.")
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("eigen", help="solve one principal eigenpair and dump the eigenfunction")
    _common(p)
    _resolution(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--mode", choices=("positive", "negative"), default="positive")

    p = sub.add_parser("oracle", help="closed-form eigenvalues")
    _common(p, solver=False)
    p.add_argument("--alpha", type=float, required=True)

    p = sub.add_parser("sweep", help="both eigenvalues over a list of alphas")
    _common(p)
    p.add_argument("--alphas", type=_float_list, required=True)
    p.add_argument("--alpha-h", type=float, default=0.1)
    p.add_argument("--base", type=int, default=64)

    p = sub.add_parser("convergence", help="eigenvalue against grid size")
    _common(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--resolutions", type=_int_list, required=True)
    p.add_argument("--mode", choices=("positive", "negative"), default="positive")

    p = sub.add_parser("concentration", help="sup of the eigenfunction away from the boundary")
    _common(p)
    _resolution(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--deltas", type=_float_list, default=(0.0, 0.1, 0.2, 0.25, 0.3, 0.4))
    p.add_argument("--mode", choices=("positive", "negative"), default="positive")

    p = sub.add_parser("blowup", help="boundary-layer profile against exp(-t)")
    _common(p)
    _resolution(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--t-max", type=float, default=2.0)
    p.add_argument("--mode", choices=("positive", "negative"), default="positive")

    p = sub.add_parser("liouville", help="truncated half-line problem against the exact profile")
    _common(p, solver=False)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--T", type=float, default=10.0)
    p.add_argument("--n", type=int, default=2000)
    return parser


def _config(ns):
    if ns.domain == "interval":
        lengths = (ns.L,)
    else:
        Lx = ns.Lx if ns.Lx is not None else ns.L
        Ly = ns.Ly if ns.Ly is not None else Lx
        lengths = (Lx, Ly)
    cfg = RunConfig(subcommand=ns.subcommand, domain=ns.domain, lengths=lengths, a=ns.a, A=ns.A, out=ns.out)
    for name in ("alpha", "alphas", "nx", "ny", "alpha_h", "base", "mode", "stencil", "tol_lambda",
                 "tol_residual", "max_power_iters", "init", "seed"):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    for name in ("resolutions", "deltas", "t_max", "gamma", "T", "n"):
        if hasattr(ns, name):
            v = getattr(ns, name)
            cfg.extra[name] = list(v) if isinstance(v, tuple) else v
    if cfg.alphas is not None:
        cfg.alphas = tuple(cfg.alphas)
    return cfg


def _validate(cfg):
    """Build the typed inputs, raising ValueError before any solve."""
    pair = PucciPair(cfg.a, cfg.A)
    domain = Domain(cfg.domain, cfg.lengths)
    alphas = cfg.alphas if cfg.alphas is not None else ((cfg.alpha,) if cfg.alpha is not None else ())
    for al in alphas:
        if not al >= 0:
            raise ValueError(f"alpha must be nonnegative, got {al}")
    if cfg.alpha_h is not None and not 0 < cfg.alpha_h < 1:
        raise ValueError(f"--alpha-h must lie in (0, 1), got {cfg.alpha_h}")
    for name in ("tol_lambda", "tol_residual"):
        if not getattr(cfg, name) > 0:
            raise ValueError(f"--{name.replace('_', '-')} must be positive")
    if cfg.max_power_iters < 1:
        raise ValueError("--max-power-iters must be at least 1")
    return pair, domain


def _solver_cfg(cfg):
    return SolverConfig(
        tol_lambda=cfg.tol_lambda,
        tol_residual=cfg.tol_residual,
        max_power_iters=cfg.max_power_iters,
        init=cfg.init,
        seed=cfg.seed,
        alpha_h_limit=max(0.1, cfg.alpha_h),
    )


def _grid(cfg, domain):
    if cfg.nx is not None:
        if domain.dim == 1:
            if cfg.ny not in (None, 1):
                raise ValueError("--ny applies to rectangles only")
            return build_grid(domain, cfg.nx)
        ny = cfg.ny if cfg.ny is not None else int(round((cfg.nx - 1) * domain.lengths[1] / domain.lengths[0])) + 1
        return build_grid(domain, cfg.nx, ny)
    n = resolution_rule(cfg.alpha_h, cfg.base)(cfg.alpha, domain.min_length)
    return grid_for(domain, n)


def _stencils(cfg, dim):
    return StencilSet.default(dim, wide=cfg.stencil == "wide")


def _eigen(cfg, pair, domain):
    grid = _grid(cfg, domain)
    check_alpha_h(grid, cfg.alpha)
    r = principal_eigen(cfg.mode, pair, cfg.alpha, grid, _stencils(cfg, grid.dim), _solver_cfg(cfg))
    comments = [
        f"lambda={r.lam:.17g}",
        f"cw_lo={r.cw_lo:.17g} cw_hi={r.cw_hi:.17g}",
        f"power_iters={r.power_iters} howard_iters={r.howard_iters_total}",
        f"interior_residual={r.interior_residual:.17g} boundary_residual={r.boundary_residual:.17g}",
    ]
    return field_to_csv(r.u, comments)


def _oracle(cfg, pair, domain):
    if not cfg.alpha > 0:
        raise ValueError("oracles need alpha > 0")
    lines = ["which,lambda,mu_root"]
    if domain.kind == "interval":
        for which in ("plus", "minus"):
            o = oracle_interval(pair, cfg.alpha, domain.lengths[0], which)
            lines.append(f"{which},{o.lam:.17g},{o.mu_root:.17g}")
    else:
        if pair.a != pair.A:
            raise ValueError("rectangle oracle exists only for a == A")
        lam = oracle_rectangle_linear(cfg.alpha, *domain.lengths, sigma=pair.A)
        lines.append(f"linear,{lam:.17g},")
    return "\n".join(lines) + "\n"


def _sweep(cfg, pair, domain):
    rows = sweep_alpha(domain, pair, cfg.alphas, resolution_rule(cfg.alpha_h, cfg.base), _solver_cfg(cfg),
                       _stencils(cfg, domain.dim))
    return rows_to_csv(rows, SweepRow)


def _convergence(cfg, pair, domain):
    res = cfg.extra["resolutions"]
    if min(res) < 3:
        raise ValueError("resolutions must be at least 3")
    coarse = grid_for(domain, min(res))
    if cfg.alpha * coarse.h > 0.1:
        raise ValueError(f"alpha*h = {cfg.alpha * coarse.h:.4g} > 0.1 at the coarsest resolution")
    rows = convergence_study(domain, pair, cfg.alpha, res, _solver_cfg(cfg), cfg.mode, _stencils(cfg, domain.dim))
    return rows_to_csv(rows, ConvergenceRow)


def _concentration(cfg, pair, domain):
    grid = _grid(cfg, domain)
    check_alpha_h(grid, cfg.alpha)
    r = principal_eigen(cfg.mode, pair, cfg.alpha, grid, _stencils(cfg, grid.dim), _solver_cfg(cfg))
    return rows_to_csv(concentration_profile(r, grid, cfg.extra["deltas"]), ConcentrationRow)


def _blowup(cfg, pair, domain):
    if not cfg.alpha > 0:
        raise ValueError("blow-up needs alpha > 0")
    if cfg.extra["t_max"] / cfg.alpha >= 0.5 * domain.min_length:
        raise ValueError("t-max/alpha must stay below the domain half-width")
    grid = _grid(cfg, domain)
    check_alpha_h(grid, cfg.alpha)
    r = principal_eigen(cfg.mode, pair, cfg.alpha, grid, _stencils(cfg, grid.dim), _solver_cfg(cfg))
    return rows_to_csv(blowup_profile(r, grid, cfg.alpha, cfg.extra["t_max"]), BlowupRow)


def _liouville(cfg, pair, domain):
    g, T, n = cfg.extra["gamma"], cfg.extra["T"], cfg.extra["n"]
    if n < 3:
        raise ValueError("--n must be at least 3")
    res = liouville_check(pair, g, T, n)
    ordered = comparison_sanity(pair, g, T, n)
    lines = [
        "sup_error,boundary_value,exact_boundary_value,comparison_ok",
        f"{res.sup_error:.17g},{res.boundary_value:.17g},{res.exact_boundary_value:.17g},{ordered}",
    ]
    return "\n".join(lines) + "\n"


_HANDLERS = {
    "eigen": _eigen,
    "oracle": _oracle,
    "sweep": _sweep,
    "convergence": _convergence,
    "concentration": _concentration,
    "blowup": _blowup,
    "liouville": _liouville,
}


def run(argv=None):
    """Parse ``argv``, execute the subcommand and return the exit code."""
    try:
        ns = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_INVALID
    cfg = _config(ns)
    if ns.dump_config:
        print(cfg.to_json())
        return EXIT_OK
    try:
        pair, domain = _validate(cfg)
        body = _HANDLERS[cfg.subcommand](cfg, pair, domain)
    except (ShiftTooSmallError, ConvergenceError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    text = f"# config: {cfg.to_json()}\n" + body
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader closed early (e.g. piped into head); not an error of ours
            sys.stdout = open(os.devnull, "w")
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
