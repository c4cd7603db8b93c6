"""Command-line entry point: ``grbm-mf {sweep,inspect,check,gibbs-check}``.

Exit codes: 0 success, 1 invariant violation, 2 usage error, 3 capacity error.
``GRBM_MF_WORKERS`` sets the default number of worker processes for sweeps.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from grbm_mf.exact import CapacityError, exact_moments, gibbs_estimate
from grbm_mf.experiments import (
    DEFAULT_GRID,
    FE_COLUMNS,
    MODES,
    MSE_COLUMNS,
    VARY,
    SweepSpec,
    run_sweep,
    run_trial,
)
from grbm_mf.meanfield import SolverOptions, kld_gap, solve_type1, solve_type2
from grbm_mf.model import GrbmParams, SampleSpace, marginalize, sample_params

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_CAPACITY = 0, 1, 2, 3


def _space(text: str) -> SampleSpace:
    try:
        return SampleSpace.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _grid(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad sd grid {text!r}") from None


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return n


def _default_workers() -> int:
    raw = os.environ.get("GRBM_MF_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("solver")
    g.add_argument("--damping", type=float, default=0.5)
    g.add_argument("--tol", type=float, default=1e-10)
    g.add_argument("--max-iter", type=_positive_int, default=10000)
    g.add_argument("--restarts", type=_positive_int, default=5)
    g.add_argument("--init-scale", type=float, default=1.0)


def _add_model_flags(p: argparse.ArgumentParser, n_visible=24, n_hidden=12, sd=0.1) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--n-visible", type=_positive_int, default=n_visible)
    g.add_argument("--n-hidden", type=_positive_int, default=n_hidden)
    g.add_argument("--space", type=_space, default=SampleSpace.binary(),
                   help="binary, ternary or custom:v1,v2,...")
    g.add_argument("--sigma2", type=float, default=1.0)
    g.add_argument("--sd-b", type=float, default=sd)
    g.add_argument("--sd-c", type=float, default=sd)
    g.add_argument("--sd-w", type=float, default=sd)


def _solver_opts(args, seed=0) -> SolverOptions:
    return SolverOptions(
        damping=args.damping,
        tol=args.tol,
        max_iter=args.max_iter,
        n_restarts=args.restarts,
        init_scale=args.init_scale,
        seed=seed,
    )


def _params(args, seed) -> GrbmParams:
    return sample_params(
        args.n_visible, args.n_hidden, args.sd_b, args.sd_c, args.sd_w, args.sigma2, args.space, seed
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="grbm-mf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="average free energies or MSEs over a parameter-SD grid")
    p.add_argument("--mode", choices=MODES, default="free-energy")
    p.add_argument("--vary", choices=VARY, default="w")
    p.add_argument("--space", type=_space, default=SampleSpace.binary())
    p.add_argument("--sd-grid", type=_grid, default=DEFAULT_GRID)
    p.add_argument("--fixed-sd", type=float, default=0.1)
    p.add_argument("--n-visible", type=_positive_int, default=24)
    p.add_argument("--n-hidden", type=_positive_int, default=12)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--trials", type=_positive_int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strict", action="store_true", help="exclude unconverged trials from averages")
    p.add_argument("--workers", type=_positive_int, default=_default_workers())
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=("csv", "tsv"), default="csv")
    p.add_argument("--quiet", action="store_true")
    _add_solver_flags(p)

    p = sub.add_parser("inspect", help="show one random instance and all three inference results")
    p.add_argument("--seed", type=int, default=0)
    _add_model_flags(p, n_visible=6, n_hidden=4, sd=0.3)
    _add_solver_flags(p)

    p = sub.add_parser("check", help="verify the free-energy bound chain on random instances")
    p.add_argument("--instances", type=_positive_int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bound-tol", type=float, default=1e-9)
    p.add_argument("--exact-tol", type=float, default=1e-10)
    _add_model_flags(p)
    _add_solver_flags(p)

    p = sub.add_parser("gibbs-check", help="compare block Gibbs estimates with exact moments")
    p.add_argument("--sweeps", type=_positive_int, default=100_000)
    p.add_argument("--burnin", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-se", type=float, default=3.0, help="allowed deviation in standard errors")
    p.add_argument("--min-fraction", type=float, default=0.95)
    _add_model_flags(p, n_visible=6, n_hidden=4, sd=0.3)
    return parser


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_rows(rows, mode: str, stream, delimiter: str = ",") -> None:
    writer = csv.writer(stream, delimiter=delimiter, lineterminator="\n")
    writer.writerow(FE_COLUMNS if mode == "free-energy" else MSE_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(x) for x in row.values(mode)])


def cmd_sweep(args) -> int:
    spec = SweepSpec(
        mode=args.mode,
        vary=args.vary,
        sd_grid=args.sd_grid,
        fixed_sd=args.fixed_sd,
        n_visible=args.n_visible,
        n_hidden=args.n_hidden,
        space=args.space,
        trials=args.trials,
        sigma2_value=args.sigma2,
        solver=_solver_opts(args),
        seed=args.seed,
        strict=args.strict,
        workers=args.workers,
    )

    def progress(row):
        if not args.quiet:
            print(f"sd={row.sd:g}: {row.n_trials} trials, {row.n_unconverged} unconverged", file=sys.stderr)

    rows = run_sweep(spec, progress)
    delim = "," if args.format == "csv" else "\t"
    if args.out == "-":
        write_rows(rows, args.mode, sys.stdout, delim)
    else:
        with open(args.out, "w", newline="") as fh:
            write_rows(rows, args.mode, fh, delim)
    return EXIT_OK


def _vec(x) -> str:
    return np.array2string(np.asarray(x), precision=6, suppress_small=True, max_line_width=100)


def cmd_inspect(args) -> int:
    params = _params(args, args.seed)
    mbm = marginalize(params)
    opts = _solver_opts(args, seed=args.seed)
    ex, s1, s2 = run_trial(params, opts)
    out = sys.stdout
    print(f"GRBM |V|={params.n_visible} |H|={params.n_hidden} space={params.space.label()}", file=out)
    print(f"b      = {_vec(params.b)}", file=out)
    print(f"c      = {_vec(params.c)}", file=out)
    print(f"sigma2 = {_vec(params.sigma2)}", file=out)
    print(f"w      =\n{_vec(params.w)}", file=out)
    print("marginal Boltzmann machine:", file=out)
    print(f"B      = {_vec(mbm.B)}", file=out)
    print(f"D      = {_vec(mbm.D)}", file=out)
    print(f"J      =\n{_vec(mbm.J)}", file=out)
    print(f"ln zH  = {mbm.log_zH:.12g}", file=out)
    print("", file=out)
    print(f"{'':10s}{'exact':>20s}{'type I':>20s}{'type II':>20s}", file=out)
    print(f"{'F':10s}{ex.free_energy:20.12f}{s1.free_energy:20.12f}{s2.free_energy:20.12f}", file=out)
    print(f"{'KLD gap':10s}{0.0:20.12f}{kld_gap(s1.free_energy, ex.free_energy):20.12f}"
          f"{kld_gap(s2.free_energy, ex.free_energy):20.12f}", file=out)
    for j in range(params.n_hidden):
        print(f"{'<h_%d>' % j:10s}{ex.m_exact[j]:20.12f}{s1.m[j]:20.12f}{s2.m[j]:20.12f}", file=out)
    for i in range(params.n_visible):
        print(f"{'<v_%d>' % i:10s}{ex.nu_exact[i]:20.12f}{s1.nu[i]:20.12f}{s2.nu[i]:20.12f}", file=out)
    for name, s in (("type I", s1), ("type II", s2)):
        print(f"{name}: converged={s.converged} iterations={s.iterations} residual={s.residual:.3g}", file=out)
    return EXIT_OK


def cmd_check(args) -> int:
    n = args.instances
    chain_ok = kld_ok = exact_ok = unconverged = 0
    for k in range(n):
        param_seed, solver_seed = np.random.SeedSequence([args.seed, k]).generate_state(2)
        params = _params(args, int(param_seed))
        opts = _solver_opts(args, seed=int(solver_seed))
        ex, s1, s2 = run_trial(params, opts)
        f = ex.free_energy
        if not (s1.converged and s2.converged):
            unconverged += 1
        else:
            f1, f2 = s1.free_energy, s2.free_energy
            chain_ok += f1 >= f2 - args.bound_tol and f2 >= f - args.bound_tol
            kld_ok += kld_gap(f1, f) >= kld_gap(f2, f) - args.bound_tol

        # exactness cases built from the same instance
        flat = params.replace(w=np.zeros_like(params.w))
        f_flat = exact_moments(flat).free_energy
        single = params.replace(c=params.c[:1], w=params.w[:, :1])
        ex_single = exact_moments(single)
        t2_single = solve_type2(single, opts)
        errs = [
            abs(solve_type1(flat, opts).free_energy - f_flat),
            abs(solve_type2(flat, opts).free_energy - f_flat),
            abs(t2_single.free_energy - ex_single.free_energy),
            float(np.max(np.abs(t2_single.m - ex_single.m_exact))),
        ]
        exact_ok += max(errs) <= args.exact_tol

    converged = n - unconverged
    print(f"{chain_ok}/{converged} instances: F1 >= F2 >= F")
    print(f"{kld_ok}/{converged} instances: KLD1 >= KLD2")
    print(f"{exact_ok}/{n} instances: exact at w=0 and |H|=1")
    print(f"{unconverged}/{n} instances: solver did not converge")
    ok = chain_ok == converged and kld_ok == converged and exact_ok == n
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_gibbs_check(args) -> int:
    params = _params(args, args.seed)
    ex = exact_moments(params)
    est = gibbs_estimate(params, args.sweeps, args.burnin, seed=args.seed)
    within = 0
    rows = [("h", j, ex.m_exact[j], est.m_hat[j], est.std_err_m[j]) for j in range(params.n_hidden)]
    rows += [("v", i, ex.nu_exact[i], est.nu_hat[i], est.std_err_nu[i]) for i in range(params.n_visible)]
    print(f"{'unit':8s}{'exact':>16s}{'gibbs':>16s}{'std err':>12s}{'z':>8s}")
    for layer, idx, exact, hat, se in rows:
        z = (hat - exact) / se if se > 0 else (0.0 if hat == exact else np.inf)
        within += abs(z) <= args.n_se
        print(f"{layer}_{idx:<6d}{exact:16.8f}{hat:16.8f}{se:12.2e}{z:8.2f}")
    frac = within / len(rows)
    print(f"{within}/{len(rows)} components within {args.n_se:g} standard errors")
    return EXIT_OK if frac >= args.min_fraction else EXIT_VIOLATION


COMMANDS = {"sweep": cmd_sweep, "inspect": cmd_inspect, "check": cmd_check, "gibbs-check": cmd_gibbs_check}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except CapacityError as e:
        print(f"grbm-mf: capacity error: {e}", file=sys.stderr)
        return EXIT_CAPACITY
    except ValueError as e:
        print(f"grbm-mf: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
