"""Command line entry point: ``stablevol {check-params,sample,simulate,convergence}``.

Exit codes: 0 success, 1 validation failure, 2 I/O failure, 3 a ``--check``
threshold was missed.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time

from . import __version__
from .analysis import monotonicity_violations, strong_error_experiment
from .config import ConfigError, DEFAULT_ALPHAS, dump_config, load_config, parse_list, parse_step
from .io import emit_csv, format_value, loglog_rows, write_text
from .model import ModelParams, validate
from .sampler import RngStream, StableLaw, sample_standard_array, sample_increment_array
from .scheme import StepWindowError, TimeGrid, simulate_paths

log = logging.getLogger("stablevol")

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_CHECK = 0, 1, 2, 3
SLOPE_BAND = 0.20


def _cmd_check_params(args) -> int:
    params = ModelParams(args.mu, args.lam, args.kappa, args.x0, args.alpha)
    rep = validate(params)
    print(f"C_alpha    = {format_value(rep.c_alpha)}")
    print(f"threshold  = {format_value(rep.threshold)}")
    print(f"delta_max  = {format_value(rep.delta_max)}")
    print(f"jump_floor = {format_value(rep.jump_floor)}  (negative jumps assumed above; not enforced)")
    for name, ok in rep.passes.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return EXIT_OK if rep.all_pass else EXIT_INVALID


def _cmd_sample(args) -> int:
    law = StableLaw(args.alpha, args.beta, args.sigma)
    rng = RngStream(args.seed, 0)
    if args.sigma == 1.0:
        x = sample_standard_array(law, rng, args.n)
    else:
        x = sample_increment_array(law, 1.0, rng, args.n)
    emit_csv(enumerate(x), ["index", "value"], args.out)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    params = ModelParams(args.mu, args.lam, args.kappa, args.x0, args.alpha)
    rep = validate(params)
    if not rep.all_pass:
        raise ConfigError(rep.describe_failures())
    law = StableLaw(args.alpha, args.beta, 1.0)
    grid = TimeGrid(args.delta, args.horizon)
    grid.check_window(params)
    n = grid.n_steps

    def rows():
        for j in range(args.paths):
            inc = sample_increment_array(law, grid.delta, RngStream(args.seed, j), n)
            path = simulate_paths(params, grid, inc[None, :])[0]
            if path.faulted:
                log.warning("trajectory %d hit a non-finite increment", j)
            for k, v in enumerate(path.values):
                yield (j, k, k * grid.delta, v)

    emit_csv(rows(), ["trajectory", "step", "time", "value"], args.out)
    return EXIT_OK


def _gnuplot_script(alphas) -> str:
    lines = [
        "# log-log strong error versus step size",
        "set xlabel 'log10(delta)'",
        "set ylabel 'log10(error)'",
        "set key left top",
    ]
    plots = []
    for a in alphas:
        fn = f"loglog_alpha_{format_value(a)}.dat"
        plots.append(f"'{fn}' using 1:2 with linespoints title 'alpha={format_value(a)}'")
        plots.append(f"'{fn}' using 1:3 with lines dashtype 2 title 'slope 1/alpha'")
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def _cmd_convergence(args) -> int:
    overrides = {
        "mu": args.mu,
        "lam": args.lam,
        "kappa": args.kappa,
        "x0": args.x0,
        "beta": args.beta,
        "alphas": parse_list(args.alpha) if args.alpha else None,
        "deltas": parse_list(args.deltas, parse_step) if args.deltas else None,
        "delta_ref": parse_step(args.ref) if args.ref else None,
        "horizon": args.horizon,
        "q": args.q,
        "m": args.m,
        "seed": args.seed,
        "error_mode": args.error_mode,
        "out": args.out,
    }
    scale = "paper" if args.paper_scale else ("desk" if args.desk_scale else None)
    cfg = load_config(args.config, overrides, preset=args.preset, scale=scale)
    os.makedirs(cfg.out, exist_ok=True)
    # the snapshot omits its own location so reruns into other directories match byte for byte
    write_text(dump_config(cfg, exclude=("out",)), os.path.join(cfg.out, "config.json"))

    slopes, diag = [], []
    failures = []
    for alpha in cfg.alphas:
        t0 = time.perf_counter()
        table = strong_error_experiment(
            cfg.model(alpha), cfg.law(alpha), cfg.deltas, cfg.delta_ref,
            q=cfg.q, m=cfg.m, master_seed=cfg.seed, horizon=cfg.horizon,
            error_mode=cfg.error_mode, workers=args.workers,
        )
        log.info("alpha=%s slope=%.4f target=%.4f (%.1fs)", alpha, table.fitted_slope,
                 table.target_slope, time.perf_counter() - t0)
        tag = format_value(alpha)
        emit_csv(table.rows(), ["delta", "error", "stderr"], os.path.join(cfg.out, f"alpha_{tag}.csv"))
        emit_csv(
            loglog_rows(table.deltas, table.errors, table.target_slope),
            ["log10_delta", "log10_error", "log10_reference"],
            os.path.join(cfg.out, f"loglog_alpha_{tag}.csv"),
        )
        dat = ["# log10_delta log10_error log10_reference"]
        dat += [" ".join(format_value(v) for v in row)
                for row in loglog_rows(table.deltas, table.errors, table.target_slope)]
        write_text("\n".join(dat) + "\n", os.path.join(cfg.out, f"loglog_alpha_{tag}.dat"))
        slopes.append((alpha, table.fitted_slope, table.slope_stderr, table.target_slope))
        for d, f in zip(table.deltas, table.truncation_frequency):
            diag.append((alpha, d, f, table.min_value, table.n_faulted))

        if args.check:
            if not abs(table.fitted_slope - table.target_slope) <= SLOPE_BAND:
                failures.append(f"alpha={tag}: slope {table.fitted_slope:.4f} outside "
                                f"{table.target_slope:.4f} ± {SLOPE_BAND}")
            if monotonicity_violations(table) > 1:
                failures.append(f"alpha={tag}: error not monotone in delta")
            if table.min_value < min(table.deltas[0], table.delta_ref):
                failures.append(f"alpha={tag}: positivity violated")

    emit_csv(slopes, ["alpha", "slope", "stderr", "target"], os.path.join(cfg.out, "slopes.csv"))
    emit_csv(diag, ["alpha", "delta", "truncation_frequency", "min_value", "n_faulted"],
             os.path.join(cfg.out, "diagnostics.csv"))
    write_text(_gnuplot_script(cfg.alphas), os.path.join(cfg.out, "plot.gp"))

    for a, s, se, target in slopes:
        print(f"alpha={format_value(a)}  slope={s:.4f} ± {se:.4f}  target={target:.4f}")
    if failures:
        for f in failures:
            print(f"CHECK FAILED  {f}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="stablevol",
        description="Positivity preserving Euler-Maruyama for the alpha-stable stochastic volatility model.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check-params", help="evaluate the parameter assumptions")
    c.add_argument("--alpha", type=float, required=True)
    c.add_argument("--mu", type=float, required=True)
    c.add_argument("--lambda", dest="lam", type=float, required=True)
    c.add_argument("--kappa", type=float, required=True)
    c.add_argument("--x0", type=float, default=1.0, help="initial value (default 1)")
    c.set_defaults(func=_cmd_check_params)

    s = sub.add_parser("sample", help="draw stable variates to CSV index,value")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--beta", type=float, default=0.0, help="skewness (default 0)")
    s.add_argument("--sigma", type=float, default=1.0, help="scale (default 1)")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_sample)

    m = sub.add_parser("simulate", help="simulate paths to CSV trajectory,step,time,value")
    m.add_argument("--alpha", type=float, required=True)
    m.add_argument("--beta", type=float, default=0.0, help="skewness (default 0)")
    m.add_argument("--mu", type=float, required=True)
    m.add_argument("--lambda", dest="lam", type=float, required=True)
    m.add_argument("--kappa", type=float, required=True)
    m.add_argument("--x0", type=float, default=1.0, help="initial value (default 1)")
    m.add_argument("--delta", type=parse_step, required=True, help="step size, e.g. 2^-10")
    m.add_argument("--horizon", type=float, default=1.0, help="terminal time (default 1)")
    m.add_argument("--paths", type=int, default=3)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--out", required=True)
    m.set_defaults(func=_cmd_simulate)

    v = sub.add_parser(
        "convergence",
        help="strong error table and log-log slope per alpha",
        description=(
            "Defaults: alphas " + ",".join(map(str, DEFAULT_ALPHAS))
            + "; deltas 2^-13..2^-9; ref 2^-15; m 500; q 1; beta 0; T 1; x0 1; seed 0. "
            "A preset brings the published grid (2^-14..2^-10, ref 2^-16, m 1000) unless "
            "--desk-scale is given. Flags override config-file and preset values."
        ),
    )
    v.add_argument("--config", help="JSON config file")
    v.add_argument("--preset", choices=("table1", "table2", "table3"))
    scale = v.add_mutually_exclusive_group()
    scale.add_argument("--paper-scale", action="store_true", help="deltas 2^-14..2^-10, ref 2^-16, m 1000")
    scale.add_argument("--desk-scale", action="store_true", help="deltas 2^-13..2^-9, ref 2^-15, m 500")
    v.add_argument("--alpha", help="comma separated stability indices")
    v.add_argument("--deltas", help="comma separated step sizes, e.g. 2^-10,2^-11")
    v.add_argument("--ref", help="reference step size")
    v.add_argument("--mu", type=float)
    v.add_argument("--lambda", dest="lam", type=float)
    v.add_argument("--kappa", type=float)
    v.add_argument("--x0", type=float)
    v.add_argument("--beta", type=float)
    v.add_argument("--horizon", type=float)
    v.add_argument("--q", type=float)
    v.add_argument("--m", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--error-mode", choices=("terminal", "sup"))
    v.add_argument("--out", help="output directory (default results)")
    v.add_argument("--workers", type=int, default=1, help="trajectory-parallel threads")
    v.add_argument("--check", action="store_true", help="exit 3 if slopes or trends miss their bands")
    v.set_defaults(func=_cmd_convergence)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, StepWindowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
