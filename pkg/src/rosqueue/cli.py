"""Command-line front end for reproducible experiments.

Subcommands: simulate, compare-tails, h-table, lst, heavytraffic,
appendix-d, asym, verify.  Everything is driven by a flat key = value
config file (see :mod:`rosqueue.config`); ``--seed`` and ``--out``
override the config, ``--jobs`` (or the ROSQUEUE_JOBS environment
variable) sets the worker count for parallel grids/replications.

Exit status: 0 on success, 1 when a verification check fails, 2 for
usage or configuration problems.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from rosqueue import asymptotics as asym
from rosqueue import verify as verify_mod
from rosqueue.config import ExperimentConfig, load_config
from rosqueue.desim import simulate
from rosqueue.distributions import ConfigurationError, make_pareto
from rosqueue.desim import StabilityError
from rosqueue.transforms import LstEvaluator


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _write_csv(path: Path, header: str, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if not isinstance(v, str) else v for v in row) + "\n")


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.entries["run.seed"] = str(args.seed)
    if args.out is not None:
        cfg.entries["output.dir"] = args.out
    return cfg


def _jobs(args) -> int:
    env = os.environ.get("ROSQUEUE_JOBS")
    if args.jobs is not None:
        return max(1, args.jobs)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigurationError(f"ROSQUEUE_JOBS={env!r} is not an integer")
    return 1


def _auto_x_grid(cfg: ExperimentConfig, samples: np.ndarray) -> np.ndarray:
    grid = cfg.get("analysis.x_grid")
    if grid is not None:
        return cfg.get_floats("analysis.x_grid")
    n = len(samples)
    levels = np.geomspace(0.3, max(20.0 / n, 1e-4), 25)
    return np.quantile(samples, 1.0 - levels)


# -- simulate ----------------------------------------------------------------


def _replication_job(config_text: str, seed: int, path: str) -> dict:
    from rosqueue.config import ExperimentConfig, parse_config

    cfg = ExperimentConfig(parse_config(config_text))
    run = simulate(cfg.build_model(), cfg.n, cfg.warmup, seed)
    run.to_csv(path)
    return run.summary()


def cmd_simulate(args) -> int:
    cfg = _load(args)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    reps = cfg.replications
    seeds = [cfg.seed + r for r in range(reps)]
    paths = [
        str(out / ("run.csv" if reps == 1 else f"run_{r:03d}.csv"))
        for r in range(reps)
    ]
    jobs = _jobs(args)
    text = cfg.render()
    if jobs > 1 and reps > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(_replication_job, [text] * reps, seeds, paths))
    else:
        for seed, path in zip(seeds, paths):
            _replication_job(text, seed, path)

    # Per-discipline summary on shared arrival/service paths (seed 0th rep).
    rows = []
    model = cfg.build_model()
    for disc in ("fcfs", "ros", "random_insertion"):
        run = simulate(model.with_discipline(disc), cfg.n, cfg.warmup, seeds[0])
        s = run.summary()
        rows.append(
            (disc, s["mean_wait"], s["mean_workload"], str(s["n_busy_periods"]),
             s["little_ratio"])
        )
    _write_csv(
        out / "summary.csv",
        "discipline,mean_wait,mean_workload,n_busy_periods,little_ratio",
        rows,
    )
    print(f"wrote {reps} run file(s) and summary.csv under {out}")
    return 0


# -- compare-tails -----------------------------------------------------------


def cmd_compare_tails(args) -> int:
    cfg = _load(args)
    model = cfg.build_model()
    if model.service.kind != "pareto":
        raise ConfigurationError(
            "compare-tails expects a pareto service law (the tail-ratio "
            f"constant needs the regular-variation index); got {model.service.kind}"
        )
    nu = model.service.params["nu"]
    h = asym.h_constant(model.rho, nu).h
    ros = simulate(model.with_discipline("ros"), cfg.n, cfg.warmup, cfg.seed)
    fcfs = simulate(model.with_discipline("fcfs"), cfg.n, cfg.warmup, cfg.seed)
    xs = _auto_x_grid(cfg, fcfs.wait)
    sr = np.sort(ros.wait)
    sf = np.sort(fcfs.wait)
    rows = []
    for x in xs:
        cr = (len(sr) - np.searchsorted(sr, x, side="right")) / len(sr)
        cf = (len(sf) - np.searchsorted(sf, x, side="right")) / len(sf)
        ratio = cr / cf if cf > 0 else float("nan")
        rows.append((x, cr, cf, ratio, h))
    _write_csv(cfg.out_dir / "compare_tails.csv", "x,ccdf_ros,ccdf_fcfs,ratio,h", rows)
    print(f"wrote compare_tails.csv under {cfg.out_dir} (h = {h:.6f})")
    return 0


# -- h-table -----------------------------------------------------------------


def _h_row(pair: tuple[float, float]) -> tuple[float, float, float]:
    rho, nu = pair
    return rho, nu, asym.h_constant(rho, nu).h


def cmd_h_table(args) -> int:
    rhos = (
        np.asarray([float(t) for t in args.rho_grid.split(",")])
        if args.rho_grid
        else np.minimum(np.linspace(0.0, 1.0, 21), 0.999)
    )
    nus = (
        np.asarray([float(t) for t in args.nu_grid.split(",")])
        if args.nu_grid
        else np.linspace(1.0, 2.0, 21)
    )
    pairs = [(float(r), float(n)) for r in rhos for n in nus]
    jobs = _jobs(args)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_h_row, pairs, chunksize=16))
    else:
        rows = [_h_row(p) for p in pairs]
    out = Path(args.out or "out")
    _write_csv(out / "h_table.csv", "rho,nu,h", rows)
    hmin = min(r[2] for r in rows)
    print(f"wrote h_table.csv under {out} ({len(rows)} rows, min h = {hmin:.6f})")
    return 0


# -- lst ---------------------------------------------------------------------


def cmd_lst(args) -> int:
    cfg = _load(args)
    ev = LstEvaluator(cfg.build_model())
    s_grid = cfg.get_floats("analysis.s_grid", [0.1, 1.0, 10.0])
    rows = []
    for s in s_grid:
        s = float(s)
        rows.append(
            (s, ev.wait_lst_ros(s), ev.wait_lst_fcfs(s), ev.busy_lst(s), ev.epsilon(s))
        )
    _write_csv(cfg.out_dir / "lst.csv", "s,wait_lst_ros,wait_lst_fcfs,mu,epsilon", rows)
    print(f"wrote lst.csv under {cfg.out_dir}")
    return 0


# -- heavytraffic ------------------------------------------------------------


def cmd_heavytraffic(args) -> int:
    cfg = _load(args)
    model = cfg.build_model().with_discipline("ros")
    lam = 1.0 / model.arrival.mean
    svc = model.service
    run = simulate(model, cfg.n, cfg.warmup, cfg.seed)
    if np.isfinite(svc.variance):
        delta = asym.delta_light(model.rho, svc.variance, lam)
        chk = asym.ht_limit_check(delta * run.wait)
        rows = list(zip(chk["x"], chk["empirical"], chk["theoretical"],
                        np.abs(chk["empirical"] - chk["theoretical"])))
        _write_csv(cfg.out_dir / "heavytraffic.csv",
                   "x,empirical_ccdf,limit_ccdf,abs_deviation", rows)
    else:
        nu = svc.params["nu"]
        spec = make_pareto(nu, svc.params["x_m"])[1]
        delta = asym.delta_heavy(model.rho, nu, spec.bingham_C, lam)
        omegas = cfg.get_floats("analysis.omega_grid", [0.5, 1.0, 2.0])
        chk = asym.ht_limit_check(delta * run.wait, nu=nu, omegas=omegas)
        rows = list(zip(chk["omega"], chk["empirical"], chk["theoretical"],
                        np.abs(chk["empirical"] - chk["theoretical"])))
        _write_csv(cfg.out_dir / "heavytraffic.csv",
                   "omega,empirical_lst,limit_lst,abs_deviation", rows)
    print(
        f"wrote heavytraffic.csv under {cfg.out_dir} "
        f"(delta = {delta:.6g}, max deviation = {chk['max_abs_deviation']:.4f})"
    )
    return 0


# -- appendix-d --------------------------------------------------------------


def cmd_appendix_d(args) -> int:
    cfg = _load(args)
    model = cfg.build_model()
    c = args.c if args.c is not None else 1.0 - model.rho
    rep = asym.appendix_d_check(c, args.x, model, replications=args.replications,
                                seed=cfg.seed)
    rows = [(k, v) for k, v in rep.items()]
    _write_csv(cfg.out_dir / "appendix_d.csv", "quantity,value", rows)
    print(f"wrote appendix_d.csv under {cfg.out_dir}")
    return 0


# -- asym --------------------------------------------------------------------

_CURVES = {
    "wros-rv": ("ros", "wait"),
    "wfcfs": ("fcfs", "wait"),
    "busy-period": (None, "bp_length"),
    "residual-busy": (None, "z_rp"),
    "residual-service": (None, "b_rp"),
}


def cmd_asym(args) -> int:
    cfg = _load(args)
    model = cfg.build_model()
    discipline, field = _CURVES[args.curve]
    if discipline is not None:
        model = model.with_discipline(discipline)
    run = simulate(model, cfg.n, cfg.warmup, cfg.seed)
    samples = getattr(run, field)
    if args.curve == "wros-rv":
        h = asym.h_constant(model.rho, model.service.params["nu"]).h
        formula = lambda x: float(asym.wros_tail_rv(x, model, h=h))
    elif args.curve == "wfcfs":
        formula = lambda x: float(asym.wfcfs_tail(x, model))
    elif args.curve == "busy-period":
        formula = lambda x: float(asym.busy_period_tail(x, model))
    elif args.curve == "residual-busy":
        formula = lambda x: float(asym.residual_busy_tail(x, model))
    else:
        formula = lambda x: float(asym.residual_service_tail(x, model))
    xs = _auto_x_grid(cfg, samples)
    sorted_s = np.sort(samples)
    n = len(sorted_s)
    eps = np.sqrt(np.log(2.0 / (1.0 - cfg.confidence)) / (2.0 * n))
    rows = []
    for x in xs:
        emp = (n - np.searchsorted(sorted_s, x, side="right")) / n
        f = formula(float(x))
        rows.append(
            (x, f, emp, emp / f if f > 0 else float("nan"),
             max(0.0, emp - eps), min(1.0, emp + eps))
        )
    _write_csv(cfg.out_dir / f"asym_{args.curve}.csv",
               "x,formula_value,empirical_value,ratio,ci_lo,ci_hi", rows)
    print(f"wrote asym_{args.curve}.csv under {cfg.out_dir}")
    return 0


# -- verify ------------------------------------------------------------------


def cmd_verify(args) -> int:
    ok = verify_mod.run_all()
    print("all checks passed" if ok else "some checks FAILED")
    return 0 if ok else 1


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rosqueue",
        description="Queueing experiments: random order of service tails",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, with_config=True, **kwargs):
        sp = sub.add_parser(name, **kwargs)
        if with_config:
            sp.add_argument("--config", required=True, help="experiment config file")
        sp.add_argument("--seed", type=int, default=None, help="override run.seed")
        sp.add_argument("--out", default=None, help="override output directory")
        sp.add_argument("--jobs", type=int, default=None,
                        help="parallel workers (or ROSQUEUE_JOBS)")
        sp.set_defaults(func=func)
        return sp

    add("simulate", cmd_simulate, help="run the configured model, write CSV + summary")
    add("compare-tails", cmd_compare_tails,
        help="ROS vs FCFS tail ratio on shared sample paths")
    sp = add("h-table", cmd_h_table, with_config=False,
             help="tabulate the tail-ratio constant h(rho, nu)")
    sp.add_argument("--rho-grid", default=None, help="comma list of rho values")
    sp.add_argument("--nu-grid", default=None, help="comma list of nu values")
    add("lst", cmd_lst, help="waiting-time transforms on the s grid")
    add("heavytraffic", cmd_heavytraffic,
        help="scaled waits against the heavy-traffic limit law")
    sp = add("appendix-d", cmd_appendix_d,
             help="deterministic-arrival reduction cross-check")
    sp.add_argument("--c", type=float, default=None, help="slope c (default 1-rho)")
    sp.add_argument("--x", type=float, default=1e3, help="tail abscissa")
    sp.add_argument("--replications", type=int, default=64)
    sp = add("asym", cmd_asym, help="asymptotic curve vs simulated tail")
    sp.add_argument("--curve", choices=sorted(_CURVES), default="wros-rv")
    add("verify", cmd_verify, with_config=False,
        help="run the full invariant suite, one PASS/FAIL line per check")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, StabilityError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
