"""Self-contained invariant suite behind the ``verify`` CLI command.

Each check re-derives one of the library's structural invariants at a
scale small enough for a release gate (the full-scale statistical
validations live in the acceptance test suite).  A check returns
(passed, measured-detail); the runner prints one line per check.
"""

from __future__ import annotations

import math

import numpy as np

from rosqueue import asymptotics as asym
from rosqueue import desim, distributions, numerics, transforms

CheckResult = tuple[bool, str]


def _pareto_model(rho: float, discipline: str = "fcfs") -> desim.QueueModel:
    svc, _ = distributions.make_pareto(1.5, 1.0)
    return desim.QueueModel(
        distributions.make_exponential(rho / svc.mean), svc, discipline
    )


def _mm1(rho: float, discipline: str = "fcfs") -> desim.QueueModel:
    return desim.QueueModel(
        distributions.make_exponential(rho),
        distributions.make_exponential(1.0),
        discipline,
    )


# -- numerics ----------------------------------------------------------------


def check_quadrature_linearity() -> CheckResult:
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(20):
        c1, c2 = rng.normal(size=(2, 4))
        f = lambda t: c1[0] + c1[1] * t + c1[2] * t**2 + c1[3] * t**3
        g = lambda t: c2[0] + c2[1] * t + c2[2] * t**2 + c2[3] * t**3
        a, b = sorted(rng.uniform(-2, 2, size=2) + [0.0, 1.0])
        al, be = rng.normal(size=2)
        lhs = numerics.integrate_adaptive(lambda t: al * f(t) + be * g(t), a, b, 1e-12)
        rf = numerics.integrate_adaptive(f, a, b, 1e-12)
        rg = numerics.integrate_adaptive(g, a, b, 1e-12)
        bound = 2 * (abs(al) * rf.error_estimate + abs(be) * rg.error_estimate
                     + lhs.error_estimate)
        worst = max(worst, abs(lhs.value - al * rf.value - be * rg.value) - bound)
    return worst <= 0.0, f"max excess over combined error bounds {worst:.2e}"


def check_gamma_recurrence() -> CheckResult:
    xs = np.arange(0.6, 5.01, 0.2)
    rel = max(
        abs(numerics.gamma_fn(x + 1) - x * numerics.gamma_fn(x)) / numerics.gamma_fn(x + 1)
        for x in xs
    )
    return rel <= 1e-10, f"max relative recurrence defect {rel:.2e}"


def check_bessel_monotone() -> CheckResult:
    xs = np.geomspace(1e-6, 50, 200)
    vals = [numerics.bessel_k1(x) for x in xs]
    ok = all(a > b for a, b in zip(vals, vals[1:]))
    return ok, "K1 strictly decreasing on log grid [1e-6, 50]"


def check_root_residual() -> CheckResult:
    worst = 0.0
    for f, lo, hi in [
        (lambda x: x - 0.5, 0.0, 1.0),
        (lambda x: x**0.5 - 0.1, 0.0, 1.0),
        (lambda x: math.cos(x) - x, 0.0, 1.0),
    ]:
        r = numerics.find_root_bracketed(f, lo, hi, tol=1e-12)
        worst = max(worst, abs(r.residual))
    return worst <= 1e-12, f"max |f(root)| = {worst:.2e}"


# -- distributions -----------------------------------------------------------


def check_forward_tail_closed_form() -> CheckResult:
    d, _ = distributions.make_pareto(1.5, 1.0)
    worst = 0.0
    for x in np.geomspace(1.0, 1e6, 13):
        quad = (
            numerics.integrate_semi_infinite(d.tail, float(x), 1e-12, scale=1 + x).value
            / d.mean
        )
        worst = max(worst, abs(quad - float(distributions.forward_tail(d, x))))
    return worst <= 1e-9, f"max |closed - quadrature| = {worst:.2e}"


def check_lst_consistency() -> CheckResult:
    worst = 0.0
    d, _ = distributions.make_pareto(1.5, 1.0)
    w = distributions.make_weibull(0.5, 1.0)
    for s in (0.01, 0.1, 1.0):
        quad = numerics.integrate_semi_infinite(
            lambda z: np.exp(-s * z) * d.density(z), 1.0, 1e-12
        ).value
        worst = max(worst, abs(quad - float(d.lst(s))))
        by_tail = 1.0 - s * numerics.integrate_semi_infinite(
            lambda z: np.exp(-s * z) * w.tail(z), 0.0, 1e-12, scale=w.mean
        ).value
        worst = max(worst, abs(by_tail - float(w.lst(s))))
    return worst <= 1e-7, f"max closed-vs-quadrature gap {worst:.2e}"


def check_bingham_doney_ratio() -> CheckResult:
    d, spec = distributions.make_pareto(1.5, 1.0)
    ratios = []
    for s in (1e-2, 1e-3, 1e-4):
        num = float(d.lst(s)) - 1.0 + d.mean * s
        ratios.append(num / (spec.bingham_C * s**1.5))
    ok = abs(ratios[-1] - 1.0) <= 0.05
    return ok, f"ratio at s=1e-4: {ratios[-1]:.4f} (path {np.round(ratios, 4)})"


def check_sampler_ks() -> CheckResult:
    rng = np.random.default_rng(7)
    worst = 0.0
    for d in [
        distributions.make_pareto(1.5, 1.0)[0],
        distributions.make_exponential(1.0),
        distributions.make_weibull(0.5, 1.0),
    ]:
        x = np.sort(d.sampler(rng, 100_000))
        cdf = 1.0 - np.asarray(d.tail(x))
        n = len(x)
        emp_hi = np.arange(1, n + 1) / n
        emp_lo = np.arange(0, n) / n
        dist = max(np.max(np.abs(emp_hi - cdf)), np.max(np.abs(cdf - emp_lo)))
        worst = max(worst, dist)
    crit = 1.628 / math.sqrt(100_000)  # one-sample KS, 1% level
    return worst <= crit, f"max KS {worst:.5f} vs 1% critical {crit:.5f}"


def check_mean_from_tail() -> CheckResult:
    worst = 0.0
    for d in [
        distributions.make_pareto(1.5, 1.0)[0],
        distributions.make_exponential(2.0),
        distributions.make_weibull(0.5, 1.0),
    ]:
        quad = numerics.integrate_semi_infinite(d.tail, 0.0, 1e-9, scale=d.mean).value
        worst = max(worst, abs(quad / d.mean - 1.0))
    return worst <= 1e-6, f"max relative mean defect {worst:.2e}"


# -- desim -------------------------------------------------------------------


def check_pathwise_invariance() -> CheckResult:
    runs = [
        desim.simulate(_pareto_model(0.7, disc), 20_000, warmup=100, seed=5)
        for disc in ("fcfs", "ros", "random_insertion")
    ]
    a = runs[0]
    same = all(
        np.array_equal(a.workload, r.workload)
        and np.array_equal(a.z_rp, r.z_rp)
        and np.array_equal(a.bp_length, r.bp_length)
        and np.array_equal(a.bp_customers, r.bp_customers)
        for r in runs[1:]
    )
    return same, "workload, residual busy period, busy periods bit-equal"


def check_mean_wait_invariance() -> CheckResult:
    means, ses = [], []
    for disc in ("fcfs", "ros", "random_insertion"):
        r = desim.simulate(_mm1(0.5, disc), 200_000, warmup=1000, seed=6)
        means.append(float(np.mean(r.wait)))
        ses.append(float(np.std(r.wait)) / math.sqrt(len(r.wait)))
    spread = max(means) - min(means)
    bound = 4.0 * math.hypot(max(ses), max(ses))
    return spread <= bound, f"means {np.round(means, 4)}, spread {spread:.4f} <= {bound:.4f}"


def check_lindley() -> CheckResult:
    r = desim.simulate(_mm1(0.5, "fcfs"), 50_000, warmup=0, seed=8)
    w, b, a = r.wait, r.service_req, r.arrival_time
    nxt = np.maximum(0.0, w[:-1] + b[:-1] - np.diff(a))
    tol = 64 * np.finfo(float).eps * max(1.0, a[-1])
    dev = float(np.max(np.abs(nxt - w[1:])))
    return dev <= tol, f"max recursion defect {dev:.2e} (float-rounding bound {tol:.2e})"


def check_record_inequalities() -> CheckResult:
    r = desim.simulate(_pareto_model(0.7, "ros"), 50_000, warmup=100, seed=9)
    ok = bool(np.all(r.wait >= r.b_rp) and np.all(r.wait <= r.z_rp + 1e-9))
    return ok, "B^rp <= W <= Z^rp on every record"


def check_busy_accounting() -> CheckResult:
    r = desim.simulate(_pareto_model(0.5, "fcfs"), 20_000, warmup=0, seed=10)
    n_served = int(np.sum(r.bp_customers))
    # Z equals the sum of its members' service times.
    starts = np.searchsorted(r.arrival_time, r.bp_start_time)
    ok = n_served <= len(r.wait)
    for k in range(len(r.bp_length)):
        members = slice(starts[k], starts[k] + int(r.bp_customers[k]))
        ok = ok and abs(np.sum(r.service_req[members]) - r.bp_length[k]) <= 1e-8
    return ok, f"{len(r.bp_length)} busy periods, {n_served} customers accounted"


# -- transforms --------------------------------------------------------------


def check_lst_identities() -> CheckResult:
    worst41 = worst64 = 0.0
    svc, _ = distributions.make_pareto(1.5, 1.0)
    for rho in (0.3, 0.5, 0.8):
        ev = transforms.LstEvaluator(_mm1(rho).with_discipline("fcfs"))
        evp = transforms.LstEvaluator(
            desim.QueueModel(distributions.make_exponential(rho / svc.mean), svc)
        )
        for s in (0.1, 1.0, 10.0):
            for e in (ev, evp):
                v = e.wait_lst_ros(s)
                worst41 = max(worst41, abs(v - e.wait_lst_ros_unsimplified(s)) / v)
                worst64 = max(worst64, abs(v - e.wait_lst_ros_via_fcfs(s)))
    ok = worst41 <= 1e-5 and worst64 <= 1e-4
    return ok, f"max rel gap vs dPhi/dz form {worst41:.2e}; vs FCFS form {worst64:.2e}"


def check_psi_bound() -> CheckResult:
    ev = transforms.LstEvaluator(_mm1(0.8))
    ok = True
    for s in (0.1, 1.0, 10.0):
        mu = ev.busy_lst(s)
        for z in np.linspace(mu, 1.0, 21):
            ok = ok and ev.psi(s, float(z)) <= math.exp(-(1.0 - z) / (1.0 * s)) + 1e-12
    return ok, "Psi(s,z) <= exp(-(1-z)/(beta s)) on the grid"


def check_lst_monotone_convex() -> CheckResult:
    ev = transforms.LstEvaluator(_mm1(0.5))
    s = np.geomspace(0.05, 20, 12)
    v = np.array([ev.wait_lst_ros(float(t)) for t in s])
    dec = bool(np.all(np.diff(v) < 0))
    # Convexity on an uneven grid: the middle point lies below the chord.
    chord = v[:-2] + (v[2:] - v[:-2]) * (s[1:-1] - s[:-2]) / (s[2:] - s[:-2])
    conv = bool(np.all(v[1:-1] <= chord + 1e-12))
    return dec and conv, "wait LST decreasing and convex (chord test) in s"


# -- asymptotics -------------------------------------------------------------


def check_h_endpoints_and_bound() -> CheckResult:
    worst = 0.0
    below_one = True
    for rho in np.arange(0.1, 0.91, 0.1):
        worst = max(worst, abs(asym.h_via_f(rho, 1.0) - 1.0), abs(asym.h_via_f(rho, 2.0) - 1.0))
        for nu in (1.2, 1.5, 1.8):
            below_one = below_one and asym.h_constant(rho, nu).h < 1.0
    return worst <= 1e-8 and below_one, f"endpoint defect {worst:.2e}; h < 1 inside"


def check_h_forms_agree() -> CheckResult:
    worst = 0.0
    for rho in np.linspace(0.1, 0.9, 9):
        for nu in np.linspace(1.1, 1.9, 9):
            worst = max(worst, abs(asym.h_via_f(rho, nu) - asym.h_via_g(rho, nu)))
    return worst <= 1e-8, f"max |f-form - g-form| = {worst:.2e}"


def check_h_convexity() -> CheckResult:
    ok = True
    for rho in (0.2, 0.5, 0.8):
        nus = np.arange(1.05, 1.951, 0.05)
        hs = np.array([asym.h_via_f(rho, float(n)) for n in nus])
        ok = ok and bool(np.all(hs[1:-1] <= 0.5 * (hs[:-2] + hs[2:]) + 1e-9))
    return ok, "h(rho, .) discretely convex on the 0.05 grid"


def check_tail_rewritings_agree() -> CheckResult:
    worst = 0.0
    for rho in (0.3, 0.7):
        model = _pareto_model(rho)
        for x in (1e3,):
            a = asym.wros_tail_nested(x, model)
            b = asym.wros_tail_single_integral(x, model)
            worst = max(worst, abs(a / b - 1.0))
    return worst <= 5e-3, f"max relative gap {worst:.2e}"


def check_residual_busy_sum() -> CheckResult:
    model = _pareto_model(0.5)
    a = asym.residual_busy_tail_sum(1e3, model)
    b = float(asym.residual_busy_tail(1e3, model))
    return abs(a / b - 1.0) <= 0.02, f"sum/closed = {a / b:.5f}"


def check_tauberian_slope() -> CheckResult:
    svc, spec = distributions.make_pareto(1.5, 1.0)
    lam = 0.7 / svc.mean
    ev = transforms.LstEvaluator(desim.QueueModel(distributions.make_exponential(lam), svc))
    s = 1e-4
    slope = (1.0 - ev.wait_lst_ros(s)) / s**0.5
    target = lam * spec.bingham_C * asym.h_constant(0.7, 1.5).h / 0.3
    rel = abs(slope / target - 1.0)
    return rel <= 0.10, f"slope/limit = {slope / target:.4f}"


def check_bessel_identity() -> CheckResult:
    worst = 0.0
    for x in (0.1, 1.0, 10.0):
        quad = numerics.integrate_semi_infinite(
            lambda t: np.exp(-x / t - t), 0.0, 1e-12, scale=max(1.0, math.sqrt(x))
        ).value
        worst = max(worst, abs(quad / float(asym.ht_tail_light(x)) - 1.0))
    return worst <= 1e-8, f"max relative identity defect {worst:.2e}"


def check_appendix_d() -> CheckResult:
    model = _pareto_model(0.5)
    rep = asym.appendix_d_check(0.5, 1e3, model, replications=32, seed=3)
    worst = max(
        abs(rep["ratio_mc_det"] - 1.0),
        abs(rep["ratio_mc_closed"] - 1.0),
        abs(rep["ratio_det_closed"] - 1.0),
    )
    return worst <= 0.03, f"max ratio deviation {worst:.4f}"


ALL_CHECKS: list[tuple[str, callable]] = [
    ("numerics.quadrature_linearity", check_quadrature_linearity),
    ("numerics.gamma_recurrence", check_gamma_recurrence),
    ("numerics.bessel_k1_monotone", check_bessel_monotone),
    ("numerics.root_residual", check_root_residual),
    ("distributions.forward_tail_closed_form", check_forward_tail_closed_form),
    ("distributions.lst_consistency", check_lst_consistency),
    ("distributions.bingham_doney_ratio", check_bingham_doney_ratio),
    ("distributions.sampler_ks", check_sampler_ks),
    ("distributions.mean_from_tail", check_mean_from_tail),
    ("desim.pathwise_invariance", check_pathwise_invariance),
    ("desim.mean_wait_invariance", check_mean_wait_invariance),
    ("desim.lindley_recursion", check_lindley),
    ("desim.record_inequalities", check_record_inequalities),
    ("desim.busy_period_accounting", check_busy_accounting),
    ("transforms.lst_identities", check_lst_identities),
    ("transforms.psi_bound", check_psi_bound),
    ("transforms.lst_monotone_convex", check_lst_monotone_convex),
    ("asymptotics.h_endpoints_and_bound", check_h_endpoints_and_bound),
    ("asymptotics.h_forms_agree", check_h_forms_agree),
    ("asymptotics.h_convexity", check_h_convexity),
    ("asymptotics.tail_rewritings_agree", check_tail_rewritings_agree),
    ("asymptotics.residual_busy_sum", check_residual_busy_sum),
    ("asymptotics.tauberian_slope", check_tauberian_slope),
    ("asymptotics.bessel_identity", check_bessel_identity),
    ("asymptotics.appendix_d", check_appendix_d),
]


def run_all(writer=print) -> bool:
    """Run every check, print one PASS/FAIL line each; True if all pass."""
    all_ok = True
    for name, fn in ALL_CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        all_ok = all_ok and ok
        writer(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return all_ok
