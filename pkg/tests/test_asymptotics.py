"""Asymptotic tail formulas and heavy-traffic limits."""

import math

import numpy as np
import pytest
import scipy.special

from rosqueue import asymptotics as asym
from rosqueue.desim import QueueModel
from rosqueue.distributions import (
    ConfigurationError,
    make_deterministic,
    make_exponential,
    make_pareto,
)
from rosqueue.numerics import integrate_semi_infinite
from rosqueue.transforms import LstEvaluator


@pytest.fixture(scope="module")
def pareto_model():
    svc, spec = make_pareto(1.5, 1.0)

    def make(rho, discipline="fcfs"):
        return QueueModel(make_exponential(rho / svc.mean), svc, discipline)

    return make, svc, spec


class TestBusyPeriodTails:
    def test_direct_substitution(self, pareto_model):
        make, svc, _ = pareto_model
        m = make(0.5)
        # E[tau] tail(x (1-rho)) = 2 * 50^{-1.5} at x = 100
        assert abs(float(asym.busy_period_tail(100.0, m)) - 2.0 * 50.0**-1.5) <= 1e-15
        assert abs(float(asym.busy_count_tail(100.0, m))
                   - 2.0 * svc.tail(100.0 * m.arrival.mean * 0.5)) <= 1e-15

    def test_monotone_to_zero(self, pareto_model):
        make, _, _ = pareto_model
        m = make(0.5)
        n = np.geomspace(10, 1e8, 30)
        v = np.asarray(asym.busy_count_tail(n, m))
        assert np.all(np.diff(v) < 0) and v[-1] < 1e-10

    def test_residual_busy_forms(self, pareto_model):
        make, svc, _ = pareto_model
        m = make(0.5)
        from rosqueue.distributions import forward_tail

        x = 1e3
        direct = float(asym.residual_busy_tail(x, m))
        assert abs(direct - 1.0 * float(forward_tail(svc, x * 0.5))) <= 1e-15
        # Sum over past customers vs integrated-tail form: within 2%.
        summed = asym.residual_busy_tail_sum(x, m)
        assert abs(summed / direct - 1.0) <= 0.02

    def test_residual_service(self, pareto_model):
        make, svc, _ = pareto_model
        m = make(0.5)
        assert float(asym.residual_service_tail(0.0, m)) == 0.5  # = rho
        assert abs(float(asym.residual_service_tail(4.0, m)) - 0.5 / 3.0) <= 1e-15


class TestConditionalLimit:
    def test_boundaries(self):
        assert asym.conditional_w_limit(0.0, 0.5) == 1.0
        assert asym.conditional_w_limit(1.0, 0.5) == 0.0
        assert asym.conditional_w_limit(2.0, 0.5) == 0.0

    def test_interior_value(self):
        assert abs(asym.conditional_w_limit(0.5, 0.5) - 0.25) <= 1e-15


class TestTailRewritings:
    @pytest.mark.parametrize("rho", [0.3, 0.7])
    def test_nested_vs_single_integral(self, pareto_model, rho):
        make, _, _ = pareto_model
        m = make(rho)
        a = asym.wros_tail_nested(1e3, m)
        b = asym.wros_tail_single_integral(1e3, m)
        assert abs(a / b - 1.0) <= 5e-3

    def test_matches_regularly_varying_form(self, pareto_model):
        make, _, _ = pareto_model
        m = make(0.7)
        h = asym.h_constant(0.7, 1.5).h
        rv = float(asym.wros_tail_rv(1e4, m, h=h))
        assert abs(asym.wros_tail_single_integral(1e4, m) / rv - 1.0) <= 0.02

    def test_nested_form_reaches_rv_asymptote(self, pareto_model):
        make, _, _ = pareto_model
        m = make(0.5)
        rv = float(asym.wros_tail_rv(1e4, m, h=asym.h_constant(0.5, 1.5).h))
        assert abs(asym.wros_tail_nested(1e4, m) / rv - 1.0) <= 0.02

    def test_middle_ranges_join_at_cx(self, pareto_model):
        # c solves (v alpha + x)(1 - rho) = v alpha.
        make, _, _ = pareto_model
        m = make(0.7)
        x = 500.0
        cx = (1 - 0.7) / (m.arrival.mean * 0.7) * x
        assert abs((cx * m.arrival.mean + x) * 0.3 - cx * m.arrival.mean) <= 1e-9

    def test_low_load_limit(self, pareto_model):
        make, svc, _ = pareto_model
        m = make(0.01)
        from rosqueue.distributions import forward_tail

        total = asym.wros_tail_nested(100.0, m)
        head = 0.01 * float(forward_tail(svc, 100.0))
        assert abs(total - head) <= 0.1 * head

    def test_single_integral_integrand_vanishes_at_one(self, pareto_model):
        make, svc, _ = pareto_model
        m = make(0.5)
        from rosqueue.distributions import truncated_mean

        x, rho, alpha = 1e3, 0.5, m.arrival.mean
        for u in (0.999, 0.9999):
            t_lo = x * 0.5 / (rho * u + 0.5)
            t_hi = x * 0.5 / (rho * u)
            body = (rho * truncated_mean(svc, t_lo, t_hi) / (alpha * 0.5)
                    + x / (alpha * u * u) * float(svc.tail(t_hi)))
            assert body * (1 - u) ** 2 <= 1e-4

    def test_densityless_service_routed(self):
        m = QueueModel(make_exponential(0.25), make_deterministic(2.0))
        with pytest.raises(ConfigurationError, match="single_integral"):
            asym.wros_tail_nested(10.0, m)


class TestHConstant:
    def test_endpoints(self):
        for rho in (0.1, 0.5, 0.9):
            assert abs(asym.h_via_f(rho, 1.0) - 1.0) <= 1e-8
            assert abs(asym.h_via_f(rho, 2.0) - 1.0) <= 1e-8

    def test_zero_load(self):
        assert abs(asym.h_via_f(0.0, 1.5) - 1.0) <= 1e-10

    def test_figure_corner(self):
        assert abs(asym.h_constant(0.999, 1.5).h - 0.88622) <= 1e-2

    def test_forms_agree_on_grid(self):
        for rho in (0.2, 0.5, 0.8):
            for nu in (1.1, 1.5, 1.9):
                assert abs(asym.h_via_f(rho, nu) - asym.h_via_g(rho, nu)) <= 1e-8

    def test_interior_bound(self):
        for rho in (0.1, 0.5, 0.9):
            for nu in (1.2, 1.5, 1.8):
                hc = asym.h_constant(rho, nu)
                assert 0.8 < hc.h < 1.0
                assert hc.method == "f-integral"

    def test_convex_in_nu(self):
        nus = np.arange(1.05, 1.951, 0.05)
        hs = np.array([asym.h_via_f(0.6, float(n)) for n in nus])
        assert np.all(hs[1:-1] <= 0.5 * (hs[:-2] + hs[2:]) + 1e-9)

    def test_monte_carlo_oracle(self):
        # Independent check of h(0.5, 1.5): plain Monte-Carlo integration
        # of the integrand over 1e7 uniforms, 4 sigma band.
        rng = np.random.default_rng(2718)
        u = rng.random(10_000_000)
        vals = asym._h_f_integrand(u, 0.5, 1.5)
        mc = float(np.mean(vals))
        se = float(np.std(vals)) / math.sqrt(len(u))
        assert abs(asym.h_via_f(0.5, 1.5) - mc) <= 4.0 * se

    def test_domain(self):
        with pytest.raises(ConfigurationError):
            asym.h_constant(1.0, 1.5)
        with pytest.raises(ConfigurationError):
            asym.h_constant(0.5, 2.5)


class TestRegularlyVaryingTails:
    def test_ratio_is_h(self, pareto_model):
        make, _, _ = pareto_model
        m = make(0.7)
        h = asym.h_constant(0.7, 1.5).h
        x = np.geomspace(10, 1e6, 7)
        ratio = np.asarray(asym.wros_tail_rv(x, m, h=h)) / np.asarray(asym.wfcfs_tail(x, m))
        assert np.allclose(ratio, h, rtol=1e-12)

    def test_h_computed_from_model(self, pareto_model):
        make, _, _ = pareto_model
        m = make(0.5)
        implicit = float(asym.wros_tail_rv(100.0, m))
        explicit = float(asym.wros_tail_rv(100.0, m, h=asym.h_constant(0.5, 1.5).h))
        assert abs(implicit - explicit) <= 1e-12


class TestHeavyTrafficScalings:
    def test_delta_light_mm1(self):
        # Kingman normalization: for M/M/1, 2 lam (1-rho) / (1 + rho^2).
        lam, beta = 0.9, 1.0
        d = asym.delta_light(0.9, beta**2, lam)
        assert abs(d - 2 * lam * 0.1 / (1 + 0.81)) <= 1e-15

    def test_delta_light_normalizes_fcfs(self):
        # The defining property: E[e^{-omega Delta W_FCFS}] -> 1/(1+omega).
        for rho in (0.99, 0.999):
            ev = LstEvaluator(
                QueueModel(make_exponential(rho), make_exponential(1.0))
            )
            d = asym.delta_light(rho, 1.0, rho)
            for omega in (0.5, 1.0, 2.0):
                lim = 1.0 / (1.0 + omega)
                assert abs(ev.wait_lst_fcfs(omega * d) - lim) <= 3.0 * (1 - rho)

    def test_delta_heavy_closed_form(self):
        # lam=1, C=1, nu=1.5, rho=0.99: x = ((1-rho)/(lam C))^2 = 1e-4.
        assert abs(asym.delta_heavy(0.99, 1.5, 1.0, 1.0) - 1e-4) <= 1e-12

    def test_delta_monotone_to_zero(self):
        rhos = np.linspace(0.5, 0.999, 20)
        dl = [asym.delta_light(r, 1.0, r) for r in rhos]
        dh = [asym.delta_heavy(r, 1.5, 1.0, r / 3.0) for r in rhos]
        assert all(a > b for a, b in zip(dl, dl[1:]))
        assert all(a > b for a, b in zip(dh, dh[1:]))
        assert dl[-1] < 2e-3 and dh[-1] < 2e-5


class TestHeavyTrafficLimitLaws:
    def test_lst_normalization(self):
        assert asym.ht_lst_light(0.0) == 1.0
        assert asym.ht_lst_heavy(0.0, 1.5) == 1.0
        # nu = 2 collapses the heavy limit onto the finite-variance one.
        assert abs(asym.ht_lst_heavy(1.0, 2.0) - asym.ht_lst_light(1.0)) <= 1e-10

    def test_lst_light_value(self):
        # int_0^inf e^{-t}/(1+t) dt = e E_1(1), via an independent special
        # function implementation.
        oracle = math.e * float(scipy.special.exp1(1.0))
        assert abs(asym.ht_lst_light(1.0) - oracle) <= 1e-10
        assert abs(asym.ht_lst_light(1.0) - 0.596347) <= 1e-6

    def test_bessel_tail_identity(self):
        for x in (0.1, 1.0, 10.0):
            quad = integrate_semi_infinite(
                lambda t: np.exp(-x / t - t), 0.0, tol=1e-13,
                scale=max(1.0, math.sqrt(x)),
            ).value
            assert abs(quad / float(asym.ht_tail_light(x)) - 1.0) <= 1e-8

    def test_sampler_mean(self):
        rng = np.random.default_rng(31415)
        x = asym.ht_sample_light(rng, 1_000_000)
        # Product of unit exponentials: mean 1, variance 3.
        assert abs(float(np.mean(x)) - 1.0) <= 4.0 * math.sqrt(3.0 / len(x))

    def test_limit_check_shapes(self):
        rng = np.random.default_rng(5)
        w = asym.ht_sample_light(rng, 200_000)
        light = asym.ht_limit_check(w)
        assert light["kind"] == "light"
        assert light["max_abs_deviation"] <= 0.01  # sampler vs its own law
        heavy = asym.ht_limit_check(w, nu=1.9, omegas=(1.0,))
        assert heavy["kind"] == "heavy" and len(heavy["empirical"]) == 1

    def test_transform_engine_reaches_light_limit(self):
        # No Monte Carlo: the exact waiting-time transform under the
        # light-tailed scaling approaches int e^{-t}/(1+omega t) dt at
        # rate O(1-rho).
        rho = 0.999
        ev = LstEvaluator(QueueModel(make_exponential(rho), make_exponential(1.0)))
        d = asym.delta_light(rho, 1.0, rho)
        for omega in (0.5, 1.0, 2.0):
            gap = abs(ev.wait_lst_ros(omega * d) - asym.ht_lst_light(omega))
            assert gap <= 0.35 * (1.0 - rho)

    def test_transform_engine_reaches_heavy_limit(self, pareto_model):
        make, svc, spec = pareto_model
        rho = 0.999
        lam = rho / svc.mean
        ev = LstEvaluator(QueueModel(make_exponential(lam), svc))
        d = asym.delta_heavy(rho, 1.5, spec.bingham_C, lam)
        for omega in (0.5, 1.0, 2.0):
            gap = abs(ev.wait_lst_ros(omega * d) - asym.ht_lst_heavy(omega, 1.5))
            assert gap <= 0.05 * (1.0 - rho)


class TestAppendixD:
    def test_deterministic_arrivals_identical(self, pareto_model):
        _, svc, _ = pareto_model
        m = QueueModel(make_deterministic(svc.mean / 0.5), svc)
        rep = asym.appendix_d_check(0.5, 1e3, m, replications=4, seed=1)
        assert abs(rep["ratio_mc_det"] - 1.0) <= 1e-12

    def test_exponential_arrivals_three_routes(self, pareto_model):
        make, _, _ = pareto_model
        rep = asym.appendix_d_check(0.5, 1e3, make(0.5), replications=48, seed=2)
        for key in ("ratio_mc_det", "ratio_mc_closed", "ratio_det_closed"):
            assert abs(rep[key] - 1.0) <= 0.03

    def test_ratios_approach_one(self, pareto_model):
        # Reported trend over x in {1e2, 1e3, 1e4}: gap shrinks with x.
        make, _, _ = pareto_model
        m = make(0.5)
        gaps = [
            abs(asym.appendix_d_check(0.5, x, m, replications=24, seed=3)["ratio_det_closed"] - 1)
            for x in (1e2, 1e3, 1e4)
        ]
        assert gaps[2] < gaps[0]

    def test_domain(self, pareto_model):
        make, _, _ = pareto_model
        with pytest.raises(ConfigurationError):
            asym.appendix_d_check(-1.0, 10.0, make(0.5))


class TestCurveObjects:
    def test_tail_curve(self, pareto_model):
        make, _, _ = pareto_model
        m = make(0.5)
        curve = asym.TailCurve(
            label="wfcfs",
            eval=lambda x: float(asym.wfcfs_tail(x, m)),
            validity_note="x -> infinity equivalence",
        )
        assert curve.eval(10.0) > curve.eval(100.0) > 0
