"""Exact waiting-time transforms for the M/G/1 queue.

Implements the classical transform of the random-order-of-service
waiting time,

    E[e^{-s W}] = 1 - rho + rho b_fw{s}
                  - (rho (1-rho) / (beta s))
                    int_{mu{s}}^{1} dPhi/dz (s,z) Psi(s,z) dz,

its integrated-by-parts form

    E[e^{-s W}] = 1 + (rho (1-rho) / (beta s))
                      int_{mu{s}}^{1} PhiHat(s,z) Psi(s,z) dz,

and a third, heavy-traffic-flavored rewriting in terms of the FCFS
transform.  mu{s} is the busy-period LST, the unique root in (0,1) of
mu = b{s + lam (1 - mu)}.

Everything is evaluated through the service law's stable
``lst_deficit(s) = 1 - lst(s)``: the recurring denominators
``z - b{s + lam(1-z)}`` and ``z - b{lam(1-z)}`` are differences of
nearly equal quantities near z = 1 and z = mu{s}, and writing them as
``deficit(.) - (1-z)`` keeps full precision there.  The integrand
PhiHat * Psi has a removable 0 * inf endpoint at z = mu{s} (PhiHat
diverges like a power worse than -1, Psi vanishes like a stronger
power); the open quadrature rule never samples the endpoints, so no
explicit inset is needed.
"""

from __future__ import annotations

import math

import numpy as np

from rosqueue.desim import QueueModel
from rosqueue.distributions import ConfigurationError
from rosqueue.numerics import _adaptive_core, _panel, integrate_adaptive

__all__ = ["LstEvaluator", "NumericError"]


class NumericError(RuntimeError):
    """A fixed point or quadrature did not converge."""


class _PsiTable:
    """Per-s cache of the exponent G(z) = int_z^1 dy / (y - b{s+lam(1-y)}).

    Psi(s, .) is queried at hundreds of z by the outer quadratures, and
    the exponent integrals all share their upper end; one adaptive
    decomposition of [mu + dust, 1] is stored, and a query needs only a
    suffix sum plus one Gauss-Kronrod panel for the partial interval.
    """

    def __init__(self, den: callable, mu: float):
        self.mu = mu
        self._g = lambda y: 1.0 / den(y)
        # The integrand has a simple pole at mu; inside the inset the
        # denominator is pure cancellation noise, so the table starts at
        # z0 and the exponent continues with its analytic log divergence
        # G(z) ~ G(z0) + p log((z0-mu)/(z-mu)), p = (z0-mu)/den(z0).
        z0 = mu + 1e-8 * max(1.0 - mu, 1e-30)
        panels, _, converged = _adaptive_core(self._g, z0, 1.0, 1e-9, 4096)
        err = math.fsum(p[3] for p in panels)
        if not converged and err > 1e-5:
            raise NumericError(f"psi exponent integral did not converge (err={err:.2e})")
        self._z0 = z0
        self._pole_rate = (z0 - mu) * float(self._g(np.asarray(z0)))
        self._edges = np.array([p[0] for p in panels] + [1.0])
        vals = np.array([p[2] for p in panels])
        # suffix[i] = integral from _edges[i] to 1
        self._suffix = np.append(np.cumsum(vals[::-1])[::-1], 0.0)

    def exponent(self, z: float) -> float:
        if z >= 1.0:
            return 0.0
        if z <= self.mu:
            return math.inf
        if z < self._z0:
            tail_log = math.log((self._z0 - self.mu) / (z - self.mu))
            return float(self._suffix[0]) + self._pole_rate * tail_log
        j = int(np.searchsorted(self._edges, z, side="right")) - 1
        if j >= len(self._suffix) - 1:
            return 0.0
        hi = float(self._edges[j + 1])
        part = _panel(self._g, z, hi)[0] if z < hi else 0.0
        return part + float(self._suffix[j + 1])

    def psi(self, z: float) -> float:
        return math.exp(-self.exponent(z))


class LstEvaluator:
    """Waiting-time LST evaluators for an M/G/1 model.

    The model's arrival law must be exponential (rate lam = 1/alpha);
    general arrival laws have no closed transform and route to the
    simulator instead.  Instances are immutable apart from the mu{s}
    cache (a plain dict keyed by s, safe for concurrent readers).
    """

    def __init__(self, model: QueueModel, quad_tol: float = 1e-9):
        if model.arrival.kind != "exponential":
            raise ConfigurationError(
                "LstEvaluator requires Poisson arrivals; "
                f"got arrival kind {model.arrival.kind!r}"
            )
        self.model = model
        self.lam = 1.0 / model.arrival.mean
        self.beta_mean = model.service.mean
        self.rho = model.rho
        self.quad_tol = quad_tol
        self._eps_cache: dict[float, float] = {}
        self._psi_tables: dict[float, _PsiTable] = {}

    # -- service transform ------------------------------------------------

    def beta(self, s):
        return self.model.service.lst(s)

    def beta_deficit(self, s):
        return self.model.service.lst_deficit(s)

    def beta_fw(self, s: float) -> float:
        """LST of the forward recurrence time, (1 - b{s}) / (beta s)."""
        if s == 0.0:
            return 1.0
        return float(self.beta_deficit(s)) / (self.beta_mean * s)

    # -- busy period -------------------------------------------------------

    def epsilon(self, s: float) -> float:
        """1 - mu{s}, computed as the fixed point eps = deficit(s + lam eps).

        The map is a contraction with rate below rho for s > 0, starting
        from eps = 1 (i.e. mu = 0) and decreasing.
        """
        if s < 0:
            raise ConfigurationError(f"need s >= 0, got {s}")
        if s == 0.0:
            return 0.0
        cached = self._eps_cache.get(s)
        if cached is not None:
            return cached
        eps = 1.0
        for _ in range(200000):
            nxt = float(self.beta_deficit(s + self.lam * eps))
            done = abs(nxt - eps) <= 1e-14
            eps = nxt
            if done:
                break
        else:
            raise NumericError(f"busy-period fixed point did not converge at s={s}")
        self._eps_cache[s] = eps
        return eps

    def busy_lst(self, s: float) -> float:
        """mu{s}: LST of the busy-period length."""
        return 1.0 - self.epsilon(s)

    # -- kernel functions --------------------------------------------------

    def _den_busy(self, s: float, z):
        """z - b{s + lam (1-z)}, positive on (mu{s}, 1]."""
        w = 1.0 - np.asarray(z, dtype=float)
        return self.beta_deficit(s + self.lam * w) - w

    def _den_idle(self, z):
        """z - b{lam (1-z)}, negative on [0, 1)."""
        w = 1.0 - np.asarray(z, dtype=float)
        return self.beta_deficit(self.lam * w) - w

    def _psi_table(self, s: float) -> _PsiTable:
        table = self._psi_tables.get(s)
        if table is None:
            table = _PsiTable(lambda y: self._den_busy(s, y), self.busy_lst(s))
            self._psi_tables[s] = table
        return table

    def psi(self, s: float, z: float) -> float:
        """Psi(s,z) = exp[- int_z^1 dy / (y - b{s + lam(1-y)})].

        Defined for z in [mu{s}, 1]; Psi(s, mu{s}) = 0, Psi(s, 1) = 1.
        """
        mu = self.busy_lst(s)
        if z < mu - 1e-12:
            raise ConfigurationError(f"psi needs z >= mu{{s}} = {mu:.12g}, got z={z}")
        if z <= mu:
            return 0.0
        if z >= 1.0:
            return 1.0
        return self._psi_table(s).psi(z)

    def phi(self, s: float, z: float) -> float:
        """Phi(s,z) = (1-z)(b{s+lam(1-z)} - b{lam(1-z)}) / (z - b{lam(1-z)}).

        Continuous limits: Phi(s,1) = (1-b{s})/(1-rho) and
        Phi(s,mu{s}) = 1 - mu{s}.
        """
        w = 1.0 - z
        if w <= 1e-12:
            return float(self.beta_deficit(s)) / (1.0 - self.rho)
        num = w * (
            float(self.beta_deficit(self.lam * w))
            - float(self.beta_deficit(s + self.lam * w))
        )
        return num / float(self._den_idle(z))

    def phi_hat(self, s: float, z):
        """PhiHat = (Phi - beta s/(1-rho)) / (z - b{s+lam(1-z)}), expanded as
        (1-z-beta s/(1-rho))/(z-b{s+lam(1-z)}) - (1-z)/(z-b{lam(1-z)})."""
        z = np.asarray(z, dtype=float)
        w = 1.0 - z
        shift = self.beta_mean * s / (1.0 - self.rho)
        t1 = (w - shift) / np.asarray(self._den_busy(s, z))
        den2 = np.asarray(self._den_idle(z))
        with np.errstate(invalid="ignore"):
            t2 = np.where(w == 0.0, -1.0 / (1.0 - self.rho), w / den2)
        out = t1 - t2
        return float(out) if out.ndim == 0 else out

    # -- waiting-time transforms --------------------------------------------

    def wait_lst_fcfs(self, s: float) -> float:
        """FCFS waiting-time LST (1 - rho) / (1 - rho b_fw{s})."""
        if s == 0.0:
            return 1.0
        return (1.0 - self.rho) / (1.0 - self.rho * self.beta_fw(s))

    def wait_lst_ros(self, s: float) -> float:
        """ROS waiting-time LST via the integrated-by-parts form."""
        if s <= 0.0:
            raise ConfigurationError(f"need s > 0, got {s}")
        mu = self.busy_lst(s)
        r = integrate_adaptive(
            lambda z: self.phi_hat(s, z) * np.array([self.psi(s, zi) for zi in np.atleast_1d(z)]),
            mu, 1.0, tol=self.quad_tol,
        )
        return 1.0 + self.rho * (1.0 - self.rho) / (self.beta_mean * s) * r.value

    def wait_lst_ros_unsimplified(self, s: float) -> float:
        """ROS waiting-time LST via the original dPhi/dz form.

        dPhi/dz is taken by central differences with base step
        1e-6 (1 - mu{s}); the step shrinks proportionally near the
        endpoints, both to stay inside [mu{s}, 1] and because for
        regularly varying service laws Phi has a (1-z)^{nu-1} component
        whose derivative a fixed step cannot resolve near z = 1.  This
        form is the cross-check for :meth:`wait_lst_ros`.
        """
        if s <= 0.0:
            raise ConfigurationError(f"need s > 0, got {s}")
        mu = self.busy_lst(s)
        h_base = 1e-6 * (1.0 - mu)

        def dphi_psi(z: float) -> float:
            # Near z = 1 the singular component w^{nu-1} makes the central
            # difference self-similar: its relative error is ~ 1/(8 r^2)
            # for step (1-z)/r, hence the tight ratio on that side.
            h = min(h_base, (1.0 - z) / 128.0, 0.125 * (z - mu))
            if h <= 0.0:
                return 0.0  # float dust at an endpoint; measure-zero panel
            d = (self.phi(s, z + h) - self.phi(s, z - h)) / (2.0 * h)
            return d * self.psi(s, z)

        r = integrate_adaptive(
            lambda z: np.array([dphi_psi(zi) for zi in np.atleast_1d(z)]),
            mu, 1.0, tol=max(self.quad_tol, 1e-8),
        )
        return (
            1.0 - self.rho + self.rho * self.beta_fw(s)
            - self.rho * (1.0 - self.rho) / (self.beta_mean * s) * r.value
        )

    def wait_lst_ros_via_fcfs(self, s: float) -> float:
        """ROS waiting-time LST through the FCFS transform.

        Exact rewriting of the integrated-by-parts form:

            E[e^{-sW}] = rho int_0^{eps/(beta s)}
                             E[e^{-rho s t W_FCFS}] Psi(s, 1 - beta s t) dt
                         + (1-rho) (1 + rho/(beta s) int_{mu}^{1} Psi dz).

        Dropping the (1-rho) bracket (which lies in [1-rho, 1-rho^2])
        gives the heavy-traffic approximation; it is kept here so the
        identity holds at every load.
        """
        if s <= 0.0:
            raise ConfigurationError(f"need s > 0, got {s}")
        eps = self.epsilon(s)
        bs = self.beta_mean * s
        upper = eps / bs

        def integrand(t: float) -> float:
            return self.wait_lst_fcfs(self.rho * s * t) * self.psi(s, 1.0 - bs * t)

        main = integrate_adaptive(
            lambda t: np.array([integrand(ti) for ti in np.atleast_1d(t)]),
            0.0, upper, tol=self.quad_tol,
        )
        psi_int = integrate_adaptive(
            lambda z: np.array([self.psi(s, zi) for zi in np.atleast_1d(z)]),
            1.0 - eps, 1.0, tol=self.quad_tol,
        )
        return self.rho * main.value + (1.0 - self.rho) * (
            1.0 + self.rho / bs * psi_int.value
        )
