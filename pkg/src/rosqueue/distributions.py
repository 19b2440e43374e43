"""Service and inter-arrival time laws.

Each law is packaged as an immutable :class:`TailDistribution` exposing
its tail, density, mean, variance, sampler, Laplace-Stieltjes transform
(LST), and a numerically stable ``lst_deficit(s) = 1 - lst(s)``.  The
deficit is what every small-s computation actually needs (forward
recurrence transforms, busy-period fixed points, Tauberian slopes);
computing it as ``1 - lst(s)`` would lose all significant digits for
small s, so each law implements it directly.

The regularly varying law used throughout is a pure Pareto tail,
``P(B > x) = (x / x_m)^{-nu}`` for ``x >= x_m`` with ``nu in (1, 2)``:
finite mean, infinite variance.  Its LST expands as

    lst(s) = 1 - beta s + C s^nu + O(s^2),   C = c_B Gamma(2-nu)/(nu-1),

with ``c_B = x_m^nu``; C is the constant tying the tail to the transform
(see :class:`RegVaryingSpec`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaincc

from rosqueue.numerics import gamma_fn, integrate_adaptive, integrate_semi_infinite

__all__ = [
    "ConfigurationError",
    "TailDistribution",
    "RegVaryingSpec",
    "ForwardRecurrence",
    "TailClassReport",
    "make_pareto",
    "make_exponential",
    "make_deterministic",
    "make_weibull",
    "forward_tail",
    "forward_recurrence",
    "truncated_mean",
    "tail_class_diagnostics",
]


class ConfigurationError(ValueError):
    """A distribution or model parameter is outside its valid range."""


@dataclass(frozen=True)
class TailDistribution:
    """A positive law with the handles the queueing computations need.

    Fields
    ------
    kind : one of "pareto", "exponential", "deterministic", "weibull".
    mean, variance : first two moments (variance may be ``math.inf``).
    tail : vectorized x -> P(X > x).
    density : vectorized x -> density, or None (deterministic law).
    lst : vectorized s -> E[exp(-sX)] for s >= 0.
    lst_deficit : vectorized s -> 1 - lst(s), stable for small s.
    sampler : (rng, size) -> ndarray of iid draws; the caller owns rng.
    params : constructor parameters, for reporting and serialization.
    """

    kind: str
    mean: float
    variance: float
    tail: Callable[[np.ndarray], np.ndarray]
    density: Optional[Callable[[np.ndarray], np.ndarray]]
    lst: Callable[[np.ndarray], np.ndarray]
    lst_deficit: Callable[[np.ndarray], np.ndarray]
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    params: dict = field(default_factory=dict)

    def __repr__(self) -> str:  # params carry all identity
        inner = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"TailDistribution({self.kind}, {inner})"


@dataclass(frozen=True)
class RegVaryingSpec:
    """Regular-variation data for a pure Pareto service tail.

    ``P(B > x) = tail_coefficient * x^{-index}`` for ``x >= scale`` (the
    slowly varying factor is a constant).  ``bingham_C`` is the constant
    C in the small-s expansion ``lst(s) - 1 + beta s ~ C s^index``; the
    value ``tail_coefficient * Gamma(2 - index) / (index - 1)`` is the
    convention under which ``C x^{1-index} / (Gamma(2-index) beta)``
    reproduces the exact Pareto forward-recurrence tail.  (Stated with a
    Gamma(1-index) prefactor, the tail/transform relation needs an extra
    sign for index in (1,2); this form keeps every constant positive.)
    """

    index: float
    scale: float
    tail_coefficient: float
    bingham_C: float


@dataclass(frozen=True)
class ForwardRecurrence:
    """Integrated-tail (stationary excess) law of a base distribution."""

    base: TailDistribution
    tail: Callable[[np.ndarray], np.ndarray]


def _as_array(x) -> tuple[np.ndarray, bool]:
    a = np.asarray(x, dtype=float)
    return a, a.ndim == 0


def _maybe_scalar(y: np.ndarray, scalar: bool):
    return float(y) if scalar else y


def make_pareto(nu: float, x_m: float) -> tuple[TailDistribution, RegVaryingSpec]:
    """Pareto law with tail (x/x_m)^{-nu} above x_m, nu in (1, 2).

    Returns the distribution together with its RegVaryingSpec.  The index
    range is restricted to (1, 2): finite mean, infinite variance, which
    is the regime all the regularly-varying waiting-time formulas assume.
    """
    if not 1.0 < nu < 2.0:
        raise ConfigurationError(f"pareto index must be in (1, 2), got {nu}")
    if x_m <= 0:
        raise ConfigurationError(f"pareto scale must be positive, got {x_m}")
    mean = x_m * nu / (nu - 1.0)
    c_b = x_m**nu
    deficit_coeffs = _pareto_deficit_coeffs(nu)

    def tail(x):
        x, scalar = _as_array(x)
        t = np.where(x < x_m, 1.0, np.power(np.maximum(x, x_m) / x_m, -nu))
        return _maybe_scalar(t, scalar)

    def density(x):
        x, scalar = _as_array(x)
        d = np.where(x < x_m, 0.0, nu * c_b * np.power(np.maximum(x, x_m), -nu - 1.0))
        return _maybe_scalar(d, scalar)

    def lst(s):
        s, scalar = _as_array(s)
        return _maybe_scalar(_pareto_lst(s, nu, x_m), scalar)

    def lst_deficit(s):
        s, scalar = _as_array(s)
        return _maybe_scalar(_pareto_deficit(s, nu, x_m, deficit_coeffs), scalar)

    def sampler(rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random(size)
        return x_m * np.power(u, -1.0 / nu)

    dist = TailDistribution(
        kind="pareto",
        mean=mean,
        variance=math.inf,
        tail=tail,
        density=density,
        lst=lst,
        lst_deficit=lst_deficit,
        sampler=sampler,
        params={"nu": nu, "x_m": x_m},
    )
    spec = RegVaryingSpec(
        index=nu,
        scale=x_m,
        tail_coefficient=c_b,
        bingham_C=c_b * gamma_fn(2.0 - nu) / (nu - 1.0),
    )
    return dist, spec


def _pareto_lst(s: np.ndarray, nu: float, x_m: float) -> np.ndarray:
    """E[e^{-sB}] = nu z^nu Gamma(-nu, z) with z = x_m s.

    The upper incomplete gamma at negative order is lifted to positive
    order 2-nu with the recurrence Gamma(a, z) = (Gamma(a+1, z)
    - z^a e^{-z}) / a applied twice.
    """
    s = np.asarray(s, dtype=float)
    z = x_m * s
    out = np.ones_like(z)
    pos = z > 0
    if np.any(pos):
        zp = z[pos]
        g2 = gammaincc(2.0 - nu, zp) * gamma_fn(2.0 - nu)
        ez = np.exp(-zp)
        g1 = (g2 - np.power(zp, 1.0 - nu) * ez) / (1.0 - nu)
        g0 = (g1 - np.power(zp, -nu) * ez) / (-nu)
        out[pos] = nu * np.power(zp, nu) * g0
    return out


def _pareto_deficit_coeffs(nu: float, n_terms: int = 26) -> np.ndarray:
    """Coefficients c_k = nu (-1)^k / (k! (k - nu)), k = 1..n_terms."""
    c = np.empty(n_terms)
    fact = 1.0
    for k in range(1, n_terms + 1):
        fact *= k
        c[k - 1] = nu * (-1.0) ** k / (fact * (k - nu))
    return c


def _pareto_deficit(s: np.ndarray, nu: float, x_m: float, coeffs: np.ndarray) -> np.ndarray:
    """1 - lst(s) without cancellation.

    For z = x_m s < 1/2 the alternating series
        1 - lst = Gamma(1-nu) z^nu + sum_{k>=1} nu (-z)^k / (k! (k-nu))
    is evaluated by Horner's rule (terms bounded by z^k/k!, so 26 terms
    reach 1e-30); for larger z the direct difference is safe.
    """
    s = np.asarray(s, dtype=float)
    z = x_m * s
    out = np.zeros_like(z)
    small = (z > 0) & (z < 0.5)
    big = z >= 0.5
    if np.any(small):
        zs = z[small]
        acc = np.full_like(zs, coeffs[-1])
        for c in coeffs[-2::-1]:
            acc = acc * zs + c
        out[small] = math.gamma(1.0 - nu) * np.power(zs, nu) + zs * acc
    if np.any(big):
        out[big] = 1.0 - _pareto_lst(z[big] / x_m, nu, x_m)
    return out


def make_exponential(rate: float) -> TailDistribution:
    """Exponential law with the given rate (mean 1/rate)."""
    if rate <= 0:
        raise ConfigurationError(f"exponential rate must be positive, got {rate}")

    def tail(x):
        x, scalar = _as_array(x)
        return _maybe_scalar(np.exp(-rate * np.maximum(x, 0.0)), scalar)

    def density(x):
        x, scalar = _as_array(x)
        d = np.where(x < 0, 0.0, rate * np.exp(-rate * np.maximum(x, 0.0)))
        return _maybe_scalar(d, scalar)

    def lst(s):
        s, scalar = _as_array(s)
        return _maybe_scalar(rate / (rate + s), scalar)

    def lst_deficit(s):
        s, scalar = _as_array(s)
        return _maybe_scalar(s / (rate + s), scalar)

    def sampler(rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.exponential(1.0 / rate, size)

    return TailDistribution(
        kind="exponential",
        mean=1.0 / rate,
        variance=1.0 / rate**2,
        tail=tail,
        density=density,
        lst=lst,
        lst_deficit=lst_deficit,
        sampler=sampler,
        params={"rate": rate},
    )


def make_deterministic(value: float) -> TailDistribution:
    """Point mass at ``value``."""
    if value <= 0:
        raise ConfigurationError(f"deterministic value must be positive, got {value}")

    def tail(x):
        x, scalar = _as_array(x)
        return _maybe_scalar(np.where(x < value, 1.0, 0.0), scalar)

    def lst(s):
        s, scalar = _as_array(s)
        return _maybe_scalar(np.exp(-value * s), scalar)

    def lst_deficit(s):
        s, scalar = _as_array(s)
        return _maybe_scalar(-np.expm1(-value * s), scalar)

    def sampler(rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, value)

    return TailDistribution(
        kind="deterministic",
        mean=value,
        variance=0.0,
        tail=tail,
        density=None,
        lst=lst,
        lst_deficit=lst_deficit,
        sampler=sampler,
        params={"value": value},
    )


def make_weibull(shape: float, scale: float) -> TailDistribution:
    """Weibull law with tail exp(-(x/scale)^shape).

    shape < 1 gives the heavy-tailed (strong subexponential) regime; any
    positive shape is accepted.  The LST has no elementary closed form
    and is evaluated by quadrature over the density.
    """
    if shape <= 0 or scale <= 0:
        raise ConfigurationError(
            f"weibull parameters must be positive, got shape={shape}, scale={scale}"
        )
    mean = scale * gamma_fn(1.0 + 1.0 / shape)
    variance = scale**2 * (gamma_fn(1.0 + 2.0 / shape) - gamma_fn(1.0 + 1.0 / shape) ** 2)

    def tail(x):
        x, scalar = _as_array(x)
        t = np.exp(-np.power(np.maximum(x, 0.0) / scale, shape))
        return _maybe_scalar(t, scalar)

    def density(x):
        x, scalar = _as_array(x)
        xp = np.maximum(x, 1e-300) / scale
        d = np.where(
            x <= 0, 0.0, (shape / scale) * np.power(xp, shape - 1.0) * np.exp(-np.power(xp, shape))
        )
        return _maybe_scalar(d, scalar)

    def _deficit_one(s: float) -> float:
        if s == 0.0:
            return 0.0
        # 1 - lst(s) = s * int_0^inf e^{-sx} tail(x) dx (integration by parts).
        r = integrate_semi_infinite(
            lambda x: np.exp(-s * x) * tail(x), 0.0, tol=1e-12, scale=mean
        )
        return s * r.value

    def lst_deficit(s):
        s, scalar = _as_array(s)
        out = np.array([_deficit_one(float(v)) for v in np.atleast_1d(s)])
        return _maybe_scalar(out.reshape(s.shape) if not scalar else out[0], scalar)

    def lst(s):
        s, scalar = _as_array(s)
        d = lst_deficit(s)
        return _maybe_scalar(1.0 - np.asarray(d), scalar)

    def sampler(rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random(size)
        return scale * np.power(-np.log(u), 1.0 / shape)

    return TailDistribution(
        kind="weibull",
        mean=mean,
        variance=variance,
        tail=tail,
        density=density,
        lst=lst,
        lst_deficit=lst_deficit,
        sampler=sampler,
        params={"shape": shape, "scale": scale},
    )


def forward_tail(d: TailDistribution, x) -> float | np.ndarray:
    """P(B^fw > x) = int_x^inf P(B > u) du / E[B]: the integrated tail.

    Closed form for the pareto / exponential / deterministic kinds,
    quadrature otherwise.
    """
    if not math.isfinite(d.mean):
        raise ConfigurationError("forward recurrence needs a finite mean")
    xa, scalar = _as_array(x)
    xa = np.maximum(xa, 0.0)
    if d.kind == "exponential":
        out = np.exp(-xa / d.mean)
    elif d.kind == "deterministic":
        v = d.params["value"]
        out = np.maximum(0.0, (v - xa) / v)
    elif d.kind == "pareto":
        nu, x_m = d.params["nu"], d.params["x_m"]
        c_b = x_m**nu
        above = c_b * np.power(np.maximum(xa, x_m), 1.0 - nu) / ((nu - 1.0) * d.mean)
        below = (x_m - xa + x_m / (nu - 1.0)) / d.mean
        out = np.where(xa < x_m, below, above)
    else:
        out = np.array(
            [
                integrate_semi_infinite(
                    d.tail, float(v), tol=1e-10, scale=d.mean + 0.5 * float(v)
                ).value
                / d.mean
                for v in np.atleast_1d(xa)
            ]
        )
        if not scalar:
            out = out.reshape(xa.shape)
        else:
            out = out[0]
    return _maybe_scalar(np.asarray(out), scalar)


def forward_recurrence(d: TailDistribution) -> ForwardRecurrence:
    """Wrap a law's integrated tail as a ForwardRecurrence object."""
    return ForwardRecurrence(base=d, tail=lambda x: forward_tail(d, x))


def truncated_mean(d: TailDistribution, a, b) -> float | np.ndarray:
    """E[B 1{a < B <= b}], vectorized over (a, b).

    Closed form for the pareto / exponential / deterministic kinds,
    quadrature over the density otherwise.
    """
    aa, a_scalar = _as_array(a)
    bb, b_scalar = _as_array(b)
    aa, bb = np.broadcast_arrays(np.maximum(aa, 0.0), np.maximum(bb, 0.0))
    scalar = a_scalar and b_scalar
    if d.kind == "pareto":
        nu, x_m = d.params["nu"], d.params["x_m"]
        c_b = x_m**nu
        lo = np.maximum(aa, x_m)
        hi = np.maximum(bb, x_m)
        out = nu * c_b * (np.power(lo, 1.0 - nu) - np.power(hi, 1.0 - nu)) / (nu - 1.0)
        out = np.where(bb <= aa, 0.0, out)
    elif d.kind == "exponential":
        r = d.params["rate"]
        f = lambda t: (t + 1.0 / r) * np.exp(-r * t)
        out = np.where(bb <= aa, 0.0, f(aa) - f(bb))
    elif d.kind == "deterministic":
        v = d.params["value"]
        out = np.where((aa < v) & (v <= bb), v, 0.0)
    else:
        flat_a, flat_b = np.ravel(aa), np.ravel(bb)
        vals = np.zeros(len(flat_a))
        for i, (lo, hi) in enumerate(zip(flat_a, flat_b)):
            if hi <= lo:
                continue
            vals[i] = integrate_adaptive(
                lambda z: z * np.asarray(d.density(z)), float(lo), float(hi), tol=1e-11
            ).value
        out = vals.reshape(aa.shape)
    return _maybe_scalar(np.asarray(out), scalar)


@dataclass(frozen=True)
class TailClassReport:
    """Finite-x ratio diagnostics for the heavy-tail distribution classes.

    The flags are evidence at the largest grid point, not proofs: a law
    is flagged long-tailed when tail(x+1)/tail(x) is near 1, dominated
    variation when tail(2x)/tail(x) stays bounded away from 0, and
    intermediate regularly varying when tail(1.01 x)/tail(x) is near 1.
    """

    x: np.ndarray
    long_ratio: np.ndarray        # tail(x+1)/tail(x)
    dominance_ratio: np.ndarray   # tail(2x)/tail(x)
    irv_ratio_101: np.ndarray     # tail(1.01x)/tail(x)
    irv_ratio_110: np.ndarray     # tail(1.1x)/tail(x)
    long_tailed_evidence: bool
    dominated_variation_evidence: bool
    irv_evidence: bool


def tail_class_diagnostics(d: TailDistribution, grid) -> TailClassReport:
    """Evaluate the class-membership ratios of a law on an x grid."""
    x = np.asarray(grid, dtype=float)
    if x.ndim != 1 or len(x) == 0 or np.any(np.diff(x) <= 0) or x[0] <= 0:
        raise ConfigurationError("grid must be increasing and positive")
    t = np.asarray(d.tail(x), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        long_ratio = np.asarray(d.tail(x + 1.0)) / t
        dom_ratio = np.asarray(d.tail(2.0 * x)) / t
        irv_101 = np.asarray(d.tail(1.01 * x)) / t
        irv_110 = np.asarray(d.tail(1.1 * x)) / t
    return TailClassReport(
        x=x,
        long_ratio=long_ratio,
        dominance_ratio=dom_ratio,
        irv_ratio_101=irv_101,
        irv_ratio_110=irv_110,
        long_tailed_evidence=bool(long_ratio[-1] > 0.9),
        dominated_variation_evidence=bool(np.min(dom_ratio) > 0.05),
        irv_evidence=bool(irv_101[-1] > 0.95),
    )
