"""Single-server queue under random order of service.

A library for cross-validating the waiting-time tail behavior of the
GI/G/1 queue under random order of service: an instrumented
discrete-event simulator, an exact Laplace-Stieltjes transform engine
for the M/G/1 case, and evaluators for the busy-period, waiting-time,
and heavy-traffic asymptotics.
"""

from rosqueue.numerics import (
    QuadratureResult,
    RootResult,
    integrate_adaptive,
    integrate_semi_infinite,
    gamma_fn,
    bessel_k1,
    find_root_bracketed,
)
from rosqueue.distributions import (
    TailDistribution,
    RegVaryingSpec,
    ForwardRecurrence,
    make_pareto,
    make_exponential,
    make_deterministic,
    make_weibull,
    forward_tail,
    tail_class_diagnostics,
)
from rosqueue.desim import (
    Discipline,
    QueueModel,
    SimRun,
    simulate,
    simulate_conditional_wq,
    empirical_ccdf,
    ks_distance,
)
from rosqueue.transforms import LstEvaluator
from rosqueue import asymptotics

__version__ = "0.1.0"
