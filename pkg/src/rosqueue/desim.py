"""Discrete-event simulation of the GI/G/1 queue.

Disciplines are non-preemptive and non-idling: first-come first-served,
random order of service (uniform pick at each completion), and random
insertion (an arrival takes a uniform position among the n+1 slots of
the waiting line, service in line order).  The latter two produce the
same waiting-time distribution.

A run draws its arrival, service, and discipline randomness from three
separate substreams of the seed, so runs that differ only in discipline
share identical arrival/service paths.  Everything that does not depend
on the discipline (workload at arrivals, busy periods and their
residuals) is computed once from those shared arrays; a same-seed run
therefore reproduces them bit-exactly across disciplines.

Records are columnar: per recorded customer, arrays of arrival time,
service requirement, waiting time, workload found, residual service of
the customer in service, and residual busy period; per complete busy
period inside the record window, start time, length, and customer count.
The record window starts at the first busy-period boundary at or after
``warmup`` and spans ``n - warmup`` customers, so busy-period statistics
are not biased by a window cutting through a busy period.  The residual
busy period seen by an arrival into an empty system is 0 by convention.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from rosqueue import _kernels
from rosqueue.distributions import ConfigurationError, TailDistribution

__all__ = [
    "Discipline",
    "StabilityError",
    "QueueModel",
    "SimRun",
    "EmpiricalTail",
    "simulate",
    "simulate_conditional_wq",
    "empirical_ccdf",
    "ks_distance",
    "regenerative_mean_se",
]


class StabilityError(ValueError):
    """The offered load is at or above 1."""


class Discipline(enum.Enum):
    FCFS = "fcfs"
    ROS = "ros"
    RANDOM_INSERTION = "random_insertion"

    @property
    def code(self) -> int:
        return {"fcfs": _kernels.FCFS, "ros": _kernels.ROS,
                "random_insertion": _kernels.RANDOM_INSERTION}[self.value]


@dataclass(frozen=True)
class QueueModel:
    """Arrival law, service law, and discipline; load must be below 1."""

    arrival: TailDistribution
    service: TailDistribution
    discipline: Discipline = Discipline.FCFS

    def __post_init__(self):
        if isinstance(self.discipline, str):
            object.__setattr__(self, "discipline", Discipline(self.discipline))
        if not self.rho < 1.0:
            raise StabilityError(
                f"load rho = {self.rho:.4f} >= 1 (mean service {self.service.mean:g}, "
                f"mean inter-arrival {self.arrival.mean:g})"
            )

    @property
    def rho(self) -> float:
        return self.service.mean / self.arrival.mean

    def with_discipline(self, discipline) -> "QueueModel":
        return QueueModel(self.arrival, self.service, Discipline(discipline))


@dataclass
class SimRun:
    """Result of one simulation run (see module docstring for layout)."""

    model: QueueModel
    seed: int
    n: int
    warmup: int
    # per recorded customer
    arrival_time: np.ndarray
    service_req: np.ndarray
    wait: np.ndarray
    workload: np.ndarray
    b_rp: np.ndarray
    z_rp: np.ndarray
    queue_len: np.ndarray
    # per complete busy period inside the record window
    bp_start_time: np.ndarray
    bp_length: np.ndarray
    bp_customers: np.ndarray
    # bookkeeping
    record_start_index: int
    total_arrivals: int

    @property
    def service_start(self) -> np.ndarray:
        return self.arrival_time + self.wait

    @property
    def departure(self) -> np.ndarray:
        return self.arrival_time + self.wait + self.service_req

    def summary(self) -> dict:
        lam_hat = (len(self.arrival_time) - 1) / (self.arrival_time[-1] - self.arrival_time[0])
        mean_wait = float(np.mean(self.wait))
        # PASTA-style Little check: mean queue length seen by arrivals
        # against arrival rate times mean wait (== 1 for Poisson input).
        little = float(np.mean(self.queue_len)) / (lam_hat * mean_wait) if mean_wait > 0 else math.nan
        return {
            "discipline": self.model.discipline.value,
            "rho": self.model.rho,
            "n_recorded": len(self.wait),
            "mean_wait": mean_wait,
            "mean_workload": float(np.mean(self.workload)),
            "n_busy_periods": len(self.bp_length),
            "mean_busy_length": float(np.mean(self.bp_length)) if len(self.bp_length) else math.nan,
            "little_ratio": little,
        }

    def to_csv(self, path) -> None:
        cols = np.column_stack(
            [self.arrival_time, self.service_req, self.wait,
             self.workload, self.b_rp, self.z_rp]
        )
        np.savetxt(
            path, cols, fmt="%.17g", delimiter=",",
            header="arrival_time,service_req,wait,workload,b_rp,z_rp", comments="",
        )


def _substreams(seed: int, n: int = 3) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(n)]


def simulate(model: QueueModel, n: int, warmup: int = 0, seed: int = 0) -> SimRun:
    """Simulate ``n - warmup`` recorded customers of the model.

    The run is extended past the last recorded customer until the busy
    period containing it completes, so every recorded residual busy
    period is resolved.
    """
    if warmup < 0 or n <= warmup:
        raise ConfigurationError(f"need n > warmup >= 0, got n={n}, warmup={warmup}")
    arr_gen, svc_gen, disc_gen = _substreams(seed)

    n_rec = n - warmup
    m = n + max(1024, n // 8)
    gaps = model.arrival.sampler(arr_gen, m)
    svc = model.service.sampler(svc_gen, m)
    while True:
        workload = _kernels.lindley(svc, gaps[1:])
        zeros = np.flatnonzero(workload == 0.0)
        starts_after_warmup = zeros[zeros >= warmup]
        if len(starts_after_warmup) > 0:
            w0 = int(starts_after_warmup[0])
            last_rec = w0 + n_rec - 1
            ends_after = zeros[zeros > last_rec]
            if last_rec < len(svc) and len(ends_after) > 0:
                m_total = int(ends_after[0])
                break
        grow = max(1024, len(svc) // 4)
        gaps = np.concatenate([gaps, model.arrival.sampler(arr_gen, grow)])
        svc = np.concatenate([svc, model.service.sampler(svc_gen, grow)])

    gaps = gaps[:m_total]
    svc = svc[:m_total]
    workload = workload[:m_total]
    arr_t = np.cumsum(gaps)
    disc = model.discipline.code
    if disc == _kernels.FCFS:
        u = np.zeros(1)
    else:
        u = disc_gen.random(m_total)
    start, b_rp, nq = _kernels.serve(arr_t, svc, disc, u)
    wait = start - arr_t

    # Busy-period structure from the workload path (discipline-free).
    zeros = np.flatnonzero(workload == 0.0)
    last_member = np.append(zeros[1:] - 1, m_total - 1)
    bp_end_time = arr_t[last_member] + workload[last_member] + svc[last_member]
    bp_index = np.searchsorted(zeros, np.arange(m_total), side="right") - 1
    z_rp = np.where(workload > 0.0, bp_end_time[bp_index] - arr_t, 0.0)

    rec = slice(w0, last_rec + 1)
    inside = (zeros >= w0) & (last_member <= last_rec)
    return SimRun(
        model=model,
        seed=seed,
        n=n,
        warmup=warmup,
        arrival_time=arr_t[rec].copy(),
        service_req=svc[rec].copy(),
        wait=wait[rec].copy(),
        workload=workload[rec].copy(),
        b_rp=b_rp[rec].copy(),
        z_rp=z_rp[rec].copy(),
        queue_len=nq[rec].copy(),
        bp_start_time=arr_t[zeros[inside]].copy(),
        bp_length=(bp_end_time - arr_t[zeros])[inside].copy(),
        bp_customers=(last_member - zeros + 1)[inside].copy(),
        record_start_index=w0,
        total_arrivals=m_total,
    )


def simulate_conditional_wq(
    model: QueueModel, q: int, replications: int, seed: int = 0
) -> np.ndarray:
    """Waiting time of a tagged customer among q initially queued.

    Each replication starts at time 0 with q unserved customers (one of
    them tagged, uniformly) and a fresh arrival stream, runs the random
    order of service lottery, and records when the tagged customer
    enters service.  Returns the ``replications`` sampled waits.
    """
    if model.discipline is not Discipline.ROS:
        raise ConfigurationError("the conditional experiment is defined for ROS")
    if q < 1:
        raise ConfigurationError(f"need q >= 1, got {q}")
    out = np.empty(replications)
    children = np.random.SeedSequence(seed).spawn(replications)
    rho = model.rho
    base = int(1.3 * q / max(1e-9, 1.0 - rho)) + 64
    for r, child in enumerate(children):
        svc_gen, arr_gen, sel_gen = (
            np.random.Generator(np.random.PCG64(s)) for s in child.spawn(3)
        )
        m = base
        while True:
            w = _kernels.conditional_wait(
                q,
                model.service.sampler(svc_gen, m),
                model.arrival.sampler(arr_gen, m),
                sel_gen.random(m),
            )
            if w >= 0.0:
                out[r] = w
                break
            m *= 2
    return out


@dataclass(frozen=True)
class EmpiricalTail:
    """Right-continuous empirical ccdf with a DKW confidence band."""

    sorted_samples: np.ndarray
    confidence: float
    band_halfwidth: float

    @property
    def n(self) -> int:
        return len(self.sorted_samples)

    def ccdf(self, x):
        x = np.asarray(x, dtype=float)
        c = (self.n - np.searchsorted(self.sorted_samples, x, side="right")) / self.n
        return float(c) if c.ndim == 0 else c

    def band(self, x):
        c = np.asarray(self.ccdf(x))
        eps = self.band_halfwidth
        return np.clip(c - eps, 0.0, 1.0), np.clip(c + eps, 0.0, 1.0)


def empirical_ccdf(samples, confidence: float = 0.95) -> EmpiricalTail:
    """Empirical complementary cdf x -> #{samples > x} / n.

    The band half-width is the Dvoretzky-Kiefer-Wolfowitz bound
    sqrt(log(2 / (1 - confidence)) / (2 n)).
    """
    s = np.sort(np.asarray(samples, dtype=float))
    if len(s) == 0:
        raise ConfigurationError("empirical_ccdf needs a nonempty sample")
    if not 0.0 < confidence < 1.0:
        raise ConfigurationError(f"confidence must be in (0, 1), got {confidence}")
    eps = math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * len(s)))
    return EmpiricalTail(sorted_samples=s, confidence=confidence, band_halfwidth=eps)


def regenerative_mean_se(run: SimRun, values) -> tuple[float, float]:
    """Mean of per-customer values with a regenerative standard error.

    Waiting-time samples are correlated within a busy period, so the
    naive std/sqrt(n) understates the Monte-Carlo error.  Busy-period
    cycles are iid; the ratio estimator R = sum_k Y_k / sum_k tau_k over
    complete cycles (Y_k the cycle sum, tau_k the cycle size) has
    standard error sqrt(sum_k (Y_k - R tau_k)^2) / sum_k tau_k.

    Falls back to the naive estimate when the run contains no complete
    busy period.
    """
    vals = np.asarray(values, dtype=float)
    if len(vals) != len(run.wait):
        raise ConfigurationError("values must align with the run's records")
    if len(run.bp_customers) == 0:
        return float(np.mean(vals)), float(np.std(vals) / math.sqrt(len(vals)))
    starts = np.searchsorted(run.arrival_time, run.bp_start_time)
    tau = run.bp_customers.astype(np.int64)
    csum = np.concatenate([[0.0], np.cumsum(vals)])
    y = csum[starts + tau] - csum[starts]
    total = float(np.sum(tau))
    r = float(np.sum(y)) / total
    se = math.sqrt(float(np.sum((y - r * tau) ** 2))) / total
    return r, se


def ks_distance(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if len(a) == 0 or len(b) == 0:
        raise ConfigurationError("ks_distance needs nonempty samples")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / len(a)
    fb = np.searchsorted(b, grid, side="right") / len(b)
    return float(np.max(np.abs(fa - fb)))
