"""Numba kernels for the event loops.

The service loop is the only part of a run that depends on the
discipline; everything else (workload, busy periods) is derived from the
shared arrival/service arrays outside the kernel.  Queue layout: one
int64 buffer of length n with a moving head.  Each customer is enqueued
at most once, so head + qlen never exceeds n.
"""

import numpy as np
from numba import njit

FCFS = 0
ROS = 1
RANDOM_INSERTION = 2


@njit(cache=True)
def serve(arr_t, svc, disc, u):
    """Run the single-server non-idling service loop.

    arr_t : ascending absolute arrival times (n,)
    svc   : service requirement per arrival index (n,)
    disc  : 0 FCFS, 1 ROS, 2 random insertion
    u     : uniforms; ROS consumes one per dequeue, random insertion one
            per queued arrival (indexed by arrival), FCFS none

    Returns (start, b_rp, nq): service start time, residual service of
    the customer in service at arrival (0 if idle), and number waiting
    at arrival.  Ties between a completion and an arrival process the
    completion first.
    """
    n = arr_t.shape[0]
    start = np.zeros(n)
    b_rp = np.zeros(n)
    nq = np.zeros(n, np.int64)
    queue = np.zeros(n, np.int64)
    head = 0
    qlen = 0
    k = 0  # ROS draw counter
    busy = False
    server_end = 0.0
    i = 0
    started = 0
    while started < n:
        if busy and (i >= n or server_end <= arr_t[i]):
            t = server_end
            if qlen > 0:
                if disc == ROS:
                    j = head + int(u[k] * qlen)
                    if j >= head + qlen:
                        j = head + qlen - 1
                    k += 1
                    tmp = queue[j]
                    queue[j] = queue[head]
                    queue[head] = tmp
                cust = queue[head]
                head += 1
                qlen -= 1
                start[cust] = t
                server_end = t + svc[cust]
                started += 1
            else:
                busy = False
        else:
            if busy:
                b_rp[i] = server_end - arr_t[i]
                nq[i] = qlen
                if disc == RANDOM_INSERTION:
                    pos = int(u[i] * (qlen + 1))
                    if pos > qlen:
                        pos = qlen
                    for m in range(head + qlen, head + pos, -1):
                        queue[m] = queue[m - 1]
                    queue[head + pos] = i
                else:
                    queue[head + qlen] = i
                qlen += 1
            else:
                start[i] = arr_t[i]
                server_end = arr_t[i] + svc[i]
                busy = True
                started += 1
            i += 1
    return start, b_rp, nq


@njit(cache=True)
def lindley(svc, gaps):
    """Workload found by each arrival: v[i+1] = max(0, v[i] + b[i] - g[i])."""
    n = svc.shape[0]
    v = np.zeros(n)
    for i in range(n - 1):
        w = v[i] + svc[i] - gaps[i]
        v[i + 1] = w if w > 0.0 else 0.0
    return v


@njit(cache=True)
def conditional_wait(q, svc, gaps, sel):
    """Waiting time of a tagged customer among q initially queued.

    The server picks uniformly among the waiting customers at time 0 and
    at every completion; a fresh arrival stream (inter-arrival gaps)
    feeds the queue meanwhile.  By symmetry the tagged customer is the
    one selected with probability 1/qlen at each pick.  Returns -1.0 if
    any pre-drawn stream is exhausted (caller redraws larger).
    """
    t = 0.0
    qlen = q
    gi = 0
    if gaps.shape[0] == 0:
        return -1.0
    next_arr = gaps[0]
    gi = 1
    si = 0
    ki = 0
    while True:
        if ki >= sel.shape[0] or si >= svc.shape[0]:
            return -1.0
        pick = sel[ki]
        ki += 1
        if pick * qlen < 1.0:
            return t
        qlen -= 1
        end = t + svc[si]
        si += 1
        while next_arr < end:
            qlen += 1
            if gi >= gaps.shape[0]:
                return -1.0
            next_arr += gaps[gi]
            gi += 1
        t = end
