"""Compiled inner loops (numba) for sliding maxima and the model recursions."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def sliding_max(x, b):
    n = x.shape[0]
    out = np.empty(n - b + 1, dtype=x.dtype)
    # ring buffer of indices whose values are strictly decreasing front to back
    q = np.empty(n, dtype=np.int64)
    head = 0
    tail = 0
    for i in range(n):
        while tail > head and x[q[tail - 1]] <= x[i]:
            tail -= 1
        q[tail] = i
        tail += 1
        if q[head] <= i - b:
            head += 1
        if i >= b - 1:
            out[i - b + 1] = x[q[head]]
    return out


@njit(cache=True, nogil=True)
def armax_path(x0, innov, alpha):
    n = innov.shape[0]
    out = np.empty(n)
    prev = x0
    for s in range(n):
        a = alpha * prev
        c = (1.0 - alpha) * innov[s]
        prev = a if a > c else c
        out[s] = prev
    return out


@njit(cache=True, nogil=True)
def squared_arch_path(x0, z, lam, omega):
    n = z.shape[0]
    out = np.empty(n)
    prev = x0
    for s in range(n):
        prev = (omega + lam * prev) * z[s] * z[s]
        out[s] = prev
    return out


@njit(cache=True, nogil=True)
def arch_path(x0, z, lam, omega):
    n = z.shape[0]
    out = np.empty(n)
    prev = x0
    for s in range(n):
        prev = np.sqrt(omega + lam * prev * prev) * z[s]
        out[s] = prev
    return out


@njit(cache=True, nogil=True)
def clayton_chain(u0, w, vartheta):
    n = w.shape[0]
    out = np.empty(n)
    v = 1.0 - u0
    e = -vartheta / (1.0 + vartheta)
    for s in range(n):
        v = ((w[s] ** e - 1.0) * v ** (-vartheta) + 1.0) ** (-1.0 / vartheta)
        out[s] = 1.0 - v
    return out


@njit(cache=True, nogil=True)
def clayton_theta_terms(reps, vartheta, floor, max_factors, seed):
    """Rao-Blackwellised draws of ``P(max_t prod A_s <= U | A)``, one per replication.

    Uses numba's own generator seeded with ``seed``; the number of factors per
    replication varies, so the draws cannot be pre-allocated.
    """
    np.random.seed(seed)
    out = np.empty(reps)
    e = -vartheta / (1.0 + vartheta)
    inv = 1.0 / vartheta
    truncated = 0
    for r in range(reps):
        prod = 1.0
        peak = 0.0
        t = 0
        while peak < 1.0 and prod >= floor and t < max_factors:
            u = np.random.random()
            prod *= ((1.0 - u) ** e - 1.0) ** inv
            if prod > peak:
                peak = prod
            t += 1
        if t >= max_factors:
            truncated += 1
        out[r] = 1.0 - peak if peak < 1.0 else 0.0
    return out, truncated
