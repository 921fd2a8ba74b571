"""Compiled inner loops for the per-period policy machinery.

Each kernel walks a span of periods [t0, t1] (0-based, inclusive) over a
realized arrival sequence, mutating the capacity ledger(s), the accepted
counts x, and the dual vector theta in place. The Python wrappers in
``policies`` own all orchestration, validation, and trace assembly; the
kernels are pure arithmetic and mirror the per-step contracts of the
``ogd`` module exactly (strict bid-price test, subtract-then-clamp dual
update, eta = D/(G*sqrt(step+1))).

The all-types feasibility guard "A_j <= B for all j" is evaluated as
B_i >= row_max_i with row_max the per-resource maximum consumption,
which is equivalent and O(m) per period.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _serves_all(B, row_max):
    for i in range(B.shape[0]):
        if B[i] < row_max[i]:
            return False
    return True


@njit(cache=True)
def _eta(D, G, step):
    if D == 0.0 or G <= 0.0:
        return 0.0
    return D / (G * np.sqrt(step + 1.0))


@njit(cache=True)
def _bid_accept(theta, A, r, j):
    s = 0.0
    for i in range(theta.shape[0]):
        s += theta[i] * A[i, j]
    return r[j] > s


@njit(cache=True)
def _dual_update(theta, A, j, y, rate, eta, theta_bar):
    for i in range(theta.shape[0]):
        v = theta[i] - eta * (rate[i] - y * A[i, j])
        if v < 0.0:
            v = 0.0
        elif v > theta_bar:
            v = theta_bar
        theta[i] = v


@njit(cache=True)
def ff_span(types, t0, t1, r, A, row_max, B, x, rate, theta,
            theta_bar, D, G, step0, want_log, y_log, z_log, th_log):
    """Fluid-scale admission loop: bid-price decide, consume, dual step.

    Halts (rejecting the rest of the span, no further dual steps) the
    first period the ledger cannot serve every type. Returns
    (halted_at, steps) with halted_at = -1 if the span completed.
    """
    m = theta.shape[0]
    steps = step0
    for t in range(t0, t1 + 1):
        if not _serves_all(B, row_max):
            return t, steps
        j = types[t]
        y = 1 if _bid_accept(theta, A, r, j) else 0
        if y == 1:
            for i in range(m):
                B[i] -= A[i, j]
            x[j] += 1
        _dual_update(theta, A, j, y, rate, _eta(D, G, steps), theta_bar)
        steps += 1
        if want_log:
            y_log[t] = y
            z_log[t] = y
            for i in range(m):
                th_log[t, i] = theta[i]
    return -1, steps


@njit(cache=True)
def fd_phase2(types, t0, t1, r, A, row_max, cls, B, Bp, x, rate, theta,
              theta_bar, D, G, step0, want_log, y_log, z_log, th_log):
    """Thresholded admission with a virtual dual subroutine.

    cls codes: 0 = dual-managed, 1 = force-accept, 2 = force-reject.
    The subroutine (y, B', theta) runs every period while B' serves all
    types and freezes permanently once it cannot; class only shapes the
    real decision z. The real ledger breaks the phase when it cannot
    serve all types. Returns (broke_at, steps), broke_at = -1 if none.
    """
    m = theta.shape[0]
    steps = step0
    alive = True
    for t in range(t0, t1 + 1):
        if not _serves_all(B, row_max):
            return t, steps
        j = types[t]
        if alive and not _serves_all(Bp, row_max):
            alive = False
        y = 0
        if alive:
            y = 1 if _bid_accept(theta, A, r, j) else 0
        c = cls[j]
        if c == 2:
            z = 0
        elif c == 1:
            z = 1
        else:
            z = y
        if alive:
            if y == 1:
                for i in range(m):
                    Bp[i] -= A[i, j]
            _dual_update(theta, A, j, y, rate, _eta(D, G, steps), theta_bar)
            steps += 1
        if z == 1:
            for i in range(m):
                B[i] -= A[i, j]
            x[j] += 1
        if want_log:
            y_log[t] = y
            z_log[t] = z
            for i in range(m):
                th_log[t, i] = theta[i]
    return -1, steps


@njit(cache=True)
def fd_phase3(types, t0, t1, r, A, row_max, B, Bpp, x, rate, theta,
              theta_bar, D, G, step0, want_log, y_log, z_log, th_log):
    """Virtual-capacity cleanup: the dual runs against B'' while it
    serves all types; the real decision copies y only when the arriving
    type fits the real ledger. Returns (virtual_halt_at, steps)."""
    m = theta.shape[0]
    steps = step0
    for t in range(t0, t1 + 1):
        if not _serves_all(Bpp, row_max):
            return t, steps
        j = types[t]
        y = 1 if _bid_accept(theta, A, r, j) else 0
        fits = True
        for i in range(m):
            if A[i, j] > B[i]:
                fits = False
                break
        z = y if fits else 0
        if y == 1:
            for i in range(m):
                Bpp[i] -= A[i, j]
        _dual_update(theta, A, j, y, rate, _eta(D, G, steps), theta_bar)
        steps += 1
        if z == 1:
            for i in range(m):
                B[i] -= A[i, j]
            x[j] += 1
        if want_log:
            y_log[t] = y
            z_log[t] = z
            for i in range(m):
                th_log[t, i] = theta[i]
    return -1, steps


@njit(cache=True)
def lpt_phase1(types, t0, t1, A, row_max, B, x, p, u, want_log, z_log):
    """Randomized fluid allocation: accept the type-j arrival of period
    t iff u[t - t0] < p_j, while the ledger serves every type. Returns
    the halt period, -1 if the span completed."""
    m = B.shape[0]
    for t in range(t0, t1 + 1):
        if not _serves_all(B, row_max):
            return t
        j = types[t]
        if u[t - t0] < p[j]:
            for i in range(m):
                B[i] -= A[i, j]
            x[j] += 1
            if want_log:
                z_log[t] = 1
    return -1
