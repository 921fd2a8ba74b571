"""Independent oracles used by the unit tests.

Everything here is deliberately slow and dumb: brute-force vertex
enumeration for the small LPs, and a transliterated per-period loop for
the fluid-scale admission policy. The production code must agree with
these, not the other way round.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from nrmlab import ArrivalPath, Instance

_FEAS_TOL = 1e-7


def brute_force_box_lp(c, A, b, u) -> float:
    """Optimal value of max c·x s.t. A x <= b, 0 <= x <= u by enumerating
    candidate vertices.

    A vertex has n active constraints: every variable outside a "free"
    set F sits at 0 or its upper bound, and the free ones are pinned by
    an equal-sized set of tight rows. Feasible candidates only; the
    polytope contains 0 so a feasible candidate always exists.
    """
    c = np.asarray(c, dtype=np.float64).reshape(-1)
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    m, n = A.shape
    best = -np.inf
    for s in range(0, min(m, n) + 1):
        for free in itertools.combinations(range(n), s):
            fixed = [j for j in range(n) if j not in free]
            for rows in itertools.combinations(range(m), s):
                for corner in itertools.product(*[(0.0, u[j]) for j in fixed]):
                    x = np.empty(n)
                    x[fixed] = corner
                    if s:
                        rhs = b[list(rows)] - A[np.ix_(rows, fixed)] @ x[fixed]
                        sq = A[np.ix_(rows, free)]
                        try:
                            x[list(free)] = np.linalg.solve(sq, rhs)
                        except np.linalg.LinAlgError:
                            continue
                    if np.any(x < -_FEAS_TOL) or np.any(x > u + _FEAS_TOL):
                        continue
                    if np.any(A @ x > b + _FEAS_TOL):
                        continue
                    best = max(best, float(c @ x))
    return best


def reference_ff(inst: Instance, path: ArrivalPath, t1: int, t2: int,
                 B0, L: int, theta0=None):
    """Transliteration of the fluid-scale admission loop.

    Same accumulation order as the compiled kernel (plain ascending
    loops), so results match bit for bit: strict bid-price test,
    all-types feasibility guard before the arrival is examined, one
    subtract-then-clamp dual step per non-halted period.

    Returns (x, revenue, B, theta, halted_at, y_seq).
    """
    n, m = inst.n, inst.m
    A, r = inst.A, inst.r
    B = np.asarray(B0, dtype=np.float64).reshape(-1).copy()
    row_max = inst.A.max(axis=1)

    b_min, b_max = float(B.min()), float(B.max())
    alpha = np.zeros(m)
    for i in range(m):
        nz = A[i] > 0.0
        if np.any(nz):
            alpha[i] = float(np.max(r[nz] / A[i][nz]))
    tb = b_max / b_min * float(alpha.sum())
    D = tb * math.sqrt(m)
    G = b_max / L * math.sqrt(m) + inst.a_bar * math.sqrt(m)
    rate = B / L

    theta = np.zeros(m) if theta0 is None else np.asarray(theta0, dtype=np.float64).copy()
    x = np.zeros(n, dtype=np.int64)
    y_seq = []
    halted_at = None
    step = 0
    for t in range(t1, t2 + 1):
        if np.any(B < row_max):
            halted_at = t
            break
        j = int(path.types[t - 1])
        s = 0.0
        for i in range(m):
            s += theta[i] * A[i, j]
        y = 1 if r[j] > s else 0
        if y:
            for i in range(m):
                B[i] -= A[i, j]
            x[j] += 1
        eta = 0.0 if (D == 0.0 or G <= 0.0) else D / (G * math.sqrt(step + 1.0))
        for i in range(m):
            v = theta[i] - eta * (rate[i] - y * A[i, j])
            theta[i] = min(max(v, 0.0), tb)
        step += 1
        y_seq.append(y)
    revenue = float(r @ x)
    return x, revenue, B, theta, halted_at, y_seq


def random_small_instance(rng: np.random.Generator, n_max: int = 5,
                          m_max: int = 3, T_max: int = 60):
    """Random valid instance with small dimensions for property tests."""
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    lam = rng.random(n) + 0.05
    lam /= lam.sum()
    r = np.round(rng.random(n) * 9.0 + 0.5, 3)
    A = rng.integers(0, 3, size=(m, n)).astype(np.float64)
    # keep every resource purchasable so theta_bar stays finite
    A[A.sum(axis=1) == 0, 0] = 1.0
    # a type that consumes nothing breaks the dual capacity bound
    A[0, A.sum(axis=0) == 0] = 1.0
    T = int(rng.integers(4, T_max + 1))
    C = np.round(rng.random(m) * T + 1.0, 2)
    from nrmlab import make_instance
    return make_instance(lam, r, A, C, T)
