"""Dense bounded-variable simplex and the benchmark linear programs.

All benchmark LPs here share one shape: maximize c·x subject to A x ≤ b
and box bounds 0 ≤ x ≤ u, with A, b, u nonnegative, so x = 0 is always
feasible and the problem is always bounded. The solver is a revised
simplex with explicit upper-bound handling and Bland's rule; it returns
a deterministic optimal vertex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LpError
from .model import Instance, ArrivalPath, arrival_counts, make_instance

_TOL = 1e-9
_REFACTOR_EVERY = 100


@dataclass(frozen=True)
class BoxLp:
    """max c·x  s.t.  A x ≤ b,  0 ≤ x ≤ u  (dense, b ≥ 0, u ≥ 0)."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    u: np.ndarray


@dataclass(frozen=True)
class LpSolution:
    status: str
    x: np.ndarray
    objective_value: float


def solve_box_lp(p: BoxLp) -> LpSolution:
    """Solve a BoxLp to a vertex optimum.

    Bounded-variable revised simplex: nonbasic variables rest at either
    bound, entering/leaving chosen by Bland's rule (lowest index) for
    termination under degeneracy. Dense explicit basis inverse with
    periodic refactorization.

    Raises:
        LpError("numerical-failure") if the iteration cap 50·(n+m) is
        exceeded or the basis becomes singular.
    """
    c = np.asarray(p.c, dtype=np.float64).reshape(-1)
    A = np.asarray(p.A, dtype=np.float64)
    b = np.asarray(p.b, dtype=np.float64).reshape(-1)
    u = np.asarray(p.u, dtype=np.float64).reshape(-1)
    m, n = A.shape
    if np.any(b < 0) or np.any(u < 0):
        raise LpError("numerical-failure", "BoxLp requires b ≥ 0 and u ≥ 0")

    N = n + m
    M = np.hstack([A, np.eye(m)])
    c_ext = np.concatenate([c, np.zeros(m)])
    u_ext = np.concatenate([u, np.full(m, np.inf)])

    basis = np.arange(n, N)
    in_basis = np.zeros(N, dtype=bool)
    in_basis[basis] = True
    at_upper = np.zeros(N, dtype=bool)
    B_inv = np.eye(m)
    x_B = b.astype(np.float64).copy()

    cap = 50 * (n + m)
    for it in range(cap + 1):
        if it == cap:
            raise LpError("numerical-failure", f"iteration cap {cap} exceeded")
        if it and it % _REFACTOR_EVERY == 0:
            try:
                B_inv = np.linalg.inv(M[:, basis])
            except np.linalg.LinAlgError as exc:
                raise LpError("numerical-failure", "singular basis") from exc
            x_N = np.where(at_upper, u_ext, 0.0)
            x_N[basis] = 0.0
            x_B = B_inv @ (b - M @ x_N)

        y = c_ext[basis] @ B_inv
        d = c_ext - y @ M
        eligible = ~in_basis & ((~at_upper & (d > _TOL)) | (at_upper & (d < -_TOL)))
        idx = np.nonzero(eligible)[0]
        if idx.size == 0:
            break
        q = int(idx[0])
        sigma = -1.0 if at_upper[q] else 1.0

        w = B_inv @ M[:, q]
        sw = sigma * w
        # candidate step limits: (limit, variable index blocking)
        limits = [(u_ext[q], q)]
        dec = sw > _TOL
        for i in np.nonzero(dec)[0]:
            limits.append((x_B[i] / sw[i], int(basis[i])))
        inc = sw < -_TOL
        for i in np.nonzero(inc)[0]:
            ub = u_ext[basis[i]]
            if np.isfinite(ub):
                limits.append(((ub - x_B[i]) / (-sw[i]), int(basis[i])))
        delta = min(v for v, _ in limits)
        if not np.isfinite(delta):
            raise LpError("numerical-failure", "unbounded direction in a box LP")
        delta = max(delta, 0.0)
        # Bland tie-break: lowest-index blocker among those at the minimum
        blocker = min(v for lim, v in limits if lim <= delta + 1e-10)

        x_B -= sigma * delta * w
        if blocker == q:
            at_upper[q] = ~at_upper[q]
            continue
        pos = int(np.nonzero(basis == blocker)[0][0])
        leaving = basis[pos]
        # the leaving variable sits at whichever bound stopped the step
        at_upper[leaving] = sw[pos] < 0
        in_basis[leaving] = False
        basis[pos] = q
        in_basis[q] = True
        x_B[pos] = (u_ext[q] if at_upper[q] else 0.0) + sigma * delta
        at_upper[q] = False
        piv = w[pos]
        if abs(piv) < 1e-12:
            raise LpError("numerical-failure", "near-zero pivot")
        B_inv[pos, :] /= piv
        others = np.arange(m) != pos
        B_inv[others, :] -= np.outer(w[others], B_inv[pos, :])

    x = np.where(at_upper[:n], u, 0.0)
    sel = basis < n
    x[basis[sel]] = x_B[sel]
    np.clip(x, 0.0, None, out=x)
    return LpSolution(status="optimal", x=x, objective_value=float(c @ x))


def solve_dlp(inst: Instance) -> LpSolution:
    """Expected-demand LP: max r·w s.t. A w ≤ C, 0 ≤ w_j ≤ λ_j·T."""
    return solve_box_lp(BoxLp(c=inst.r, A=inst.A, b=inst.C, u=inst.lam * inst.T))


def dlp_per_period(sol: LpSolution, T: int) -> np.ndarray:
    """Per-period allocation rates w*/T of a DLP solution."""
    return sol.x / T


def solve_rate_dlp(inst: Instance, B, L: float) -> LpSolution:
    """Per-period form on a sub-horizon: max r·x s.t. A x ≤ B/L, 0 ≤ x ≤ λ."""
    B = np.asarray(B, dtype=np.float64)
    return solve_box_lp(BoxLp(c=inst.r, A=inst.A, b=B / L, u=inst.lam))


def solve_hindsight(inst: Instance, path: ArrivalPath) -> LpSolution:
    """Clairvoyant LP: max r·z s.t. A z ≤ C, 0 ≤ z_j ≤ realized count of j."""
    counts = arrival_counts(path, 1, inst.T, n=inst.n).astype(np.float64)
    return solve_box_lp(BoxLp(c=inst.r, A=inst.A, b=inst.C, u=counts))


def lagrangian_value(inst: Instance, theta) -> float:
    """Closed-form dual bound: T·Σ_j λ_j·max(0, r_j − θ·A_j) + θ·C.

    At a fixed price vector θ the per-type subproblem is linear on
    [0, λ_j], so it is optimal to take all of a type exactly when its
    reduced revenue is positive; no LP solve is needed.
    """
    theta = np.asarray(theta, dtype=np.float64).reshape(-1)
    if np.any(theta < 0):
        raise LpError("negative-theta", "theta must be componentwise ≥ 0")
    reduced = inst.r - theta @ inst.A
    return float(inst.T * np.sum(inst.lam * np.maximum(reduced, 0.0)) + theta @ inst.C)


def perturb_revenues(inst: Instance, eta: float, seed: int) -> Instance:
    """Copy of the instance with r_j += Uniform[0, eta] i.i.d.

    Breaks revenue ties with probability one so the DLP optimum is
    unique; callers opt in, nothing perturbs implicitly.
    """
    if eta <= 0:
        raise ValueError(f"eta = {eta} must be > 0")
    rng = np.random.Generator(np.random.PCG64(seed))
    xi = rng.random(inst.n) * eta
    return make_instance(inst.lam, inst.r + xi, inst.A, inst.C, inst.T)
