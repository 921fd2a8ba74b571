"""Replication engine: seeded policy runs, hindsight benchmarking with
common random numbers, regret aggregation, and trace auditing.

One replication = one arrival path evaluated twice, by the policy and by
the hindsight LP, so the regret estimate subtracts correlated values.
Replication i always draws its path from mix(base_seed, i); results land
in arrays indexed by i before any reduction, which makes reports
bit-identical no matter how many workers ran the replications.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import PolicyError
from .lp import solve_dlp, solve_hindsight
from .model import Instance, arrival_counts, derive_seed, sample_path
from .policies import (
    FdParams, PolicyTrace, Window, restart_schedule, run_fd, run_ff,
    run_hybrid, run_lpt, run_restart,
)

_POLICY_KINDS = ("ff", "fd", "lpt", "restart", "hybrid")


@dataclass(frozen=True)
class PolicySpec:
    """Named policy plus its tunables; the unit of dispatch for the
    replication engine and for the params column of reports.

    fd_exponents overrides the default (alpha, beta, gamma) plan wherever
    FD runs, including inside restart epochs. U and warm_start only apply
    to the epoch-based kinds; fd_floor is the epoch length below which
    restart falls back to plain FF.
    """

    kind: str
    fd_exponents: tuple[float, float, float] | None = None
    lpt_beta: float = 0.125
    lpt_d: float = -0.125
    U: int = 0
    warm_start: bool = False
    fd_floor: int = 100

    def __post_init__(self):
        if self.kind not in _POLICY_KINDS:
            raise PolicyError("invalid-parameter",
                              f"unknown policy kind {self.kind!r}")
        if self.fd_exponents is not None:
            object.__setattr__(self, "fd_exponents",
                               tuple(float(v) for v in self.fd_exponents))

    def params_label(self) -> str:
        """Short deterministic parameter string, "-" when all-default."""
        parts = []
        if self.fd_exponents is not None and self.kind != "lpt":
            a, b, g = self.fd_exponents
            parts.append(f"abg={a:g}/{b:g}/{g:g}")
        if self.kind in ("lpt", "hybrid"):
            parts.append(f"beta={self.lpt_beta:g};d={self.lpt_d:g}")
        if self.kind == "hybrid":
            parts.append(f"U={self.U}")
        if self.warm_start:
            parts.append("warm=1")
        return ";".join(parts) if parts else "-"


@dataclass(frozen=True)
class RegretReport:
    """Monte Carlo summary for one (policy, instance) pair.

    mean_regret averages V^HO − V^ALG over replications; stderr is the
    sample standard deviation of those gaps divided by sqrt(R).
    """

    policy_id: str
    instance_id: str
    replications: int
    mean_regret: float
    stderr: float
    mean_revenue: float
    mean_hindsight: float
    base_seed: int


@dataclass(frozen=True)
class AuditResult:
    ok: bool
    first_violation: str | None = None


def _dispatch(spec: PolicySpec, inst: Instance, path, record: bool) -> PolicyTrace:
    if spec.kind == "ff":
        return run_ff(inst, path, record=record)
    if spec.kind == "fd":
        params = (FdParams(*spec.fd_exponents, L=inst.T)
                  if spec.fd_exponents is not None else None)
        return run_fd(inst, path, params=params, record=record)
    if spec.kind == "lpt":
        return run_lpt(inst, path, beta=spec.lpt_beta, d=spec.lpt_d,
                       record=record)
    sched = restart_schedule(inst.T, U=spec.U if spec.kind == "hybrid" else 0,
                             warm_start=spec.warm_start)
    if spec.kind == "restart":
        return run_restart(inst, path, sched, fd_exponents=spec.fd_exponents,
                           fd_floor=spec.fd_floor, record=record)
    return run_hybrid(inst, path, sched, lpt_beta=spec.lpt_beta,
                      lpt_d=spec.lpt_d, fd_exponents=spec.fd_exponents,
                      fd_floor=spec.fd_floor, record=record)


def simulate(spec: PolicySpec, inst: Instance, seed: int,
             record: bool = False) -> PolicyTrace:
    """Sample one path from seed and run the policy over the full
    horizon starting from B = C."""
    return _dispatch(spec, inst, sample_path(inst, seed), record)


def _replicate_span(spec, inst, base_seed, lo, hi):
    out = np.empty((hi - lo, 2))
    for i in range(lo, hi):
        path = sample_path(inst, derive_seed(base_seed, i))
        out[i - lo, 0] = _dispatch(spec, inst, path, False).revenue
        out[i - lo, 1] = solve_hindsight(inst, path).objective_value
    return out


def regret_samples(spec: PolicySpec, inst: Instance, R: int, base_seed: int,
                   threads: int = 1) -> np.ndarray:
    """Per-replication (V^ALG, V^HO) pairs, shape (R, 2), row i from the
    path seeded by mix(base_seed, i). Both columns of a row come from
    the same path object."""
    if R < 1:
        raise ValueError(f"R = {R} must be >= 1")
    if threads <= 1 or R < 2 * threads:
        return _replicate_span(spec, inst, base_seed, 0, R)
    cuts = np.linspace(0, R, threads + 1, dtype=int)
    out = np.empty((R, 2))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futs = [(lo, pool.submit(_replicate_span, spec, inst, base_seed, lo, hi))
                for lo, hi in zip(cuts[:-1], cuts[1:]) if hi > lo]
        for lo, fut in futs:
            part = fut.result()
            out[lo:lo + len(part)] = part
    return out


def estimate_regret(spec: PolicySpec, inst: Instance, R: int, base_seed: int,
                    threads: int = 1,
                    instance_id: str | None = None) -> RegretReport:
    """Estimate E[V^HO − V^ALG] over R common-random-number replications.

    Args:
        spec: policy under test
        inst: problem instance; every replication starts from B = C
        R: replication count, at least 2 so stderr is defined
        base_seed: root of the per-replication seed derivation
        threads: worker processes; any value yields the same report
        instance_id: label for the report, defaults to a shape tag

    Returns:
        RegretReport with sample mean and stderr (divisor R − 1).
    """
    if R < 2:
        raise ValueError(f"R = {R} must be >= 2 for a standard error")
    samples = regret_samples(spec, inst, R, base_seed, threads)
    gaps = samples[:, 1] - samples[:, 0]
    return RegretReport(
        policy_id=spec.kind,
        instance_id=instance_id or f"n{inst.n}-m{inst.m}-T{inst.T}",
        replications=R,
        mean_regret=float(gaps.mean()),
        stderr=float(gaps.std(ddof=1) / math.sqrt(R)),
        mean_revenue=float(samples[:, 0].mean()),
        mean_hindsight=float(samples[:, 1].mean()),
        base_seed=base_seed)


def audit_trace(trace: PolicyTrace, inst: Instance, path,
                window: Window | None = None, B0=None) -> AuditResult:
    """Feasibility and accounting audit of one trace.

    Checks, in order: acceptance counts within realized arrivals for the
    window, exact ledger conservation B_final = B0 − A x, nonnegativity
    of every reported ledger (1e-9 slack for real-valued capacities),
    and exact revenue accounting r·x. Reports the first failure by name.
    """
    window = window or Window(1, inst.T)
    B0 = np.asarray(inst.C if B0 is None else B0, dtype=np.float64).reshape(-1)
    counts = arrival_counts(path, window.t_start, window.t_end, inst.n)
    x = trace.x
    if np.any(x < 0) or np.any(x > counts):
        return AuditResult(False, "acceptance-exceeds-arrivals")
    if not np.array_equal(trace.ledger.B, B0 - inst.A @ x.astype(np.float64)):
        return AuditResult(False, "conservation")
    for name, arr in (("capacity", trace.ledger.B),
                      ("virtual-capacity", trace.ledger.B_prime),
                      ("cleanup-capacity", trace.ledger.B_dprime)):
        if arr is not None and float(np.min(arr)) < -1e-9:
            return AuditResult(False, f"negative-{name}")
    if trace.revenue != float(inst.r @ x.astype(np.float64)):
        return AuditResult(False, "revenue-accounting")
    return AuditResult(True, None)


def concentration_probe(family, scales, R: int, base_seed: int):
    """Deviation of FF acceptance counts from the allocation LP optimum,
    one row per scale.

    family maps a scale k to an Instance whose LP optimum w* is unique
    (perturb revenues first when in doubt). Each replication measures
    max_j |x_j − w*_j| / sqrt(T·ln T) on a fresh path; rows carry the
    mean over R replications.

    Returns
    -------
    list of (k, mean_ratio) tuples in the given scale order.
    """
    rows = []
    for k in scales:
        inst = family(k)
        w_star = solve_dlp(inst).x
        denom = math.sqrt(inst.T * math.log(inst.T))
        total = 0.0
        for i in range(R):
            path = sample_path(inst, derive_seed(base_seed, i))
            x = run_ff(inst, path).x
            total += float(np.max(np.abs(x - w_star))) / denom
        rows.append((k, total / R))
    return rows
