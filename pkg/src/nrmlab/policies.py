"""Admission policies: FF, FD, LPT, and the restart/hybrid meta-policies.

Naming used throughout:

* FF — fluid-scale primal-dual control: a single bid-price vector
  learned online by projected gradient descent, one decision per period.
* FD — diffusion-scale control: a short calibration phase, thresholding
  of types into force-accept / force-reject / dual-managed classes, a
  long middle phase driven by a virtual copy of the capacity ledger, and
  a cleanup phase against a capped virtual capacity.
* LPT — LP-based thresholding: one allocation LP per invocation,
  randomized rounding of its rates, then FF on the remainder.
* restart/hybrid — run FD (or LPT in the first U epochs) afresh on each
  epoch of a geometrically shrinking schedule, always on the physically
  remaining capacity.

Every run_* function walks one realized path over a 1-based inclusive
period window and returns an immutable PolicyTrace. Policies never look
ahead: decisions at period t depend only on arrivals up to t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import PolicyError, WindowError
from .lp import solve_rate_dlp
from .model import ArrivalPath, Instance, derive_seed
from .ogd import theta_bar as _theta_bar, ogd_constants

# stream tag for LPT's acceptance coin flips, distinct from path sampling
_LPT_STREAM_TAG = 0x4C5054


@dataclass(frozen=True)
class Window:
    """Period window [t_start, t_end], 1-based inclusive."""

    t_start: int
    t_end: int

    def length(self) -> int:
        return self.t_end - self.t_start + 1


def _check_window(window: Window, T: int) -> None:
    if not (1 <= window.t_start <= window.t_end <= T):
        raise WindowError("invalid-window",
                          f"[{window.t_start}, {window.t_end}] not within [1, {T}]")


@dataclass(frozen=True)
class CapacityLedger:
    """Final capacity snapshots: B is physically remaining capacity;
    B_prime / B_dprime are the virtual ledgers of FD's later phases,
    present only when those phases ran."""

    B: np.ndarray
    B_prime: np.ndarray | None = None
    B_dprime: np.ndarray | None = None


@dataclass(frozen=True)
class DecisionLog:
    """Optional per-period record over the full horizon: subroutine
    decision y, realized decision z, and the post-update dual vector.
    Periods outside the simulated window stay zero."""

    y: np.ndarray
    z: np.ndarray
    theta: np.ndarray


@dataclass(frozen=True)
class PolicyTrace:
    x: np.ndarray
    revenue: float
    ledger: CapacityLedger
    theta_final: np.ndarray | None
    halted_at: int | None
    decisions: DecisionLog | None = None


def _finish_trace(inst, B_start, x, theta_final, halted_at, decisions,
                  B_prime=None, B_dprime=None) -> PolicyTrace:
    # canonical ledger arithmetic: audits recompute this same product
    B_final = B_start - inst.A @ x.astype(np.float64)
    return PolicyTrace(
        x=x, revenue=float(inst.r @ x.astype(np.float64)),
        ledger=CapacityLedger(B=B_final, B_prime=B_prime, B_dprime=B_dprime),
        theta_final=theta_final, halted_at=halted_at, decisions=decisions)


def _log_arrays(T: int, m: int, record: bool):
    if record:
        return (np.zeros(T, dtype=np.int8), np.zeros(T, dtype=np.int8),
                np.zeros((T, m), dtype=np.float64))
    return (np.zeros(0, dtype=np.int8), np.zeros(0, dtype=np.int8),
            np.zeros((0, 0), dtype=np.float64))


def _exhausted_trace(inst, B0, window, theta, record) -> PolicyTrace:
    # some B_i ≤ 0: the all-types guard fails at entry, nothing is accepted
    log = DecisionLog(*_log_arrays(inst.T, inst.m, True)) if record else None
    return _finish_trace(inst, B0, np.zeros(inst.n, dtype=np.int64), theta,
                         window.t_start, log)


def run_ff(inst: Instance, path: ArrivalPath, window: Window | None = None,
           B=None, theta0=None, horizon: int | None = None,
           record: bool = False) -> PolicyTrace:
    """Run the fluid-scale bid-price policy over a window.

    Args:
        inst, path: problem data and one realized arrival sequence
        window: defaults to the full horizon
        B: starting capacity, defaults to inst.C
        theta0: initial duals (warm start), defaults to zero
        horizon: planning length L for the B/L rate and step constants;
            defaults to T − t_start + 1. Epoch and phase callers pass
            their own length here.
        record: attach a per-period DecisionLog

    Returns:
        PolicyTrace; halted_at is the first period (1-based) whose
        feasibility guard failed, or None.
    """
    window = window or Window(1, inst.T)
    _check_window(window, inst.T)
    B0 = np.array(inst.C if B is None else B, dtype=np.float64).reshape(-1).copy()
    L = horizon if horizon is not None else inst.T - window.t_start + 1
    if L < window.length():
        raise PolicyError("invalid-parameter",
                          f"horizon {L} shorter than window {window.length()}")
    theta_init = np.zeros(inst.m) if theta0 is None else \
        np.array(theta0, dtype=np.float64).reshape(-1).copy()
    if float(B0.min()) <= 0.0:
        return _exhausted_trace(inst, B0, window, theta_init, record)
    tb = _theta_bar(B0, inst)
    D, G = ogd_constants(B0, L, inst)
    theta = theta_init
    x = np.zeros(inst.n, dtype=np.int64)
    Bw = B0.copy()
    ylog, zlog, thlog = _log_arrays(inst.T, inst.m, record)
    halted, _ = K.ff_span(
        path.types, window.t_start - 1, window.t_end - 1, inst.r, inst.A,
        inst.row_max(), Bw, x, B0 / L, theta, tb, D, G, 0,
        record, ylog, zlog, thlog)
    log = DecisionLog(ylog, zlog, thlog) if record else None
    return _finish_trace(inst, B0, x, theta, None if halted < 0 else halted + 1, log)


@dataclass(frozen=True)
class FdParams:
    """Phase-plan exponents and the derived lengths for one horizon L.

    a = alpha governs the calibration length l1 = ceil(L^a); b = 1/2 +
    beta ends the thresholded phase at l1 + l2 with l2 = ceil(L − L^a −
    L^b) clamped to 0; c = alpha/2 + gamma sets the classification
    thresholds lambda_j·L^c and lambda_j·(L^a − L^c).
    """

    alpha: float
    beta: float
    gamma: float
    L: int
    a: float = field(init=False)
    b: float = field(init=False)
    c: float = field(init=False)
    l1: int = field(init=False)
    l2: int = field(init=False)

    def __post_init__(self):
        if not (0.0 < self.alpha < 0.5):
            raise PolicyError("invalid-parameter",
                              f"alpha = {self.alpha} must lie in (0, 1/2)")
        if not (self.alpha / 2 <= self.beta < 0.5):
            raise PolicyError("invalid-parameter",
                              f"beta = {self.beta} must lie in [alpha/2, 1/2)")
        if not (0.0 < self.gamma < self.alpha / 2):
            raise PolicyError("invalid-parameter",
                              f"gamma = {self.gamma} must lie in (0, alpha/2)")
        if self.L < 1:
            raise PolicyError("invalid-parameter", f"L = {self.L} must be ≥ 1")
        object.__setattr__(self, "a", self.alpha)
        object.__setattr__(self, "b", 0.5 + self.beta)
        object.__setattr__(self, "c", 0.5 * self.alpha + self.gamma)
        La = float(self.L) ** self.a
        Lb = float(self.L) ** self.b
        object.__setattr__(self, "l1", max(1, math.ceil(La)))
        object.__setattr__(self, "l2", max(0, math.ceil(self.L - La - Lb)))
        if self.l1 + self.l2 > self.L:
            raise PolicyError("horizon-too-short",
                              f"l1 + l2 = {self.l1 + self.l2} exceeds L = {self.L}")


def fd_default_params(L: int) -> FdParams:
    """Default exponents alpha = 3·lnln L/(2·ln L), beta = lnln L/ln L,
    gamma = 2·lnln L/(3·ln L), natural logarithms.

    Raises PolicyError("horizon-too-short") below L = 100, where the
    defaults lose validity.
    """
    if L < 100:
        raise PolicyError("horizon-too-short", f"L = {L}, defaults need L ≥ 100")
    lnL = math.log(L)
    lnln = math.log(lnL)
    try:
        return FdParams(alpha=1.5 * lnln / lnL, beta=lnln / lnL,
                        gamma=2.0 * lnln / (3.0 * lnL), L=L)
    except PolicyError as exc:
        raise PolicyError("horizon-too-short",
                          f"defaults invalid at L = {L}: {exc}") from exc


@dataclass(frozen=True)
class ThresholdClasses:
    """Disjoint force-accept / force-reject type sets; everything else
    stays dual-managed."""

    accept_set: frozenset[int]
    reject_set: frozenset[int]

    def codes(self, n: int) -> np.ndarray:
        cls = np.zeros(n, dtype=np.int8)
        for j in self.accept_set:
            cls[j] = 1
        for j in self.reject_set:
            cls[j] = 2
        return cls


def classify_types(x_phase1, inst: Instance, params: FdParams,
                   L: int | None = None) -> ThresholdClasses:
    """Classify types from calibration-phase acceptance counts.

    Literal branch order: reject when x_j < lambda_j·L^c, else accept
    when x_j > lambda_j·(L^a − L^c), else leave dual-managed. With the
    default exponents the two thresholds overlap at any realistic L, so
    the middle class is empty and this order decides everything.
    """
    L = params.L if L is None else L
    x_phase1 = np.asarray(x_phase1, dtype=np.float64).reshape(-1)
    Lc = float(L) ** params.c
    La = float(L) ** params.a
    rej, acc = [], []
    for j in range(inst.n):
        if x_phase1[j] < inst.lam[j] * Lc:
            rej.append(j)
        elif x_phase1[j] > inst.lam[j] * (La - Lc):
            acc.append(j)
    return ThresholdClasses(accept_set=frozenset(acc), reject_set=frozenset(rej))


def run_fd(inst: Instance, path: ArrivalPath, window: Window | None = None,
           B=None, params: FdParams | None = None, theta0=None,
           horizon: int | None = None, record: bool = False) -> PolicyTrace:
    """Run the diffusion-scale three-phase policy over a window.

    The plan horizon L (defaulting to T − t_start + 1) fixes the phase
    lengths; a window ending before the plan simply truncates the later
    phases. Each phase re-initializes the dual constants from its own
    capacity and length, chaining theta across phase boundaries; working
    capacity resets to B·(L−l1)/L at phase II, so calibration leftovers
    are deliberately not carried forward. The trace ledger still reports
    physically remaining capacity.
    """
    window = window or Window(1, inst.T)
    _check_window(window, inst.T)
    B0 = np.array(inst.C if B is None else B, dtype=np.float64).reshape(-1).copy()
    s, e = window.t_start, window.t_end
    L = horizon if horizon is not None else inst.T - s + 1
    if L < window.length():
        raise PolicyError("invalid-parameter",
                          f"horizon {L} shorter than window {window.length()}")
    params = params if params is not None else fd_default_params(L)
    if params.L != L:
        raise PolicyError("invalid-parameter",
                          f"params planned for L = {params.L}, run uses L = {L}")
    if float(B0.min()) <= 0.0:
        theta_init = np.zeros(inst.m) if theta0 is None else \
            np.array(theta0, dtype=np.float64).reshape(-1).copy()
        return _exhausted_trace(inst, B0, window, theta_init, record)
    l1, l2 = params.l1, params.l2
    row_max = inst.row_max()
    x = np.zeros(inst.n, dtype=np.int64)
    theta = np.zeros(inst.m) if theta0 is None else \
        np.array(theta0, dtype=np.float64).reshape(-1).copy()
    ylog, zlog, thlog = _log_arrays(inst.T, inst.m, record)
    halted_at = None
    Bp_final = None
    Bpp_final = None

    # phase I: miniature fluid run on proportionally scaled capacity
    p1_end = min(s + l1 - 1, e)
    B1 = B0 * (l1 / L)
    tb1 = _theta_bar(B1, inst)
    D1, G1 = ogd_constants(B1, l1, inst)
    h1, _ = K.ff_span(path.types, s - 1, p1_end - 1, inst.r, inst.A, row_max,
                      B1, x, B0 / L, theta, tb1, D1, G1, 0,
                      record, ylog, zlog, thlog)
    if h1 >= 0:
        halted_at = h1 + 1
    classes = classify_types(x, inst, params, L)

    # phase II: thresholded admission against working and virtual ledgers
    p2_start, p2_end = s + l1, min(s + l1 + l2 - 1, e)
    Bw = B0 * ((L - l1) / L)
    if p2_start <= p2_end:
        Bp = Bw.copy()
        tb2 = _theta_bar(Bw, inst)
        D2, G2 = ogd_constants(Bw, L - l1, inst)
        broke, _ = K.fd_phase2(
            path.types, p2_start - 1, p2_end - 1, inst.r, inst.A, row_max,
            classes.codes(inst.n), Bw, Bp, x, Bw / (L - l1), theta,
            tb2, D2, G2, 0, record, ylog, zlog, thlog)
        if broke >= 0 and halted_at is None:
            halted_at = broke + 1
        Bp_final = Bp

    # phase III: cleanup against capped virtual capacity
    p3_start = s + l1 + l2
    if p3_start <= e:
        L3 = L - l1 - l2
        Bpp = np.maximum(float(L) ** (0.75 * params.b),
                         np.minimum(Bw, inst.a_bar * float(L) ** params.b))
        tb3 = _theta_bar(Bpp, inst)
        D3, G3 = ogd_constants(Bpp, L3, inst)
        K.fd_phase3(path.types, p3_start - 1, e - 1, inst.r, inst.A, row_max,
                    Bw, Bpp, x, Bpp / L3, theta, tb3, D3, G3, 0,
                    record, ylog, zlog, thlog)
        Bpp_final = Bpp

    log = DecisionLog(ylog, zlog, thlog) if record else None
    return _finish_trace(inst, B0, x, theta, halted_at, log,
                         B_prime=Bp_final, B_dprime=Bpp_final)


def run_lpt(inst: Instance, path: ArrivalPath, window: Window | None = None,
            B=None, beta: float = 0.125, d: float = -0.125,
            rng: np.random.Generator | None = None,
            horizon: int | None = None, record: bool = False) -> PolicyTrace:
    """Run LP-based thresholding: randomized rounding of per-period LP
    rates for l1 = ceil(L − L^b) periods, then FF on what remains.

    Allocation rates x*_j come from max r·x s.t. A x ≤ B/L, 0 ≤ x ≤ λ.
    Acceptance probabilities snap to 0 or 1 when x*_j sits within
    λ_j·L^d of its bounds (d < 0), else equal x*_j/λ_j. The coin flips
    draw from rng; when omitted, a stream derived from the path seed
    keeps the run deterministic.
    """
    if not (0.0 < beta < 0.5):
        raise PolicyError("invalid-parameter", f"beta = {beta} must lie in (0, 1/2)")
    if d >= 0.0:
        raise PolicyError("invalid-parameter", f"d = {d} must be < 0")
    window = window or Window(1, inst.T)
    _check_window(window, inst.T)
    B0 = np.array(inst.C if B is None else B, dtype=np.float64).reshape(-1).copy()
    s, e = window.t_start, window.t_end
    L = horizon if horizon is not None else inst.T - s + 1
    if L < window.length():
        raise PolicyError("invalid-parameter",
                          f"horizon {L} shorter than window {window.length()}")
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(
            derive_seed(path.seed, _LPT_STREAM_TAG)))
    b = 0.5 + beta
    l1 = max(0, math.ceil(L - float(L) ** b))
    rates = solve_rate_dlp(inst, B0, L).x
    Ld = float(L) ** d
    p = rates / inst.lam
    p[rates < inst.lam * Ld] = 0.0
    p[rates > inst.lam * (1.0 - Ld)] = 1.0
    np.clip(p, 0.0, 1.0, out=p)

    x = np.zeros(inst.n, dtype=np.int64)
    Bw = B0.copy()
    ylog, zlog, thlog = _log_arrays(inst.T, inst.m, record)
    halted_at = None
    p1_end = min(s + l1 - 1, e)
    if s <= p1_end:
        u = rng.random(p1_end - s + 1)
        h = K.lpt_phase1(path.types, s - 1, p1_end - 1, inst.A, inst.row_max(),
                         Bw, x, p, u, record, zlog)
        if h >= 0:
            halted_at = h + 1
    theta_final = None
    if p1_end < e:
        sub = run_ff(inst, path, Window(p1_end + 1, e), B=Bw,
                     horizon=L - l1, record=record)
        x += sub.x
        theta_final = sub.theta_final
        if halted_at is None:
            halted_at = sub.halted_at
        if record:
            sl = slice(p1_end, e)
            ylog[sl] = sub.decisions.y[sl]
            zlog[sl] = sub.decisions.z[sl]
            thlog[sl] = sub.decisions.theta[sl]
    log = DecisionLog(ylog, zlog, thlog) if record else None
    return _finish_trace(inst, B0, x, theta_final, halted_at, log)


@dataclass(frozen=True)
class RestartSchedule:
    """Epoch plan: epoch u covers [T − taus[u] + 1, T − taus[u+1]] with a
    trailing 0 appended, so epochs partition [1, T]. U counts leading
    LP-based epochs (hybrid only); warm_start carries bid prices across
    epoch boundaries."""

    taus: tuple[int, ...]
    U: int = 0
    warm_start: bool = False

    def __post_init__(self):
        if not self.taus or any(t < 1 for t in self.taus):
            raise PolicyError("invalid-parameter", "taus must be positive")
        if any(a <= b for a, b in zip(self.taus, self.taus[1:])):
            raise PolicyError("invalid-parameter", "taus must strictly decrease")
        if not (0 <= self.U <= len(self.taus)):
            raise PolicyError("invalid-parameter",
                              f"U = {self.U} outside [0, {len(self.taus)}]")

    @property
    def epochs(self) -> int:
        return len(self.taus)


def restart_schedule(T: int, U: int = 0, warm_start: bool = False) -> RestartSchedule:
    """Geometric epoch lengths tau_u = ceil(T^((2/3)^u)) for u = 0..S,
    S = ceil(lnln T / ln(3/2)), deduplicated."""
    if T < 3:
        raise PolicyError("invalid-parameter", f"T = {T} must be ≥ 3")
    S = math.ceil(math.log(math.log(T)) / math.log(1.5))
    taus = []
    for u in range(S + 1):
        tau = math.ceil(float(T) ** ((2.0 / 3.0) ** u))
        if not taus or tau < taus[-1]:
            taus.append(tau)
    return RestartSchedule(taus=tuple(taus), U=U, warm_start=warm_start)


def _run_epochs(inst, path, schedule, B, fd_exponents, fd_floor,
                lpt_beta, lpt_d, rng, record):
    """Shared epoch engine for restart and hybrid."""
    T = inst.T
    if schedule.taus[0] != T:
        raise PolicyError("invalid-parameter",
                          f"schedule starts at tau = {schedule.taus[0]}, horizon is {T}")
    B0 = np.array(inst.C if B is None else B, dtype=np.float64).reshape(-1).copy()
    if rng is None and schedule.U > 0:
        rng = np.random.Generator(np.random.PCG64(
            derive_seed(path.seed, _LPT_STREAM_TAG)))
    x = np.zeros(inst.n, dtype=np.int64)
    theta_carry = None
    halted_at = None
    ylog, zlog, thlog = _log_arrays(T, inst.m, record)
    bounds = list(schedule.taus) + [0]
    for u, tau in enumerate(schedule.taus):
        t1, t2 = T - tau + 1, T - bounds[u + 1]
        B_phys = B0 - inst.A @ x.astype(np.float64)
        if float(B_phys.min()) <= 0.0:
            break
        theta0 = theta_carry if schedule.warm_start else None
        if u < schedule.U:
            sub = run_lpt(inst, path, Window(t1, t2), B=B_phys, beta=lpt_beta,
                          d=lpt_d, rng=rng, horizon=tau, record=record)
        elif tau >= fd_floor:
            params = (FdParams(*fd_exponents, L=tau) if fd_exponents
                      else fd_default_params(tau))
            sub = run_fd(inst, path, Window(t1, t2), B=B_phys, params=params,
                         theta0=theta0, horizon=tau, record=record)
        else:
            sub = run_ff(inst, path, Window(t1, t2), B=B_phys, theta0=theta0,
                         horizon=tau, record=record)
        x += sub.x
        if sub.theta_final is not None:
            theta_carry = sub.theta_final
        if halted_at is None and sub.halted_at is not None:
            halted_at = sub.halted_at
        if record:
            sl = slice(t1 - 1, t2)
            ylog[sl] = sub.decisions.y[sl]
            zlog[sl] = sub.decisions.z[sl]
            thlog[sl] = sub.decisions.theta[sl]
    log = DecisionLog(ylog, zlog, thlog) if record else None
    return _finish_trace(inst, B0, x, theta_carry, halted_at, log)


def run_restart(inst: Instance, path: ArrivalPath,
                schedule: RestartSchedule | None = None, B=None,
                fd_exponents: tuple[float, float, float] | None = None,
                fd_floor: int = 100, record: bool = False) -> PolicyTrace:
    """Re-run FD per epoch on physically remaining capacity.

    Epoch u gets plan horizon tau_u (its own distance to the horizon
    end), so constants and phase lengths rescale each epoch. Epochs
    shorter than fd_floor run plain FF instead. With warm_start set on
    the schedule, each epoch's duals start from the previous epoch's
    final theta; step counters always restart.
    """
    schedule = schedule or restart_schedule(inst.T)
    return _run_epochs(inst, path, schedule, B, fd_exponents, fd_floor,
                       0.125, -0.125, None, record)


def run_hybrid(inst: Instance, path: ArrivalPath, schedule: RestartSchedule,
               B=None, lpt_beta: float = 0.125, lpt_d: float = -0.125,
               rng: np.random.Generator | None = None,
               fd_exponents: tuple[float, float, float] | None = None,
               fd_floor: int = 100, record: bool = False) -> PolicyTrace:
    """Like run_restart, but the first schedule.U epochs run LPT.

    With lpt_beta < 1/6 an epoch always ends before LPT's own FF phase
    would begin, so those epochs consist purely of randomized LP
    rounding; U = 0 reduces to run_restart exactly.
    """
    return _run_epochs(inst, path, schedule, B, fd_exponents, fd_floor,
                       lpt_beta, lpt_d, rng, record)
