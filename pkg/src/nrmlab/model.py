"""Problem instances, seeded arrival paths, and experiment generators.

An instance bundles the demand model (one customer per period, type j with
probability lambda_j), the revenue vector, the resource-consumption matrix,
capacities, and the horizon. Instances and paths are immutable; all
randomness flows through explicit 64-bit seeds so replications are
reproducible across process and thread boundaries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InstanceError, WindowError

_MASK64 = (1 << 64) - 1


def derive_seed(base_seed: int, index: int) -> int:
    """Derive an independent 64-bit child seed from (base_seed, index).

    SplitMix64 output mixing applied to base_seed + index * golden-gamma.
    The increment is odd, so for a fixed base the map index -> seed is
    injective over the full 64-bit index range; distinct replication
    indices can never collide.
    """
    z = (base_seed + index * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Instance:
    """Immutable problem data.

    Fields
    ------
    n, m : counts of customer types and resources
    lam : arrival probability per type, shape (n,), each > 0, sums to 1
    r : revenue per type, shape (n,), nonnegative
    A : consumption matrix, shape (m, n), nonnegative; column j is the
        bundle one type-j customer consumes
    C : initial capacity per resource, shape (m,), strictly positive
    T : horizon length in periods
    """

    n: int
    m: int
    lam: np.ndarray
    r: np.ndarray
    A: np.ndarray
    C: np.ndarray
    T: int

    @property
    def a_bar(self) -> float:
        """Largest single entry of A (max consumption of any resource)."""
        return float(self.A.max()) if self.A.size else 0.0

    def row_max(self) -> np.ndarray:
        """Per-resource max consumption over types; the all-types
        feasibility guard 'A_j <= B for all j' is exactly B >= row_max."""
        return self.A.max(axis=1)


def make_instance(lam, r, A, C, T: int) -> Instance:
    """Build an Instance from array-likes and validate it."""
    lam = _frozen(np.asarray(lam, dtype=np.float64).reshape(-1).copy())
    r = _frozen(np.asarray(r, dtype=np.float64).reshape(-1).copy())
    A = np.asarray(A, dtype=np.float64)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    A = _frozen(A.copy())
    C = _frozen(np.asarray(C, dtype=np.float64).reshape(-1).copy())
    inst = Instance(n=int(lam.shape[0]), m=int(C.shape[0]),
                    lam=lam, r=r, A=A, C=C, T=int(T))
    validate_instance(inst)
    return inst


def validate_instance(inst: Instance) -> None:
    """Raise InstanceError naming the first violated invariant."""
    if inst.n < 1 or inst.m < 1 or inst.T < 1:
        raise InstanceError("empty-dimension",
                            f"need n ≥ 1, m ≥ 1, T ≥ 1, got n={inst.n} m={inst.m} T={inst.T}")
    if inst.lam.shape != (inst.n,) or inst.r.shape != (inst.n,):
        raise InstanceError("empty-dimension",
                            "lambda and r must both have length n")
    if inst.A.shape != (inst.m, inst.n) or inst.C.shape != (inst.m,):
        raise InstanceError("empty-dimension",
                            f"A must be m×n and C length m, got A{inst.A.shape} C{inst.C.shape}")
    s = float(inst.lam.sum())
    if abs(s - 1.0) > 1e-12:
        raise InstanceError("probabilities-do-not-sum",
                            f"sum(lambda) = {s!r}, must be 1 within 1e-12")
    if np.any(inst.lam <= 0.0):
        j = int(np.argmax(inst.lam <= 0.0))
        raise InstanceError("negative-entry", f"lambda[{j}] = {inst.lam[j]} must be > 0")
    if np.any(inst.C <= 0.0):
        i = int(np.argmax(inst.C <= 0.0))
        raise InstanceError("nonpositive-capacity", f"C[{i}] = {inst.C[i]} must be > 0")
    if np.any(inst.A < 0.0):
        raise InstanceError("negative-entry", "A has a negative entry")
    if np.any(inst.r < 0.0):
        raise InstanceError("negative-entry", "r has a negative entry")


@dataclass(frozen=True)
class ArrivalPath:
    """One realized arrival sequence.

    types holds 0-based type indices, one per period (length T); seed is
    the 64-bit token the sequence was generated from.
    """

    types: np.ndarray
    seed: int

    @property
    def T(self) -> int:
        return int(self.types.shape[0])


def sample_path(inst: Instance, seed: int) -> ArrivalPath:
    """Sample a length-T i.i.d. categorical arrival path.

    Inverse-CDF on a cumulative lambda table, so the sequence is a pure
    function of (lam, T, seed).
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    cum = np.cumsum(inst.lam)
    u = rng.random(inst.T)
    types = np.searchsorted(cum, u, side="right").astype(np.int64)
    # float roundoff can leave cum[-1] slightly below 1
    np.minimum(types, inst.n - 1, out=types)
    return ArrivalPath(types=_frozen(types), seed=int(seed))


def arrival_counts(path: ArrivalPath, t1: int, t2: int, n: int | None = None) -> np.ndarray:
    """Count arrivals per type over periods [t1, t2], 1-based inclusive.

    Args:
        path: realized arrival path
        t1, t2: window bounds, 1 ≤ t1 ≤ t2 ≤ T
        n: number of types; inferred from the path when omitted

    Returns:
        int64 vector of per-type counts summing to t2 − t1 + 1.
    """
    T = path.T
    if not (1 <= t1 <= t2 <= T):
        raise WindowError("invalid-window", f"[{t1}, {t2}] not within [1, {T}]")
    if n is None:
        n = int(path.types.max()) + 1
    return np.bincount(path.types[t1 - 1:t2], minlength=n).astype(np.int64)


@dataclass(frozen=True)
class ScaledFamily:
    """A proportionally scaled instance family: T = k·T̄ and C = k·C̄."""

    base: Instance
    k: int

    def instance(self) -> Instance:
        if self.k < 1:
            raise InstanceError("empty-dimension", f"scale k = {self.k} must be ≥ 1")
        b = self.base
        return make_instance(b.lam, b.r, b.A, b.C * self.k, b.T * self.k)


def gen_single_resource(k: int, c_ratio: float, r1: float, r2: float) -> Instance:
    """Two-type, one-resource test instance: unit consumption, equal
    arrival rates, C = c_ratio·k, T = k."""
    if k < 1:
        raise ValueError(f"k = {k} must be ≥ 1")
    if not (0.0 < c_ratio <= 1.0):
        raise ValueError(f"c_ratio = {c_ratio} must be in (0, 1]")
    return make_instance([0.5, 0.5], [r1, r2], [[1.0, 1.0]], [c_ratio * k], k)


def gen_multi_resource(k: int, seed: int, n_types: int = 1000,
                       n_resources: int = 1000) -> Instance:
    """Random dense instance: uniform integer revenues in {1..10},
    Bernoulli(0.5) consumption entries, C = 0.8k, T = k.

    r and A depend only on (seed, n_types, n_resources), so one seed
    pins the same instance shape across every scale k.
    """
    if k < n_types:
        raise ValueError(f"k = {k} must be ≥ n_types = {n_types}")
    rng = np.random.Generator(np.random.PCG64(seed))
    r = rng.integers(1, 11, size=n_types).astype(np.float64)
    A = (rng.random((n_resources, n_types)) < 0.5).astype(np.float64)
    lam = np.full(n_types, 1.0 / n_types)
    C = np.full(n_resources, 0.8 * k)
    return make_instance(lam, r, A, C, k)


def instance_to_json(inst: Instance) -> str:
    """Serialize to JSON with row-major A; repr-exact floats round-trip."""
    doc = {
        "n": inst.n,
        "m": inst.m,
        "lambda": inst.lam.tolist(),
        "r": inst.r.tolist(),
        "A": inst.A.tolist(),
        "C": inst.C.tolist(),
        "T": inst.T,
    }
    return json.dumps(doc)


def instance_from_json(text: str) -> Instance:
    doc = json.loads(text)
    inst = make_instance(doc["lambda"], doc["r"], doc["A"], doc["C"], doc["T"])
    if inst.n != doc["n"] or inst.m != doc["m"]:
        raise InstanceError("empty-dimension",
                            "declared n/m disagree with array shapes")
    return inst
