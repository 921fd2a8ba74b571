"""Projected online gradient descent over the bid-price box.

The dual state is a price vector θ ∈ [0, θ̄]^m updated once per period
from the realized admission decision. All constants follow from the
capacity vector B, the planning length L, and the instance: θ̄ bounds
the optimal duals, D = θ̄√m bounds the box diameter, and
G = (B_max/L)√m + ā√m bounds the gradient norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PolicyError
from .model import Instance


@dataclass(frozen=True)
class OgdConfig:
    """Constants of one dual-descent run over a window starting at t1."""

    theta_bar: float
    D: float
    G: float
    t1: int
    B_over_L: np.ndarray


@dataclass(frozen=True)
class DualState:
    theta: np.ndarray
    step_index: int


def theta_bar(B, inst: Instance) -> float:
    """Box bound (B_max/B_min)·Σ_i ᾱ_i with ᾱ_i the best per-unit
    revenue on resource i (0 for a row nothing consumes)."""
    B = np.asarray(B, dtype=np.float64).reshape(-1)
    b_min = float(B.min())
    if b_min <= 0.0:
        raise PolicyError("zero-capacity", f"B_min = {b_min} must be > 0")
    alpha = np.zeros(inst.m)
    for i in range(inst.m):
        row = inst.A[i]
        nz = row > 0.0
        if np.any(nz):
            alpha[i] = float(np.max(inst.r[nz] / row[nz]))
    return float(B.max()) / b_min * float(alpha.sum())


def ogd_constants(B, L: float, inst: Instance) -> tuple[float, float]:
    """Diameter and gradient bounds (D, G) for capacities B over length L."""
    if L < 1:
        raise PolicyError("zero-capacity", f"window length L = {L} must be ≥ 1")
    B = np.asarray(B, dtype=np.float64).reshape(-1)
    tb = theta_bar(B, inst)
    rm = math.sqrt(inst.m)
    D = tb * rm
    G = float(B.max()) / L * rm + inst.a_bar * rm
    return D, G


def make_ogd_config(B, L: float, inst: Instance, t1: int = 1) -> OgdConfig:
    B = np.asarray(B, dtype=np.float64).reshape(-1)
    tb = theta_bar(B, inst)
    D, G = ogd_constants(B, L, inst)
    return OgdConfig(theta_bar=tb, D=D, G=G, t1=t1, B_over_L=B / L)


def step_size(state: DualState, cfg: OgdConfig) -> float:
    """η = D/(G·√(step_index+1)); the first executed step divides by √1."""
    if cfg.G <= 0.0:
        raise PolicyError("zero-G", "step size undefined for G ≤ 0")
    return cfg.D / (cfg.G * math.sqrt(state.step_index + 1.0))


def bid_price_decision(theta, r_j: float, A_j) -> bool:
    """Accept iff revenue strictly beats the priced bundle cost."""
    return bool(r_j > float(np.dot(theta, A_j)))


def dual_step(state: DualState, cfg: OgdConfig, y: bool, A_j) -> DualState:
    """One projected gradient step: subtract η·(B/L − y·A_j), then clamp
    each coordinate into [0, θ̄]."""
    eta = 0.0 if cfg.D == 0.0 else step_size(state, cfg)
    grad = cfg.B_over_L - (1.0 if y else 0.0) * np.asarray(A_j, dtype=np.float64)
    theta = np.clip(state.theta - eta * grad, 0.0, cfg.theta_bar)
    return DualState(theta=theta, step_index=state.step_index + 1)


@dataclass(frozen=True)
class OgdRegretResult:
    incurred: float
    best_fixed: float
    bound: float


def ogd_regret_oracle(gradients, box_upper) -> OgdRegretResult:
    """Run plain OGD on a sequence of linear costs over a box.

    Test utility for the 1.5·G·D·√t regret bound. Starts at the origin,
    steps η_s = D/(G√s) with D the box diagonal and G the largest
    gradient norm in the sequence, and compares the incurred cost with
    the best fixed point in hindsight (a box vertex, found
    coordinate-wise from the summed gradients).

    Args:
        gradients: array (t, m), row s is the cost gradient of round s
        box_upper: array (m,), the box is Π_i [0, box_upper[i]]

    Returns:
        OgdRegretResult(incurred, best_fixed, bound).
    """
    g = np.asarray(gradients, dtype=np.float64)
    u = np.asarray(box_upper, dtype=np.float64).reshape(-1)
    t = g.shape[0]
    D = float(np.linalg.norm(u))
    G = float(np.max(np.linalg.norm(g, axis=1))) if t else 0.0
    x = np.zeros_like(u)
    incurred = 0.0
    for s in range(t):
        incurred += float(g[s] @ x)
        if G > 0.0:
            eta = D / (G * math.sqrt(s + 1.0))
            x = np.clip(x - eta * g[s], 0.0, u)
    total = g.sum(axis=0) if t else np.zeros_like(u)
    best_fixed = float(np.sum(u * np.minimum(total, 0.0)))
    return OgdRegretResult(incurred=incurred, best_fixed=best_fixed,
                           bound=1.5 * G * D * math.sqrt(t))
