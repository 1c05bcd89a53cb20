"""Adaptive integration, resonance-window partitioning, deterministic reduction."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "GridConfig",
    "IntegrationResult",
    "Interval",
    "gauss_legendre",
    "clenshaw_curtis",
    "integrate_adaptive",
    "resonance_partition",
    "compensated_sum",
]


@dataclass(frozen=True)
class GridConfig:
    """Tolerances and seed grid sizes shared by the spectrum evaluators.

    window_multiplier sets the resonance-window width in units of the kernel
    width delta_omega. n_max_override caps the harmonic sum when set.
    omega_max overrides the automatic frequency cutoff (used to pin series
    and oracle evaluations to one domain).
    """

    rel_tol: float = 1e-6
    abs_tol: float = 1e-12
    max_subdivisions: int = 4000
    window_multiplier: float = 10.0
    n_max_override: Optional[int] = None
    omega_max: Optional[float] = None
    theta_points: int = 16
    phi_points: int = 16
    omega_points: int = 6
    harmonic_tail: float = 1e-7

    def __post_init__(self) -> None:
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.window_multiplier < 2.0:
            raise ValueError("window_multiplier must be >= 2")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        for name in ("theta_points", "phi_points", "omega_points"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be >= 2")
        if not (0.0 < self.harmonic_tail < 1.0):
            raise ValueError("harmonic_tail must be in (0, 1)")


@dataclass(frozen=True)
class IntegrationResult:
    value: float
    error_estimate: float
    evaluations: int
    converged: bool


class Interval(NamedTuple):
    lo: float
    hi: float
    resonant: bool


@lru_cache(maxsize=64)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1], cached."""
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


@lru_cache(maxsize=32)
def clenshaw_curtis(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Closed Clenshaw-Curtis rule with n+1 points on [-1, 1], n even.

    The n/2+1 point rule is a subset of the nodes, so halving n gives a free
    embedded error estimate.
    """
    if n < 2 or n % 2:
        raise ValueError("n must be even and >= 2")
    j = np.arange(n + 1)
    x = np.cos(math.pi * j / n)
    k = np.arange(n // 2 + 1)
    d = 2.0 / (1.0 - 4.0 * k * k)
    d[0] = 2.0
    h = np.ones(n // 2 + 1)
    h[0] = 0.5
    h[-1] = 0.5
    c = np.ones(n + 1)
    c[0] = 0.5
    c[-1] = 0.5
    w = (2.0 / n) * c * (np.cos(np.outer(math.pi * j / n, 2 * k)) @ (h * d))
    return x, w


def nested_cc_panels(order: int, edges: Sequence[float]):
    """Clenshaw-Curtis panels over consecutive [edges[i], edges[i+1]] segments
    with genuine embedded half- and quarter-order rules.

    Returns (nodes, w, w_half, w_quarter): the lower-order weights are the
    real CC(order/2) and CC(order/4) rules zero-padded into the fine node
    layout, so weighted dots against the same samples give three honestly
    nested estimates. w_quarter is all zeros when order/4 is not a valid rule.
    """
    x, w = clenshaw_curtis(order)
    w2 = clenshaw_curtis(order // 2)[1]
    w4 = clenshaw_curtis(order // 4)[1] if order % 4 == 0 and order >= 8 else None
    nodes, fine, half_rule, quarter_rule = [], [], [], []
    for a, b in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        nodes.append(mid + half * x)
        fine.append(half * w)
        pad2 = np.zeros(order + 1)
        pad2[::2] = half * w2
        half_rule.append(pad2)
        pad4 = np.zeros(order + 1)
        if w4 is not None:
            pad4[::4] = half * w4
        quarter_rule.append(pad4)
    return (
        np.concatenate(nodes),
        np.concatenate(fine),
        np.concatenate(half_rule),
        np.concatenate(quarter_rule),
    )


def _panel(fn, a: float, b: float, order: int) -> float:
    x, w = gauss_legendre(order)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return half * float(np.dot(w, np.asarray(fn(mid + half * x), dtype=float)))


def integrate_adaptive(fn: Callable, a: float, b: float, cfg: GridConfig) -> IntegrationResult:
    """Nested-rule adaptive bisection of fn over [a, b].

    fn is called with an ndarray of nodes and must return values elementwise.
    Each interval is estimated with a GL12/GL24 pair; the worst interval is
    bisected first, with ties broken by position so the subdivision order is
    deterministic. Running out of subdivisions yields converged=False with the
    partial value, never an exception.
    """
    if not (a < b):
        raise ValueError("integrate_adaptive requires a < b")
    lo_rule, hi_rule = 12, 24

    def estimate(x0: float, x1: float) -> Tuple[float, float, int]:
        coarse = _panel(fn, x0, x1, lo_rule)
        fine = _panel(fn, x0, x1, hi_rule)
        return fine, abs(fine - coarse), lo_rule + hi_rule

    value, err, n_eval = estimate(a, b)
    segments: List[Tuple[float, float, float, float]] = [(a, b, value, err)]
    splits = 0
    while splits < cfg.max_subdivisions:
        total = math.fsum(s[2] for s in segments)
        total_err = math.fsum(s[3] for s in segments)
        tol = max(cfg.abs_tol, cfg.rel_tol * abs(total))
        if total_err <= tol:
            return IntegrationResult(total, total_err, n_eval, True)
        # worst error first; tie-break on left endpoint for determinism
        idx = max(range(len(segments)), key=lambda i: (segments[i][3], -segments[i][0]))
        x0, x1, _, _ = segments.pop(idx)
        xm = 0.5 * (x0 + x1)
        left = estimate(x0, xm)
        right = estimate(xm, x1)
        n_eval += left[2] + right[2]
        segments.append((x0, xm, left[0], left[1]))
        segments.append((xm, x1, right[0], right[1]))
        splits += 1
    total = math.fsum(s[2] for s in segments)
    total_err = math.fsum(s[3] for s in segments)
    converged = total_err <= max(cfg.abs_tol, cfg.rel_tol * abs(total))
    return IntegrationResult(total, total_err, n_eval, converged)


def resonance_partition(
    omega_max: float,
    resonances: Sequence[Tuple[float, float]],
    multiplier: float,
) -> List[Interval]:
    """Non-overlapping cover of [0, omega_max] by resonance windows and gaps.

    Each (omega_res, delta_omega) pair contributes a window of total width
    multiplier * delta_omega centered on omega_res, clipped to the domain;
    overlapping or touching windows are merged. Background intervals fill the
    gaps so the union is exactly [0, omega_max].
    """
    if omega_max <= 0.0:
        raise ValueError("omega_max must be positive")
    halves = []
    for omega_res, d_omega in resonances:
        if d_omega < 0.0:
            raise ValueError("negative resonance width")
        half = 0.5 * multiplier * d_omega
        lo = max(0.0, omega_res - half)
        hi = min(omega_max, omega_res + half)
        if hi > lo:
            halves.append((lo, hi))
    halves.sort()
    merged: List[List[float]] = []
    for lo, hi in halves:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    out: List[Interval] = []
    cursor = 0.0
    for lo, hi in merged:
        if lo > cursor:
            out.append(Interval(cursor, lo, False))
        out.append(Interval(lo, hi, True))
        cursor = hi
    if cursor < omega_max:
        out.append(Interval(cursor, omega_max, False))
    return out


def _two_sum(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def compensated_sum(values) -> float:
    """Pairwise summation with error compensation, fixed order.

    The reduction tree depends only on the length of the input, so the result
    is bitwise reproducible for a given value sequence regardless of how the
    values were produced (worker count, chunking). Accuracy is that of
    double-double accumulation: 1 ulp against an exact reference in practice.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        return 0.0
    s = v.copy()
    c = np.zeros_like(s)
    while s.size > 1:
        if s.size % 2 == 1:
            s = np.append(s, 0.0)
            c = np.append(c, 0.0)
        s0, s1 = s[0::2], s[1::2]
        merged, err = _two_sum(s0, s1)
        c = c[0::2] + c[1::2] + err
        s = merged
    return float(s[0] + c[0])
