"""Closed-form thresholds and tail bounds.

Pure formula evaluations: the random-geometric-graph connectivity radius,
the irrigation connectivity threshold, Chernoff and binomial concentration
bounds, the largest-mapping-component tail bound with its t-equation, and
the analytic probability bounds for link events and delta-goodness.

Composite bounds clip to [0, 1] and flag vacuity so downstream tables stay
plot-ready; the two elementary bounds (chernoff_upper,
binomial_concentration) return the raw formula value, which for
binomial_concentration can exceed 1 for tiny delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .lattice import cell_params

__all__ = [
    "TailBoundInputs",
    "C1TailBound",
    "DeltaGoodBound",
    "rgg_connectivity_radius",
    "irrigation_connectivity_threshold",
    "chernoff_upper",
    "binomial_concentration",
    "c1_tail_bound",
    "solve_t",
    "t_zero",
    "link_event_bound",
    "delta_good_prob_bound",
    "mapping_window_radius",
]


def rgg_connectivity_radius(n: float) -> float:
    """r* = sqrt(log n / (n pi)), the connectivity radius of G_n(r)."""
    if n < 3:
        raise ValueError("n must be at least 3")
    return math.sqrt(math.log(n) / (n * math.pi))


def irrigation_connectivity_threshold(n: float) -> float:
    """c* = sqrt(2 log n / log log n), the irrigation connectivity threshold.

    Defined whenever log log n > 0, i.e. n > e.
    """
    if n <= math.e:
        raise ValueError("n must exceed e (log log n must be positive)")
    return math.sqrt(2.0 * math.log(n) / math.log(math.log(n)))


def mapping_window_radius(n: int) -> float:
    """(n log n)^(-1/3): below this radius the one-choice graph stays fragmented.

    Of the three slightly different window expressions in circulation, this is
    the one the fragmentation proof actually supports, so it is the regime
    boundary used throughout this package.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    return (n * math.log(n)) ** (-1.0 / 3.0)


def chernoff_upper(k: int, p: float, u: float) -> float:
    """P(Bin(k, p) >= u*k*p) <= exp(k*p*(u - 1 - u*log u)) for u > 1."""
    if u <= 1.0:
        raise ValueError("u must exceed 1")
    if not (k > 0 and 0.0 < p <= 1.0):
        raise ValueError("need k > 0 and p in (0, 1]")
    return math.exp(k * p * (u - 1.0 - u * math.log(u)))


def binomial_concentration(n: float, p: float, delta: float) -> float:
    """P(|Bin(n, p) - np| >= delta*np) <= 2*exp(-np*delta^2/3).

    Returned unclipped: the value tends to 2 as delta -> 0 (vacuous bound).
    """
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must lie in (0, 1)")
    if not (n > 0 and 0.0 < p <= 1.0):
        raise ValueError("need n > 0 and p in (0, 1]")
    return 2.0 * math.exp(-n * p * delta * delta / 3.0)


@dataclass(frozen=True)
class TailBoundInputs:
    """Inputs of the largest-component tail bound: t >= 1, eps > 0, 0 < r < 1/2."""

    n: int
    r: float
    t: float
    eps: float

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("n must be at least 3")
        if not (0.0 < self.r < 0.5):
            raise ValueError("r must lie in (0, 1/2)")
        if self.t < 1.0:
            raise ValueError("t must be >= 1")
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")


@dataclass(frozen=True)
class C1TailBound:
    """Threshold and probability bound for the largest component of a mapping graph.

    bound = min(term1 + term2, 1); term2 is n^2 * exp((n-2)*pi*r^2*(t-1-t log t)),
    which at t = 1 degenerates to n^2 (flagged vacuous).
    """

    threshold: float
    bound: float
    term1: float
    term2: float
    second_term_vacuous: bool

    def __iter__(self):
        return iter((self.threshold, self.bound))


def c1_tail_bound(inputs: TailBoundInputs) -> C1TailBound:
    """P(C1 >= 2 + (1+t n r^2)^3 (1+eps)^2 log^2 n) <= n^(-eps + 1/(1+t n r^2)) + term2."""
    n, r, t, eps = inputs.n, inputs.r, inputs.t, inputs.eps
    tnr2 = t * n * r * r
    log_n = math.log(n)
    threshold = 2.0 + (1.0 + tnr2) ** 3 * (1.0 + eps) ** 2 * log_n**2
    term1 = n ** (-eps + 1.0 / (1.0 + tnr2))
    exponent = (n - 2) * math.pi * r * r * (t - 1.0 - t * math.log(t))
    term2 = n * n * math.exp(exponent) if exponent < 700.0 else math.inf
    vacuous = t <= 1.0 or term2 >= 1.0
    bound = min(term1 + term2, 1.0)
    return C1TailBound(
        threshold=threshold,
        bound=bound,
        term1=term1,
        term2=term2,
        second_term_vacuous=vacuous,
    )


def t_zero() -> float:
    """The unique t > 1 with t*log t = t + 1 (= 3.59112167...)."""
    root = brentq(lambda t: t * math.log(t) - t - 1.0, 2.0, 5.0, xtol=1e-15, rtol=8.9e-16)
    return float(root)


def solve_t(n: int, r: float) -> float:
    """The unique t > 1 with t*log t + 1 - t = 3*log n / (pi*n*r^2).

    The left side increases from 0 on t > 1, so the root exists and is unique
    for any positive right side; it is bracketed by [1+1e-9, max(t0, RHS+2)]
    (t*log t + 1 - t >= t - 2 for t >= e covers large right sides, and the
    value 2 attained at t0 covers small ones).
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    if not (0.0 < r < 0.5):
        raise ValueError("r must lie in (0, 1/2)")
    rhs = 3.0 * math.log(n) / (math.pi * n * r * r)

    def g(t: float) -> float:
        return t * math.log(t) + 1.0 - t - rhs

    lo = 1.0 + 1e-9
    hi = max(t_zero(), rhs + 2.0)
    if g(lo) > 0.0:
        # Root sits between 1 and lo (tiny rhs); the clamp keeps t > 1.
        return lo
    t = float(brentq(g, lo, hi, xtol=1e-15, rtol=8.9e-16))
    for _ in range(3):
        residual = g(t)
        if abs(residual) < 1e-12:
            break
        t -= residual / math.log(t)
    return t


def link_event_bound(R_size: int, k: int, d: int, delta: float) -> float:
    """1 - exp(-R/(10 beta d^2)^(kd)) with beta = (1+delta)(1/(2d) + k/(16 d^2)).

    Lower bound on the link-event success probability given R seed points.
    """
    if R_size < 0:
        raise ValueError("R_size must be nonnegative")
    if k < 1 or k % 2 == 0 or d < 1 or d % 2 == 0:
        raise ValueError("k and d must be odd integers >= 1")
    if not (0.0 < delta < 0.25):
        raise ValueError("delta must lie in (0, 1/4)")
    beta = (1.0 + delta) * (1.0 / (2.0 * d) + k / (16.0 * d * d))
    denom = (10.0 * beta * d * d) ** (k * d)
    return min(max(-math.expm1(-R_size / denom), 0.0), 1.0)


@dataclass(frozen=True)
class DeltaGoodBound:
    """Lower bound on P(every cell is delta-good), with regime flags."""

    value: float
    m: int
    all_cells_regime: bool
    vacuous: bool

    def __float__(self) -> float:
        return self.value


def delta_good_prob_bound(n: int, gamma: float, delta: float, k: int, d: int) -> DeltaGoodBound:
    """1 - 2(mkd)^2 n^(-gamma^2 delta^2/(24 d^2)) at r = gamma*sqrt(log n/n).

    all_cells_regime reports whether gamma^2 delta^2 > 24 d^2, the condition
    under which the per-cell bound extends to all cells with the same rate.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    if gamma <= 0.0 or not (0.0 < delta < 1.0):
        raise ValueError("need gamma > 0 and delta in (0, 1)")
    if k < 1 or k % 2 == 0 or d < 1 or d % 2 == 0:
        raise ValueError("k and d must be odd integers >= 1")
    r = gamma * math.sqrt(math.log(n) / n)
    if not (0.0 < r < 1.0):
        raise ValueError("gamma puts r = gamma*sqrt(log n/n) outside (0, 1)")
    m, _ = cell_params(r, k)
    exponent = gamma * gamma * delta * delta / (24.0 * d * d)
    raw = 1.0 - 2.0 * (m * k * d) ** 2 * n ** (-exponent)
    return DeltaGoodBound(
        value=min(max(raw, 0.0), 1.0),
        m=m,
        all_cells_regime=gamma * gamma * delta * delta > 24.0 * d * d,
        vacuous=raw <= 0.0,
    )
