"""Branching-process analysis of the bush-growth comparison.

A thinned law is the offspring distribution zeta = Bin(xi, alpha): each of
the xi requested children is kept independently with probability alpha.
This module evaluates extinction probabilities of the resulting
Galton-Watson process three ways (exact fixed point, closed-form upper
bound, Monte Carlo), simulates the associated branching random walk whose
displacements are uniform on a discrete disk, and estimates constrained
walk probabilities by direct Monte Carlo.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .irrigation import OffspringLaw
from .lattice import DiscreteDisk
from .seeding import make_rng

__all__ = [
    "ThinnedLaw",
    "GwRun",
    "BrwState",
    "BrwResult",
    "offspring_pgf",
    "extinction_exact",
    "extinction_bound",
    "simulate_gw",
    "mc_extinction",
    "mc_gw_populations",
    "simulate_brw",
    "alpha_schedule",
    "alpha_floor_diagnostic",
    "constrained_walk_prob",
]


@dataclass(frozen=True)
class ThinnedLaw:
    """Offspring law zeta = Bin(xi, alpha) for xi drawn from `base`."""

    base: OffspringLaw
    alpha: float

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError("alpha must lie in [0, 1]")

    @property
    def mean(self) -> float:
        return self.alpha * self.base.mean()

    def pmf(self) -> np.ndarray:
        """P(zeta = j) for j = 0..kappa (sums to 1)."""
        a = self.alpha
        out = np.zeros(self.base.kappa + 1)
        for k, p_k in zip(self.base.support.tolist(), self.base.probs.tolist()):
            for j in range(k + 1):
                out[j] += p_k * math.comb(k, j) * a**j * (1.0 - a) ** (k - j)
        return out

    def __repr__(self) -> str:
        return f"ThinnedLaw({self.base!r}, alpha={self.alpha})"


def offspring_pgf(law: ThinnedLaw, x: float) -> float:
    """E[x^zeta] = E[(1 - alpha + alpha*x)^xi] for x in [0, 1]."""
    if not (0.0 <= x <= 1.0):
        raise ValueError("x must lie in [0, 1]")
    base = 1.0 - law.alpha + law.alpha * x
    return float(
        sum(
            p_k * base**k
            for k, p_k in zip(law.base.support.tolist(), law.base.probs.tolist())
        )
    )


def extinction_exact(law: ThinnedLaw, tol: float = 1e-12, max_iter: int = 10**6) -> float:
    """Smallest fixed point of the pgf, by monotone iteration from 0.

    Returns 1.0 outright when the mean alpha*E[xi] is at most 1 (the process
    is (sub)critical and dies out almost surely).
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if law.mean <= 1.0:
        return 1.0
    x = 0.0
    for _ in range(max_iter):
        x_next = offspring_pgf(law, x)
        if abs(x_next - x) < tol:
            return x_next
        x = x_next
    raise RuntimeError(f"fixed-point iteration did not converge within {max_iter} steps")


def extinction_bound(law: ThinnedLaw) -> float:
    """Upper bound (1-alpha) / (1 - P(zeta=0) - P(zeta=1)) on the extinction probability.

    Requires a supercritical law (alpha*E[xi] > 1) and a positive denominator,
    i.e. P(zeta >= 2) > 0; the result is clipped to at most 1.
    """
    if law.mean <= 1.0:
        raise ValueError("bound applies only to supercritical laws (alpha*E[xi] > 1)")
    pmf = law.pmf()
    p0 = float(pmf[0])
    p1 = float(pmf[1]) if len(pmf) > 1 else 0.0
    denom = 1.0 - p0 - p1
    if denom <= 0.0:
        raise ValueError("bound needs P(zeta >= 2) > 0")
    return min((1.0 - law.alpha) / denom, 1.0)


@dataclass(frozen=True)
class GwRun:
    """One Galton-Watson trajectory: populations per generation, from 1."""

    survived: bool
    trajectory: list[int]
    capped: bool


def _offspring_total(rng: np.random.Generator, law: ThinnedLaw, pop) -> np.ndarray | int:
    """Total thinned offspring of `pop` parents (scalar or array), exactly distributed.

    Sum of Bin(xi_i, alpha) equals Bin(sum xi_i, alpha), so draw the xi
    composition by a multinomial and thin once.
    """
    counts = rng.multinomial(pop, law.base.probs)
    trials = counts @ law.base.support
    return rng.binomial(trials, law.alpha)


def simulate_gw(
    law: ThinnedLaw, max_gen: int, cap: int = 10**6, seed: int = 0
) -> GwRun:
    """Direct simulation; survival means alive at max_gen or the cap was hit."""
    if cap < 1:
        raise ValueError("cap must be at least 1")
    if max_gen < 1:
        raise ValueError("max_gen must be at least 1")
    rng = make_rng(seed, "gw-run")
    pop = 1
    trajectory = [1]
    capped = False
    for _ in range(max_gen):
        pop = int(_offspring_total(rng, law, pop))
        trajectory.append(pop)
        if pop == 0:
            break
        if pop >= cap:
            capped = True
            break
    return GwRun(survived=pop > 0, trajectory=trajectory, capped=capped)


def mc_gw_populations(
    law: ThinnedLaw, gens: int, runs: int, cap: int = 10**6, seed: int = 0
) -> np.ndarray:
    """Population at generation `gens` across `runs` independent trajectories.

    Runs that hit the cap early keep their last population (flagged survivors);
    extinct runs report 0.  Vectorized across runs, exact in distribution.
    """
    if runs < 1 or gens < 1:
        raise ValueError("runs and gens must be at least 1")
    rng = make_rng(seed, "gw-batch")
    pops = np.ones(runs, dtype=np.int64)
    for _ in range(gens):
        active = np.flatnonzero((pops > 0) & (pops < cap))
        if active.size == 0:
            break
        pops[active] = _offspring_total(rng, law, pops[active])
    return pops


def mc_extinction(
    law: ThinnedLaw, runs: int, max_gen: int = 200, cap: int = 10**5, seed: int = 0
) -> tuple[float, float]:
    """(extinction frequency, standard error) over `runs` trajectories."""
    pops = mc_gw_populations(law, max_gen, runs, cap=cap, seed=seed)
    freq = float(np.mean(pops == 0))
    se = math.sqrt(max(freq * (1.0 - freq), 1e-30) / runs)
    return freq, se


@dataclass(frozen=True)
class BrwState:
    """Occupancy of one branching-random-walk generation."""

    generation: int
    counts: dict[tuple[int, int], int]
    cap: int
    capped: bool

    @property
    def population(self) -> int:
        return sum(self.counts.values())

    def mass(self, sites) -> int:
        """Number of generation-`generation` individuals sitting in `sites`."""
        return sum(self.counts.get((int(s[0]), int(s[1])), 0) for s in sites)


@dataclass(frozen=True)
class BrwResult:
    """Trajectory of BrwStates plus the fill-up verdict machinery."""

    law: ThinnedLaw
    disk: DiscreteDisk
    states: list[BrwState] = field(repr=False)
    capped: bool = False

    @property
    def generations(self) -> int:
        return self.states[-1].generation

    def population_at(self, gen: int) -> int:
        return self.states[gen].population

    def fill_up(self, sites, threshold: int | None = None) -> bool:
        """Does the final generation put at least `threshold` individuals in `sites`?

        Default threshold is ceil((E zeta)^(2*gens/3)).
        """
        if self.capped:
            raise ValueError("trajectory was truncated at the population cap")
        gens = self.generations
        if threshold is None:
            threshold = math.ceil(self.law.mean ** (2.0 * gens / 3.0))
        return self.states[gens].mass(sites) >= threshold


def simulate_brw(
    law: ThinnedLaw,
    disk: DiscreteDisk,
    gens: int,
    cap: int = 10**6,
    seed: int = 0,
) -> BrwResult:
    """Branching random walk on Z^2 started from one individual at the origin.

    Each individual spawns zeta = Bin(xi, alpha) children, each displaced by
    an independent uniform draw from the disk offsets.  Site populations are
    evolved with the exact composition trick (multinomial over xi values,
    one binomial thinning, one multinomial placement per occupied site), so
    the law of the occupancy field is exact.  If a generation's population
    reaches `cap` the trajectory stops there, flagged capped.
    """
    if disk.a < 1:
        raise ValueError("disk must be nonempty")
    if gens < 1:
        raise ValueError("gens must be at least 1")
    if cap < 1:
        raise ValueError("cap must be at least 1")
    rng = make_rng(seed, "brw")
    offsets = [tuple(map(int, off)) for off in disk.offsets.tolist()]
    a = len(offsets)
    placement_p = np.full(a, 1.0 / a)
    counts: dict[tuple[int, int], int] = {(0, 0): 1}
    states = [BrwState(generation=0, counts=dict(counts), cap=cap, capped=False)]
    capped = False
    for gen in range(1, gens + 1):
        nxt: dict[tuple[int, int], int] = {}
        for pos in sorted(counts):
            children = int(_offspring_total(rng, law, counts[pos]))
            if children == 0:
                continue
            placed = rng.multinomial(children, placement_p)
            for off, cnt in zip(offsets, placed.tolist()):
                if cnt:
                    site = (pos[0] + off[0], pos[1] + off[1])
                    nxt[site] = nxt.get(site, 0) + cnt
        counts = nxt
        population = sum(counts.values())
        capped = population >= cap
        states.append(BrwState(generation=gen, counts=counts, cap=cap, capped=capped))
        if capped:
            break
    return BrwResult(law=law, disk=disk, states=states, capped=capped)


def alpha_schedule(
    a: int, c: int, rho_values, start_index: int = 0
) -> tuple[list[float], float]:
    """Retention probabilities alpha_i = a*(c - i)/rho_i and their minimum.

    Index i runs from `start_index` over the rho sequence.  Values above 1
    are clamped to 1 with a warning (degenerate inputs); i may reach c
    (alpha = 0) but not exceed it.
    """
    if a <= 0 or c <= 0:
        raise ValueError("a and c must be positive")
    rho = [float(v) for v in rho_values]
    if not rho:
        raise ValueError("rho_values must be nonempty")
    if any(v <= 0.0 for v in rho):
        raise ValueError("rho values must be positive")
    if start_index < 0 or start_index + len(rho) - 1 > c:
        raise ValueError("indices must stay within [0, c]")
    alphas = []
    for j, rho_j in enumerate(rho):
        i = start_index + j
        value = a * (c - i) / rho_j
        if value > 1.0:
            warnings.warn(
                f"alpha_{i} = {value:.6g} exceeds 1; clamped", RuntimeWarning, stacklevel=2
            )
            value = 1.0
        alphas.append(value)
    return alphas, min(alphas)


def alpha_floor_diagnostic(
    d: int, eta: float, delta: float, kappa: int, k: int, n: int
) -> float:
    """Diagnostic-only lower expression for the retention probability alpha:

        [(pi - delta) d^2 (eta - delta) log n - kappa^(2k^2)]
        / [(pi + delta) d^2 (eta + delta) log n]

    The quantities eta and delta here are analysis constants whose values the
    comparison argument never pins down, so this ratio is printed for
    inspection only — it is not clipped, not validated, and not part of any
    tested contract.
    """
    log_n = math.log(n)
    numer = (math.pi - delta) * d * d * (eta - delta) * log_n - float(kappa) ** (2 * k * k)
    denom = (math.pi + delta) * d * d * (eta + delta) * log_n
    return numer / denom


def constrained_walk_prob(
    disk: DiscreteDisk,
    grid_halfwidth: int,
    start: tuple[int, int],
    target: tuple[int, int],
    steps: int,
    reps: int,
    seed: int = 0,
) -> float:
    """MC estimate of P(walk is at `target` after `steps` and never left the box).

    The walk starts at `start`, adds an independent uniform disk offset each
    step, and must remain inside {-h..h}^2 after every step.
    """
    h = int(grid_halfwidth)
    if h < 0:
        raise ValueError("grid_halfwidth must be nonnegative")
    for name, pt in (("start", start), ("target", target)):
        if max(abs(int(pt[0])), abs(int(pt[1]))) > h:
            raise ValueError(f"{name} {pt} lies outside the box [-{h}, {h}]^2")
    if steps < 1 or reps < 1:
        raise ValueError("steps and reps must be at least 1")
    rng = make_rng(seed, "constrained-walk")
    offsets = disk.offsets.astype(np.int32)
    successes = 0
    chunk = max(1, min(reps, 2**18))
    remaining = reps
    start_arr = np.array(start, dtype=np.int32)
    target_arr = np.array(target, dtype=np.int32)
    while remaining > 0:
        size = min(chunk, remaining)
        draws = rng.integers(0, disk.a, size=(size, steps))
        paths = start_arr + np.cumsum(offsets[draws], axis=1, dtype=np.int32)
        inside = np.all(np.abs(paths) <= h, axis=(1, 2))
        at_target = np.all(paths[:, -1, :] == target_arr, axis=1)
        successes += int(np.count_nonzero(inside & at_target))
        remaining -= size
    return successes / reps
