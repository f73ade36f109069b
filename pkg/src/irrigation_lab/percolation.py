"""Mixed site/bond percolation on the m x m torus grid.

Sites sit on the m x m torus; links join l1-distance-one pairs (4-neighbor
lattice), stored as a (2, m, m) boolean field: axis 0 links (i, j) to
(i+1 mod m, j), axis 1 links (i, j) to (i, j+1 mod m).  A cluster is a set
of open sites joined by open links.  The site-reduction coupling compares
the mixed model at (p, q) with pure site percolation at r = p*q^2, and
complete_partial turns a partially tested grid configuration from the web
exploration into a full mixed configuration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .components import UnionFind
from .seeding import make_rng
from .web import CLOSED, OPEN, UNTESTED, PartialGridConfig

__all__ = [
    "PercConfig",
    "sample_mixed",
    "sample_site",
    "site_equivalent_prob",
    "largest_bond_component",
    "complete_partial",
    "mixed_vs_site",
]


@dataclass(frozen=True)
class PercConfig:
    """One site/link configuration: m^2 boolean sites, 2m^2 boolean links."""

    m: int
    sites: np.ndarray
    links: np.ndarray
    p: float
    q: float
    seed: int

    def __post_init__(self):
        m = self.m
        if m < 1:
            raise ValueError("m must be at least 1")
        if self.sites.shape != (m, m) or self.sites.dtype != np.bool_:
            raise ValueError(f"sites must be a boolean ({m}, {m}) array")
        if self.links.shape != (2, m, m) or self.links.dtype != np.bool_:
            raise ValueError(f"links must be a boolean (2, {m}, {m}) array")

    @property
    def open_site_count(self) -> int:
        return int(np.count_nonzero(self.sites))


def sample_mixed(m: int, p: float, q: float, seed: int = 0) -> PercConfig:
    """Independent Bernoulli(p) sites and Bernoulli(q) links."""
    if m < 2:
        raise ValueError("m must be at least 2")
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ValueError("p and q must lie in [0, 1]")
    rng = make_rng(seed, "perc-mixed", m)
    sites = rng.random((m, m)) < p
    links = rng.random((2, m, m)) < q
    return PercConfig(m=m, sites=sites, links=links, p=p, q=q, seed=int(seed))


def site_equivalent_prob(p: float, q: float) -> float:
    """The site-percolation probability r = p*q^2 of the reduction coupling."""
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ValueError("p and q must lie in [0, 1]")
    return p * q * q


def sample_site(m: int, r: float, seed: int = 0) -> tuple[PercConfig, int]:
    """Pure site percolation at rate r (all links open) plus its largest cluster."""
    if m < 2:
        raise ValueError("m must be at least 2")
    if not (0.0 <= r <= 1.0):
        raise ValueError("r must lie in [0, 1]")
    rng = make_rng(seed, "perc-site", m)
    sites = rng.random((m, m)) < r
    links = np.ones((2, m, m), dtype=bool)
    cfg = PercConfig(m=m, sites=sites, links=links, p=r, q=1.0, seed=int(seed))
    return cfg, largest_bond_component(cfg)


def largest_bond_component(cfg: PercConfig) -> int:
    """Size of the largest cluster of open sites joined by open links."""
    m = cfg.m
    sites = cfg.sites
    if not sites.any():
        return 0
    ids = np.arange(m * m).reshape(m, m)
    uf = UnionFind(m * m)
    union = uf.union
    for axis in (0, 1):
        neighbor = np.roll(ids, -1, axis=axis)
        mask = cfg.links[axis] & sites & np.roll(sites, -1, axis=axis)
        for u, v in zip(ids[mask].tolist(), neighbor[mask].tolist()):
            union(u, v)
    find = uf.find
    open_ids = ids[sites]
    roots = np.fromiter((find(v) for v in open_ids.tolist()), dtype=np.int64)
    return int(np.bincount(roots).max())


def complete_partial(pg: PartialGridConfig, eta: float, seed: int = 0) -> PercConfig:
    """Complete a partially tested grid configuration into a mixed one.

    Every untested oriented link is drawn open independently with
    probability 1 - eta/2; an unoriented link is open iff both of its
    orientations are open, and a site is open iff its node was tested open.
    Recorded (p, q) are the nominal (1 - eta, (1 - eta/2)^2).
    """
    if not (0.0 <= eta <= 2.0):
        raise ValueError("eta must lie in [0, 2] so 1 - eta/2 is a probability")
    if not pg.fully_node_tested:
        raise ValueError("grid configuration has untested nodes")
    rng = make_rng(seed, "perc-complete", pg.m)
    keep = 1.0 - eta / 2.0
    draws = rng.random(pg.link_state.shape) < keep
    oriented = pg.link_state.copy()
    untested = oriented == UNTESTED
    oriented[untested & draws] = OPEN
    oriented[untested & ~draws] = CLOSED
    links = (oriented[..., 0] == OPEN) & (oriented[..., 1] == OPEN)
    sites = pg.node_state == OPEN
    return PercConfig(
        m=pg.m, sites=sites, links=links, p=1.0 - eta, q=keep * keep, seed=int(seed)
    )


def mixed_vs_site(m: int, p: float, q: float, seed: int = 0) -> dict[str, object]:
    """Paired-seed comparison row of the mixed model vs its site reduction."""
    mixed = sample_mixed(m, p, q, seed)
    largest_mixed = largest_bond_component(mixed)
    r = site_equivalent_prob(p, q)
    _, largest_site = sample_site(m, r, seed)
    return {
        "m": m,
        "p": p,
        "q": q,
        "r_equiv": r,
        "largest_mixed": largest_mixed,
        "largest_site": largest_site,
        "frac_mixed": largest_mixed / (m * m),
        "frac_site": largest_site / (m * m),
        "seed": int(seed),
    }
