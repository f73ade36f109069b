"""The out-degree law and the sampling of the irrigation digraph.

Each vertex u draws a request xi_u from an integer law supported on
{1, ..., kappa}, then keeps directed edges to min(xi_u, rho_u) points chosen
uniformly without replacement from the rho_u points visible within radius r
(a set that always contains u itself).  Drawing yourself spends a slot but
creates no edge.  The undirected view keeps {u, v} when either orientation
was selected.

All per-vertex randomness is keyed by (seed, vertex index), so a single
vertex's out-list can be re-derived in isolation (see sample_out_single) and
results do not depend on iteration order or thread count.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType

import numpy as np

from . import seeding
from .geometry import GridIndex, TorusPoints, neighbor_csr, neighbors_within

__all__ = [
    "OffspringLaw",
    "IrrigationDigraph",
    "UndirectedGraph",
    "DegreeStats",
    "parse_law",
    "format_law",
    "mean_offspring",
    "sample_irrigation",
    "sample_out_single",
    "undirected_view",
    "degree_stats",
]

_TAG_XI = 0x21A1
_TAG_PICK = 0x21A2


class OffspringLaw:
    """Integer out-degree request law supported on {1, ..., kappa}.

    ``pmf`` maps j -> probability; probabilities must be nonnegative and sum
    to 1 within 1e-9.  ``kappa`` defaults to the largest key but may be given
    explicitly (with zero mass at the top).
    """

    def __init__(self, pmf: dict[int, float], kappa: int | None = None):
        if not pmf:
            raise ValueError("pmf must be non-empty")
        cleaned: dict[int, float] = {}
        for j, p in sorted(pmf.items()):
            j = int(j)
            p = float(p)
            if j < 1:
                raise ValueError(f"support value {j} < 1; requests are at least 1")
            if p < -1e-12:
                raise ValueError(f"negative probability {p} at {j}")
            cleaned[j] = max(p, 0.0)
        total = sum(cleaned.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, expected 1 within 1e-9")
        if not any(p > 0 for p in cleaned.values()):
            raise ValueError("at least one support value needs positive probability")
        top = max(cleaned)
        if kappa is None:
            kappa = top
        kappa = int(kappa)
        if kappa < top:
            raise ValueError(f"kappa={kappa} smaller than max support value {top}")
        self.kappa = kappa
        self.pmf = MappingProxyType(cleaned)
        self._support = np.array(sorted(cleaned), dtype=np.int64)
        probs = np.array([cleaned[j] for j in self._support], dtype=np.float64)
        self._probs = probs / probs.sum()
        self._cdf = np.cumsum(self._probs)

    @property
    def support(self) -> np.ndarray:
        return self._support.copy()

    @property
    def probs(self) -> np.ndarray:
        return self._probs.copy()

    def mean(self) -> float:
        return float(np.dot(self._support, self._probs))

    def sample_from_uniforms(self, u: np.ndarray) -> np.ndarray:
        """Inverse-CDF lookup, mapping uniforms in [0,1) to support values."""
        pos = np.searchsorted(self._cdf, u, side="right")
        return self._support[np.minimum(pos, len(self._support) - 1)]

    def __eq__(self, other) -> bool:
        return isinstance(other, OffspringLaw) and dict(self.pmf) == dict(other.pmf) and self.kappa == other.kappa

    def __hash__(self) -> int:
        return hash((self.kappa, tuple(self.pmf.items())))

    def __repr__(self) -> str:
        return f"OffspringLaw({format_law(self)!r})"


def parse_law(text: str) -> OffspringLaw:
    """Parse a law string of comma-separated value:prob pairs, e.g. '1:0.8,2:0.2'."""
    pmf: dict[int, float] = {}
    if not text or not text.strip():
        raise ValueError("empty law string")
    for pair in text.split(","):
        pair = pair.strip()
        if not pair:
            raise ValueError(f"empty pair in law string {text!r}")
        bits = pair.split(":")
        if len(bits) != 2:
            raise ValueError(f"malformed pair {pair!r} in law string (expected value:prob)")
        try:
            j = int(bits[0])
        except ValueError:
            raise ValueError(f"non-integer support value in pair {pair!r}") from None
        try:
            p = float(bits[1])
        except ValueError:
            raise ValueError(f"non-numeric probability in pair {pair!r}") from None
        if j in pmf:
            raise ValueError(f"duplicate support value in pair {pair!r}")
        pmf[j] = p
    try:
        return OffspringLaw(pmf)
    except ValueError as exc:
        raise ValueError(f"invalid law string {text!r}: {exc}") from None


def format_law(law: OffspringLaw) -> str:
    """Canonical law string (ascending support, shortest float repr)."""
    return ",".join(f"{j}:{repr(float(p))}" for j, p in law.pmf.items())


def mean_offspring(law: OffspringLaw) -> float:
    """E[xi] = sum_j j * p(j)."""
    return law.mean()


@dataclass(frozen=True)
class IrrigationDigraph:
    """Sampled irrigation digraph in CSR form; out-lists are sorted ascending."""

    n: int
    out_indptr: np.ndarray
    out_indices: np.ndarray
    base_points: TorusPoints | None = None
    radius: float | None = None
    law: OffspringLaw | None = None
    seed: int | None = None
    exclude_self: bool = False
    xi: np.ndarray | None = None
    rho: np.ndarray | None = None

    def out_neighbors(self, u: int) -> np.ndarray:
        return self.out_indices[self.out_indptr[u] : self.out_indptr[u + 1]]

    @property
    def out_degrees(self) -> np.ndarray:
        return np.diff(self.out_indptr)

    @classmethod
    def from_out_lists(cls, out_lists, **kwargs) -> "IrrigationDigraph":
        """Build from explicit per-vertex out-lists (tests, hand instances)."""
        n = len(out_lists)
        indptr = np.zeros(n + 1, dtype=np.int64)
        chunks = []
        for u, lst in enumerate(out_lists):
            arr = np.sort(np.asarray(list(lst), dtype=np.int64))
            if arr.size and (arr.min() < 0 or arr.max() >= n):
                raise ValueError(f"out-neighbor of {u} out of range")
            if np.any(arr == u):
                raise ValueError(f"self-loop at {u}; self-selections never create edges")
            if arr.size != np.unique(arr).size:
                raise ValueError(f"duplicate out-neighbor at {u}")
            indptr[u + 1] = indptr[u] + arr.size
            chunks.append(arr)
        indices = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
        return cls(n=n, out_indptr=indptr, out_indices=indices, **kwargs)

    def __repr__(self) -> str:
        return f"IrrigationDigraph(n={self.n}, edges={int(self.out_indptr[-1])})"


def _entry_hashes(seed: int, rows: np.ndarray, slots: np.ndarray) -> np.ndarray:
    """Selection key for neighbor-list slot (rows[i], slots[i]); pure in (seed,u,j)."""
    key = seeding.key64(seed, _TAG_PICK)
    base = seeding.hashed_u64(key, rows.astype(np.uint64))
    return seeding.hashed_u64(0, base ^ (slots.astype(np.uint64) + np.uint64(1)))


def _xi_for(seed: int, law: OffspringLaw, vertices: np.ndarray) -> np.ndarray:
    u = seeding.hashed_uniform(seeding.key64(seed, _TAG_XI), vertices.astype(np.uint64))
    return law.sample_from_uniforms(np.atleast_1d(u))


def sample_irrigation(
    pts: TorusPoints,
    idx: GridIndex,
    r: float,
    law: OffspringLaw,
    seed: int,
    exclude_self: bool = False,
    chunk_rows: int = 65536,
) -> IrrigationDigraph:
    """Sample the irrigation digraph over pts at visibility radius r.

    For each vertex u independently: draw xi_u from the law, then keep a
    uniform without-replacement selection of min(xi_u, candidates) from the
    sorted visible list.  With ``exclude_self`` False (the default model) the
    candidate list includes u and a drawn self is dropped; with True the
    candidate list omits u.
    """
    if not (0.0 < r < 0.5):
        raise ValueError("radius must lie in (0, 1/2)")
    n = pts.n
    indptr, indices = neighbor_csr(idx, r)
    rho = np.diff(indptr)
    if rho.min() < 1:
        raise AssertionError("every vertex sees at least itself")

    xi = _xi_for(seed, law, np.arange(n, dtype=np.int64))

    if exclude_self:
        keep = indices != np.repeat(np.arange(n, dtype=np.int64), rho)
        indices = indices[keep]
        rho = rho - 1  # exactly one self entry per row
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(rho, out=indptr[1:])

    take = np.minimum(xi, rho)

    out_chunks: list[np.ndarray] = []
    out_counts = np.zeros(n, dtype=np.int64)
    for start in range(0, n, chunk_rows):
        stop = min(n, start + chunk_rows)
        lo, hi = int(indptr[start]), int(indptr[stop])
        seg = indices[lo:hi]
        seg_rows = np.repeat(np.arange(start, stop, dtype=np.int64), rho[start:stop])
        slots = np.arange(lo, hi, dtype=np.int64) - np.repeat(indptr[start:stop], rho[start:stop])
        keys = _entry_hashes(seed, seg_rows, slots)
        order = np.lexsort((keys, seg_rows))
        # Rows stay contiguous under the within-row permutation, so the entry
        # at block position j has selection rank j; keep ranks < take[row].
        chosen = slots < np.repeat(take[start:stop], rho[start:stop])
        sel_rows = seg_rows[chosen]
        sel_nbrs = seg[order][chosen]
        not_self = sel_nbrs != sel_rows
        sel_rows = sel_rows[not_self]
        sel_nbrs = sel_nbrs[not_self]
        pack = np.lexsort((sel_nbrs, sel_rows))
        out_chunks.append(sel_nbrs[pack])
        out_counts[start:stop] = np.bincount(sel_rows - start, minlength=stop - start)

    out_indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(out_counts, out=out_indptr[1:])
    out_indices = np.concatenate(out_chunks) if out_chunks else np.zeros(0, dtype=np.int64)
    return IrrigationDigraph(
        n=n,
        out_indptr=out_indptr,
        out_indices=out_indices,
        base_points=pts,
        radius=r,
        law=law,
        seed=int(seed),
        exclude_self=exclude_self,
        xi=xi,
        rho=rho,
    )


def sample_out_single(
    pts: TorusPoints,
    idx: GridIndex,
    r: float,
    law: OffspringLaw,
    seed: int,
    u: int,
    exclude_self: bool = False,
) -> np.ndarray:
    """Out-list of a single vertex, bit-identical to sample_irrigation's.

    Per-vertex keying makes this possible without sampling the other n-1
    vertices; web-event Monte Carlo uses it to avoid materializing dense
    graphs.
    """
    nbrs = neighbors_within(idx, pts, pts.coords[u], r)
    if exclude_self:
        nbrs = nbrs[nbrs != u]
    xi = int(_xi_for(seed, law, np.array([u], dtype=np.int64))[0])
    take = min(xi, nbrs.size)
    slots = np.arange(nbrs.size, dtype=np.int64)
    keys = _entry_hashes(seed, np.full(nbrs.size, u, dtype=np.int64), slots)
    chosen = nbrs[np.argsort(keys, kind="stable")[:take]]
    return np.sort(chosen[chosen != u])


class LazyIrrigationDigraph:
    """Digraph view that samples out-lists on demand (same math as the full sampler).

    Exposes the (n, out_neighbors) duck type the web events need; useful when
    an experiment only ever touches a small part of a dense graph.
    """

    def __init__(self, pts, idx, r, law, seed, exclude_self=False):
        self.n = pts.n
        self.base_points = pts
        self.radius = r
        self.law = law
        self.seed = int(seed)
        self.exclude_self = exclude_self
        self._idx = idx
        self._cache: dict[int, np.ndarray] = {}

    def out_neighbors(self, u: int) -> np.ndarray:
        got = self._cache.get(u)
        if got is None:
            got = sample_out_single(
                self.base_points, self._idx, self.radius, self.law, self.seed, u, self.exclude_self
            )
            self._cache[u] = got
        return got


@dataclass(frozen=True)
class UndirectedGraph:
    """Undirected view: edges as a (m, 2) array with u < v, deduplicated."""

    n: int
    edges: np.ndarray

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    def degrees(self) -> np.ndarray:
        deg = np.bincount(self.edges.ravel(), minlength=self.n)
        return deg

    @classmethod
    def from_edge_list(cls, n: int, pairs) -> "UndirectedGraph":
        arr = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        return cls(n=n, edges=_canonical_edges(n, arr))


def _canonical_edges(n: int, arr: np.ndarray) -> np.ndarray:
    if arr.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    keep = lo != hi
    lo, hi = lo[keep], hi[keep]
    packed = np.unique(lo * np.int64(n) + hi)
    return np.column_stack([packed // n, packed % n])


def undirected_view(g: IrrigationDigraph) -> UndirectedGraph:
    """Collapse orientations: {u,v} present iff u->v or v->u was selected."""
    src = np.repeat(np.arange(g.n, dtype=np.int64), g.out_degrees)
    pairs = np.column_stack([src, g.out_indices])
    return UndirectedGraph(n=g.n, edges=_canonical_edges(g.n, pairs))


@dataclass(frozen=True)
class DegreeStats:
    n: int
    mean_out_degree: float
    mean_undirected_degree: float
    edge_count: int


def degree_stats(g: IrrigationDigraph) -> DegreeStats:
    """Mean out-degree, mean undirected degree (2E/n), and undirected edge count."""
    und = undirected_view(g)
    return DegreeStats(
        n=g.n,
        mean_out_degree=float(g.out_indptr[-1]) / g.n,
        mean_undirected_degree=2.0 * und.edge_count / g.n,
        edge_count=und.edge_count,
    )
