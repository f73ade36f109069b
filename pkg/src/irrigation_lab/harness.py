"""Experiment harness: specs, config files, replicates, sweeps, CSV/JSON.

Every experiment is an ExperimentSpec: a kind, typed parameters, a master
seed, and a replicate count.  Replicate i runs with the stable sub-seed
hash(master_seed, i), so results are independent of thread scheduling and
identical across thread counts.  Tables carry a fixed column set per kind:
one row per replicate (ordered by replicate index) followed by aggregate
rows labelled mean/sd/count in the `rep` column.
"""

from __future__ import annotations

import concurrent.futures
import csv
import io
import itertools
import json
import math
import statistics
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import bounds as bounds_mod
from .components import census_row, components
from .geometry import GridIndex, neighbor_csr, sample_points
from .gw import ThinnedLaw, extinction_bound, extinction_exact, mc_extinction, simulate_brw
from .irrigation import (
    UndirectedGraph,
    format_law,
    parse_law,
    sample_irrigation,
    undirected_view,
)
from .lattice import LatticeFrame, disk_for
from .percolation import mixed_vs_site
from .seeding import sub_seed
from .web import build_web, hookup_fraction

__all__ = [
    "ConfigError",
    "Param",
    "ExperimentSpec",
    "SCHEMAS",
    "KINDS",
    "parse_config",
    "serialize_config",
    "dump_edges",
    "replicate_row",
    "run",
    "sweep",
    "write_csv",
]


class ConfigError(ValueError):
    """Invalid experiment specification (usage error, exit code 2)."""


@dataclass(frozen=True)
class Param:
    """One experiment parameter: value kind, default, and help text."""

    kind: str  # int | float | str | law | bool
    default: object
    help: str


SCHEMAS: dict[str, dict[str, Param]] = {
    "points": {
        "n": Param("int", 1000, "number of points on the unit torus"),
    },
    "rgg-connectivity": {
        "n": Param("int", 20000, "number of points"),
        "gamma": Param("float", 1.0, "radius in units of the connectivity radius r*"),
    },
    "giant": {
        "n": Param("int", 100000, "number of points"),
        "r": Param("float", 0.035, "visibility radius"),
        "law": Param("law", "1:0.8,2:0.2", "out-degree request law, e.g. 1:0.8,2:0.2"),
        "dump": Param(
            "str", "", "optional path stem: write per-replicate edge lists <stem>_rep<i>.csv"
        ),
    },
    "c1-scan": {
        "n": Param("int", 1000000, "number of points"),
        "r": Param("float", 2e-4, "visibility radius"),
        "t": Param("float", 4.0, "tail parameter t >= 1"),
        "eps": Param("float", 2.0, "tail parameter eps > 0"),
    },
    "web": {
        "n": Param("int", 50000, "number of points"),
        "r": Param("float", 0.035, "visibility radius"),
        "k": Param("int", 3, "cell granularity (odd)"),
        "d": Param("int", 1, "box granularity (odd)"),
        "law": Param("law", "1:0.5,2:0.5", "out-degree request law"),
        "threshold": Param("int", -1, "per-box bush threshold; -1 = ceil((E xi)^(k^2/2))"),
    },
    "mixed-perc": {
        "m": Param("int", 100, "grid width"),
        "p": Param("float", 0.9, "site-open probability"),
        "q": Param("float", 0.9, "link-open probability"),
    },
    "gw": {
        "law": Param("law", "2:1.0", "base offspring law"),
        "alpha": Param("float", 0.8, "retention probability"),
        "mc_runs": Param("int", 10000, "Monte Carlo trajectories"),
        "max_gen": Param("int", 200, "generations before declaring survival"),
        "cap": Param("int", 100000, "population cap declaring survival"),
    },
    "brw": {
        "law": Param("law", "2:1.0", "base offspring law"),
        "alpha": Param("float", 0.8, "retention probability"),
        "r": Param("float", 0.05, "visibility radius fixing the disk"),
        "k": Param("int", 3, "cell granularity (odd)"),
        "d": Param("int", 11, "box granularity (odd)"),
        "gens": Param("int", 9, "generations to simulate"),
        "cap": Param("int", 1000000, "population cap"),
    },
    "bounds": {
        "n": Param("int", 1000000, "number of points"),
        "r": Param("float", 0.001, "visibility radius"),
        "t": Param("float", 4.0, "tail parameter t >= 1"),
        "eps": Param("float", 2.0, "tail parameter eps > 0"),
        "gamma": Param("float", 20.0, "radius in units of sqrt(log n/n)"),
        "delta": Param("float", 0.5, "goodness tolerance"),
        "link_delta": Param("float", 0.1, "link-bound tolerance (< 1/4)"),
        "k": Param("int", 5, "cell granularity (odd)"),
        "d": Param("int", 1, "box granularity (odd)"),
        "r_size": Param("int", 1000, "seed-point count for the link bound"),
    },
    "sweep": {
        "over": Param("str", "", "experiment kind to sweep"),
    },
}

KINDS = tuple(SCHEMAS)

COLUMNS: dict[str, list[str]] = {
    "points": ["rep", "seed", "n", "mean_x", "mean_y", "q00", "q01", "q10", "q11"],
    "rgg-connectivity": ["rep", "seed", "n", "gamma", "r", "edges", "C1", "C1_frac", "connected"],
    "giant": ["rep", "seed", "n", "r", "law", "edges", "C1", "C2", "components", "C1_frac"],
    "c1-scan": ["rep", "seed", "n", "r", "t", "eps", "C1", "threshold", "bound", "exceeded"],
    "web": [
        "rep", "seed", "n", "r", "k", "d", "law", "threshold", "m",
        "nodes_open", "links_open", "web_size", "coverage",
        "hookup_fraction", "max_forbidden_per_cell",
    ],
    "mixed-perc": [
        "rep", "seed", "m", "p", "q", "r_equiv",
        "largest_mixed", "largest_site", "frac_mixed", "frac_site",
    ],
    "gw": ["rep", "seed", "law", "alpha", "q_exact", "q_bound", "q_mc", "mc_se"],
    "brw": [
        "rep", "seed", "law", "alpha", "r", "k", "d", "gens", "a",
        "population", "origin_mass", "filled", "capped",
    ],
    "bounds": [
        "rep", "seed", "n", "r", "t", "eps", "gamma", "delta", "link_delta",
        "k", "d", "r_size", "r_star", "c_star", "t_zero", "t_solved",
        "t_residual", "c1_threshold", "c1_bound", "link_bound",
        "goodness_bound", "goodness_all_cells",
    ],
}


def _to_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)  # allow 1e5-style integers
    except ValueError:
        raise ValueError(f"expected an integer, got {text!r}") from None
    if value != int(value):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _to_float(text: str) -> float:
    return float(text)


def _to_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in {"1", "true", "yes", "on"}:
        return True
    if lowered in {"0", "false", "no", "off"}:
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _to_law(text: str) -> str:
    return format_law(parse_law(text))


_COERCE = {"int": _to_int, "float": _to_float, "str": str, "bool": _to_bool, "law": _to_law}


def coerce_param(kind: str, name: str, text: str) -> object:
    """Parse one parameter value against its schema entry."""
    schema = SCHEMAS[kind]
    if name not in schema:
        raise ConfigError(f"unknown parameter {name!r} for kind {kind!r}")
    try:
        return _COERCE[schema[name].kind](str(text))
    except ValueError as exc:
        raise ConfigError(f"parameter {name!r}: {exc}") from exc


def _sweep_target(params: dict[str, object]) -> str:
    over = str(params.get("over", ""))
    if over not in SCHEMAS or over == "sweep":
        raise ConfigError(f"sweep needs over=<kind>, got {over!r}")
    return over


@dataclass(frozen=True)
class ExperimentSpec:
    """A fully typed experiment: kind, parameters, seeding, and output.

    For kind="sweep" the params hold `over` (the swept kind) plus that
    kind's base parameters, and `grid` maps parameter names to value lists.
    Construction fills schema defaults for any parameter not given.
    """

    kind: str
    params: dict[str, object] = field(default_factory=dict)
    master_seed: int = 0
    replicates: int = 1
    out: str | None = None
    threads: int = 1
    plot: bool = False
    grid: dict[str, list] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SCHEMAS:
            raise ConfigError(f"unknown kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if self.replicates < 1:
            raise ConfigError("replicates must be at least 1")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if self.kind == "sweep":
            over = _sweep_target(self.params)
            schema = dict(SCHEMAS[over])
            merged: dict[str, object] = {"over": over}
            merged.update({name: p.default for name, p in schema.items()})
            for name, value in self.params.items():
                if name != "over" and name not in schema:
                    raise ConfigError(f"unknown parameter {name!r} for kind {over!r}")
                merged[name] = value
            if not self.grid:
                raise ConfigError("sweep needs at least one grid.<param>=v1|v2 axis")
            for name, values in self.grid.items():
                if name not in schema:
                    raise ConfigError(f"unknown grid parameter {name!r} for kind {over!r}")
                if not values:
                    raise ConfigError(f"grid parameter {name!r} has no values")
        else:
            schema = SCHEMAS[self.kind]
            for name in self.params:
                if name not in schema:
                    raise ConfigError(f"unknown parameter {name!r} for kind {self.kind!r}")
            if self.grid:
                raise ConfigError("grid parameters are only valid for kind=sweep")
            merged = {name: p.default for name, p in schema.items()}
            merged.update(self.params)
        object.__setattr__(self, "params", merged)


def parse_config(text: str) -> ExperimentSpec:
    """Parse key=value lines (# comments allowed) into an ExperimentSpec."""
    pairs: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = (value, lineno)

    got = pairs.pop("kind", None)
    if got is None:
        raise ConfigError("missing required key 'kind'")
    kind, kind_line = got
    if kind not in SCHEMAS:
        raise ConfigError(f"line {kind_line}: unknown kind {kind!r}")

    def reserved(key: str, coerce, default):
        got = pairs.pop(key, None)
        if got is None:
            return default
        value, lineno = got
        try:
            return coerce(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: key {key!r}: {exc}") from exc

    master_seed = reserved("seed", _to_int, 0)
    replicates = reserved("reps", _to_int, 1)
    threads = reserved("threads", _to_int, 1)
    plot = reserved("plot", _to_bool, False)
    got = pairs.pop("out", None)
    out = got[0] if got is not None else None

    param_kind = kind
    if kind == "sweep":
        got = pairs.pop("over", None)
        if got is None:
            raise ConfigError("kind=sweep needs over=<kind>")
        over, over_line = got
        if over not in SCHEMAS or over == "sweep":
            raise ConfigError(f"line {over_line}: sweep needs over=<kind>, got {over!r}")
        param_kind = over

    grid: dict[str, list] = {}
    params: dict[str, object] = {}
    for key, (value, lineno) in pairs.items():
        try:
            if key.startswith("grid."):
                if kind != "sweep":
                    raise ConfigError("grid parameters are only valid for kind=sweep")
                name = key[len("grid."):]
                grid[name] = [coerce_param(param_kind, name, v) for v in value.split("|")]
            else:
                params[key] = coerce_param(param_kind, key, value)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    if kind == "sweep":
        params["over"] = param_kind
    return ExperimentSpec(
        kind=kind,
        params=params,
        master_seed=master_seed,
        replicates=replicates,
        out=out,
        threads=threads,
        plot=plot,
        grid=grid,
    )


def serialize_config(spec: ExperimentSpec) -> str:
    """Round-trippable key=value form of a spec."""
    lines = [f"kind={spec.kind}"]
    lines.append(f"seed={spec.master_seed}")
    lines.append(f"reps={spec.replicates}")
    lines.append(f"threads={spec.threads}")
    lines.append(f"plot={'true' if spec.plot else 'false'}")
    if spec.out is not None:
        lines.append(f"out={spec.out}")
    for name in sorted(spec.params):
        lines.append(f"{name}={_format_value(spec.params[name])}")
    for name in sorted(spec.grid):
        joined = "|".join(_format_value(v) for v in spec.grid[name])
        lines.append(f"grid.{name}={joined}")
    return "\n".join(lines) + "\n"


def _format_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


# ---------------------------------------------------------------------------
# replicate pipelines


def _points_row(params: dict, rep: int, seed: int) -> dict:
    n = params["n"]
    pts = sample_points(n, seed)
    x, y = pts.coords[:, 0], pts.coords[:, 1]
    left, bottom = x < 0.5, y < 0.5
    return {
        "rep": rep,
        "seed": seed,
        "n": n,
        "mean_x": float(x.mean()),
        "mean_y": float(y.mean()),
        "q00": int(np.count_nonzero(left & bottom)),
        "q01": int(np.count_nonzero(left & ~bottom)),
        "q10": int(np.count_nonzero(~left & bottom)),
        "q11": int(np.count_nonzero(~left & ~bottom)),
    }


def _rgg_undirected(pts, r: float) -> UndirectedGraph:
    idx = GridIndex(pts, cell_size=r)
    indptr, indices = neighbor_csr(idx, r)
    rows = np.repeat(np.arange(pts.n, dtype=np.int64), np.diff(indptr))
    mask = rows < indices
    edges = np.column_stack([rows[mask], indices[mask]])
    return UndirectedGraph.from_edge_list(pts.n, edges)


def _rgg_row(params: dict, rep: int, seed: int) -> dict:
    n, gamma = params["n"], params["gamma"]
    r = gamma * bounds_mod.rgg_connectivity_radius(n)
    pts = sample_points(n, seed)
    graph = _rgg_undirected(pts, r)
    census = components(graph)
    return {
        "rep": rep,
        "seed": seed,
        "n": n,
        "gamma": gamma,
        "r": r,
        "edges": graph.edge_count,
        "C1": census.c1,
        "C1_frac": census.c1 / n,
        "connected": int(census.c1 == n),
    }


def dump_edges(graph: UndirectedGraph, path: str) -> None:
    """Write the undirected edge list as a `u,v` CSV with a header row."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["u", "v"])
        writer.writerows((int(u), int(v)) for u, v in graph.edges)


def _giant_row(params: dict, rep: int, seed: int) -> dict:
    n, r, law_str = params["n"], params["r"], params["law"]
    law = parse_law(law_str)
    pts = sample_points(n, seed)
    idx = GridIndex(pts, cell_size=r)
    g = sample_irrigation(pts, idx, r, law, seed)
    und = undirected_view(g)
    census = components(und)
    if params.get("dump"):
        dump_edges(und, f"{params['dump']}_rep{rep}.csv")
    row = {"rep": rep, "seed": seed, "r": r, "law": law_str}
    row.update(census_row(census))
    return row


def _c1_scan_row(params: dict, rep: int, seed: int) -> dict:
    n, r, t, eps = params["n"], params["r"], params["t"], params["eps"]
    law = parse_law("1:1.0")
    pts = sample_points(n, seed)
    idx = GridIndex(pts, cell_size=r)
    g = sample_irrigation(pts, idx, r, law, seed)
    census = components(undirected_view(g))
    tail = bounds_mod.c1_tail_bound(bounds_mod.TailBoundInputs(n=n, r=r, t=t, eps=eps))
    return {
        "rep": rep,
        "seed": seed,
        "n": n,
        "r": r,
        "t": t,
        "eps": eps,
        "C1": census.c1,
        "threshold": tail.threshold,
        "bound": tail.bound,
        "exceeded": int(census.c1 >= tail.threshold),
    }


def _web_row(params: dict, rep: int, seed: int) -> dict:
    n, r, k, d = params["n"], params["r"], params["k"], params["d"]
    law = parse_law(params["law"])
    threshold = params["threshold"]
    pts = sample_points(n, seed)
    frame = LatticeFrame(pts, r, k, d)
    idx = GridIndex(pts, cell_size=r)
    g = sample_irrigation(pts, idx, r, law, seed)
    result = build_web(g, frame, threshold=None if threshold < 0 else threshold, seed=seed)
    hook = hookup_fraction(g, result) if result.web_size else 0.0
    return {
        "rep": rep,
        "seed": seed,
        "n": n,
        "r": r,
        "k": k,
        "d": d,
        "law": params["law"],
        "threshold": result.threshold,
        "m": frame.m,
        "nodes_open": result.nodes_open,
        "links_open": result.links_open,
        "web_size": result.web_size,
        "coverage": result.coverage,
        "hookup_fraction": hook,
        "max_forbidden_per_cell": result.forbidden.max_per_cell,
    }


def _mixed_perc_row(params: dict, rep: int, seed: int) -> dict:
    row = mixed_vs_site(params["m"], params["p"], params["q"], seed)
    row.pop("seed")
    return {"rep": rep, "seed": seed, **row}


def _gw_row(params: dict, rep: int, seed: int) -> dict:
    law = parse_law(params["law"])
    thinned = ThinnedLaw(law, params["alpha"])
    q_exact = extinction_exact(thinned)
    try:
        q_bound = extinction_bound(thinned)
    except ValueError:
        q_bound = math.nan
    q_mc, se = mc_extinction(
        thinned, params["mc_runs"], max_gen=params["max_gen"], cap=params["cap"], seed=seed
    )
    return {
        "rep": rep,
        "seed": seed,
        "law": params["law"],
        "alpha": params["alpha"],
        "q_exact": q_exact,
        "q_bound": q_bound,
        "q_mc": q_mc,
        "mc_se": se,
    }


def _brw_row(params: dict, rep: int, seed: int) -> dict:
    law = parse_law(params["law"])
    thinned = ThinnedLaw(law, params["alpha"])
    disk = disk_for(params["r"], params["k"], params["d"])
    result = simulate_brw(thinned, disk, params["gens"], cap=params["cap"], seed=seed)
    last = result.states[-1]
    threshold = math.ceil(max(thinned.mean, 1e-12) ** (2.0 * last.generation / 3.0))
    origin_mass = last.mass([(0, 0)])
    return {
        "rep": rep,
        "seed": seed,
        "law": params["law"],
        "alpha": params["alpha"],
        "r": params["r"],
        "k": params["k"],
        "d": params["d"],
        "gens": params["gens"],
        "a": disk.a,
        "population": last.population,
        "origin_mass": origin_mass,
        "filled": int(origin_mass >= threshold),
        "capped": int(result.capped),
    }


def _bounds_row(params: dict, rep: int, seed: int) -> dict:
    n, r, t, eps = params["n"], params["r"], params["t"], params["eps"]
    tail = bounds_mod.c1_tail_bound(bounds_mod.TailBoundInputs(n=n, r=r, t=t, eps=eps))
    t_solved = bounds_mod.solve_t(n, r)
    rhs = 3.0 * math.log(n) / (math.pi * n * r * r)
    residual = abs(t_solved * math.log(t_solved) + 1.0 - t_solved - rhs)
    good = bounds_mod.delta_good_prob_bound(
        n, params["gamma"], params["delta"], params["k"], params["d"]
    )
    return {
        "rep": rep,
        "seed": seed,
        "n": n,
        "r": r,
        "t": t,
        "eps": eps,
        "gamma": params["gamma"],
        "delta": params["delta"],
        "link_delta": params["link_delta"],
        "k": params["k"],
        "d": params["d"],
        "r_size": params["r_size"],
        "r_star": bounds_mod.rgg_connectivity_radius(n),
        "c_star": bounds_mod.irrigation_connectivity_threshold(n),
        "t_zero": bounds_mod.t_zero(),
        "t_solved": t_solved,
        "t_residual": residual,
        "c1_threshold": tail.threshold,
        "c1_bound": tail.bound,
        "link_bound": bounds_mod.link_event_bound(
            params["r_size"], params["k"], params["d"], params["link_delta"]
        ),
        "goodness_bound": good.value,
        "goodness_all_cells": int(good.all_cells_regime),
    }


_RUNNERS = {
    "points": _points_row,
    "rgg-connectivity": _rgg_row,
    "giant": _giant_row,
    "c1-scan": _c1_scan_row,
    "web": _web_row,
    "mixed-perc": _mixed_perc_row,
    "gw": _gw_row,
    "brw": _brw_row,
    "bounds": _bounds_row,
}


def replicate_row(kind: str, params: dict, rep: int, seed: int) -> dict:
    """Run one replicate of `kind` and return its result row."""
    if kind not in _RUNNERS:
        raise ConfigError(f"kind {kind!r} has no replicate pipeline")
    return _RUNNERS[kind](params, rep, seed)


# ---------------------------------------------------------------------------
# execution, aggregation, output


def _aggregate(columns: list[str], rows: list[dict]) -> list[dict]:
    """mean/sd/count rows over the numeric metric columns."""
    skip = {"rep", "seed"}
    numeric = [
        c
        for c in columns
        if c not in skip
        and rows
        and isinstance(rows[0].get(c), (int, float))
        and not isinstance(rows[0].get(c), bool)
    ]
    out = []
    for label in ("mean", "sd", "count"):
        agg: dict[str, object] = {c: "" for c in columns}
        agg["rep"] = label
        for c in numeric:
            values = [float(row[c]) for row in rows]
            if label == "mean":
                agg[c] = statistics.fmean(values)
            elif label == "sd":
                agg[c] = statistics.stdev(values) if len(values) > 1 else 0.0
            else:
                agg[c] = len(values)
        out.append(agg)
    return out


def _run_table(
    kind: str, params: dict, master_seed: int, replicates: int, threads: int
) -> list[dict]:
    seeds = [sub_seed(master_seed, rep) for rep in range(replicates)]
    rows: list[dict | None] = [None] * replicates
    if threads <= 1 or replicates == 1:
        for rep in range(replicates):
            rows[rep] = replicate_row(kind, params, rep, seeds[rep])
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {
                pool.submit(replicate_row, kind, params, rep, seeds[rep]): rep
                for rep in range(replicates)
            }
            for future in concurrent.futures.as_completed(futures):
                rows[futures[future]] = future.result()
    table = list(rows)  # replicate order, not completion order
    table.extend(_aggregate(COLUMNS[kind], table))
    return table


def sweep(grid: dict[str, list], base: ExperimentSpec) -> list[dict]:
    """Cartesian-product sweep of `grid` over the base spec's kind.

    Every grid point reuses the same master seed, so replicate i is paired
    across grid points.  The concatenated table (per-point aggregates
    included) uses the swept kind's column set; a single-point grid yields
    exactly the table of the equivalent plain run.
    """
    if not grid:
        raise ConfigError("sweep needs a nonempty grid")
    kind = base.kind
    if kind not in _RUNNERS:
        raise ConfigError(f"cannot sweep over kind {kind!r}")
    for name, values in grid.items():
        if name not in SCHEMAS[kind]:
            raise ConfigError(f"unknown grid parameter {name!r} for kind {kind!r}")
        if not values:
            raise ConfigError(f"grid parameter {name!r} has no values")
    names = sorted(grid)
    table: list[dict] = []
    for combo in itertools.product(*(grid[name] for name in names)):
        params = dict(base.params)
        params.update(dict(zip(names, combo)))
        table.extend(
            _run_table(kind, params, base.master_seed, base.replicates, base.threads)
        )
    return table


def write_csv(rows: list[dict], columns: list[str], target) -> None:
    """Write rows (dicts) as UTF-8 CSV with a header, in column order."""
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(row.get(c, "")) for c in columns])


def _format_cell(value: object) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, float):  # covers numpy float64 (a float subclass)
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def run(spec: ExperimentSpec) -> tuple[list[dict], dict]:
    """Execute a spec; write CSV/JSON (and figures when requested) if out is set.

    Returns (rows, summary).  The CSV is byte-stable for a fixed (spec,
    seed) regardless of thread count.
    """
    start = time.monotonic()
    if spec.kind == "sweep":
        over = spec.params["over"]
        base = ExperimentSpec(
            kind=over,
            params={k: v for k, v in spec.params.items() if k != "over"},
            master_seed=spec.master_seed,
            replicates=spec.replicates,
            threads=spec.threads,
        )
        rows = sweep(spec.grid, base)
        columns = COLUMNS[over]
        plot_kind = over
    else:
        rows = _run_table(
            spec.kind, spec.params, spec.master_seed, spec.replicates, spec.threads
        )
        columns = COLUMNS[spec.kind]
        plot_kind = spec.kind
    replicate_rows = [row for row in rows if isinstance(row.get("rep"), int)]
    summary = {
        "kind": spec.kind,
        "params": {k: spec.params[k] for k in sorted(spec.params)},
        "grid": {k: spec.grid[k] for k in sorted(spec.grid)},
        "master_seed": spec.master_seed,
        "replicates": spec.replicates,
        "threads": spec.threads,
        "version": _package_version(),
        "row_count": len(replicate_rows),
        "aggregates": _summary_aggregates(columns, replicate_rows),
        "wall_time_s": round(time.monotonic() - start, 6),
    }
    if spec.out is not None:
        with open(spec.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, columns, fh)
        with open(_sibling(spec.out, ".json"), "w", encoding="utf-8") as fh:
            json.dump(summary, fh, sort_keys=True, indent=2)
            fh.write("\n")
        if spec.plot:
            from .plots import render_report

            render_report(plot_kind, replicate_rows, spec.out)
    elif spec.plot:
        raise ConfigError("plot output needs --out to name the figure files")
    else:
        buffer = io.StringIO()
        write_csv(rows, columns, buffer)
        sys.stdout.write(buffer.getvalue())
    return rows, summary


def _summary_aggregates(columns: list[str], rows: list[dict]) -> dict:
    by_label = {row["rep"]: row for row in _aggregate(columns, rows)}
    out: dict[str, dict[str, object]] = {}
    for c in columns:
        if by_label["mean"].get(c, "") == "":
            continue
        out[c] = {
            "mean": by_label["mean"][c],
            "sd": by_label["sd"][c],
            "count": by_label["count"][c],
        }
    return out


def _sibling(path: str, suffix: str) -> str:
    stem = path[: -len(".csv")] if path.endswith(".csv") else path
    return stem + suffix


def _package_version() -> str:
    from . import __version__

    return __version__
