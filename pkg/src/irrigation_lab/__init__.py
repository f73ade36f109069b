"""irrigation-lab: random geometric irrigation graphs and their toolkit.

Points live on the unit torus; each point requests a random number of
out-neighbors uniformly among the points within distance r.  The package
samples these graphs, measures components, discretizes the torus into a
cell/box lattice, runs the node/link exploration events that build a web,
compares mixed site/bond percolation against its site-equivalent reduction,
analyses thinned Galton-Watson and branching-random-walk survival, and
evaluates the closed-form thresholds and tail bounds — all behind a
deterministic, replicate-parallel experiment harness with a CLI.
"""

__version__ = "0.1.0"

from .bounds import (
    C1TailBound,
    TailBoundInputs,
    binomial_concentration,
    c1_tail_bound,
    chernoff_upper,
    delta_good_prob_bound,
    irrigation_connectivity_threshold,
    link_event_bound,
    mapping_window_radius,
    rgg_connectivity_radius,
    solve_t,
    t_zero,
)
from .components import ComponentCensus, UnionFind, census_row, components, mapping_census
from .geometry import (
    GridIndex,
    TorusPoints,
    count_in_ball,
    neighbor_csr,
    neighbors_within,
    sample_points,
    torus_distance,
)
from .gw import (
    BrwResult,
    GwRun,
    ThinnedLaw,
    alpha_schedule,
    constrained_walk_prob,
    extinction_bound,
    extinction_exact,
    mc_extinction,
    offspring_pgf,
    simulate_brw,
    simulate_gw,
)
from .harness import (
    ConfigError,
    ExperimentSpec,
    dump_edges,
    parse_config,
    run,
    serialize_config,
    sweep,
)
from .irrigation import (
    IrrigationDigraph,
    OffspringLaw,
    UndirectedGraph,
    degree_stats,
    format_law,
    mean_offspring,
    parse_law,
    sample_irrigation,
    undirected_view,
)
from .lattice import (
    DiscreteDisk,
    GoodnessReport,
    LatticeFrame,
    cell_params,
    delta_goodness,
    discrete_disk,
    disk_for,
    seed_and_central_boxes,
)
from .percolation import (
    PercConfig,
    complete_partial,
    largest_bond_component,
    sample_mixed,
    sample_site,
    site_equivalent_prob,
)
from .seeding import make_rng, sub_seed
from .web import (
    ForbiddenSet,
    PartialGridConfig,
    WebResult,
    build_web,
    hookup_fraction,
    link_event,
    node_event,
    web_coverage,
)

__all__ = [
    "__version__",
    # geometry
    "TorusPoints",
    "sample_points",
    "torus_distance",
    "GridIndex",
    "neighbors_within",
    "count_in_ball",
    "neighbor_csr",
    # irrigation
    "OffspringLaw",
    "parse_law",
    "format_law",
    "mean_offspring",
    "IrrigationDigraph",
    "sample_irrigation",
    "UndirectedGraph",
    "undirected_view",
    "degree_stats",
    # components
    "UnionFind",
    "ComponentCensus",
    "components",
    "census_row",
    "mapping_census",
    # lattice
    "cell_params",
    "LatticeFrame",
    "GoodnessReport",
    "delta_goodness",
    "DiscreteDisk",
    "discrete_disk",
    "disk_for",
    "seed_and_central_boxes",
    # web
    "ForbiddenSet",
    "PartialGridConfig",
    "WebResult",
    "node_event",
    "link_event",
    "build_web",
    "web_coverage",
    "hookup_fraction",
    # percolation
    "PercConfig",
    "sample_mixed",
    "sample_site",
    "largest_bond_component",
    "site_equivalent_prob",
    "complete_partial",
    # gw / brw
    "ThinnedLaw",
    "offspring_pgf",
    "extinction_exact",
    "extinction_bound",
    "GwRun",
    "simulate_gw",
    "mc_extinction",
    "BrwResult",
    "simulate_brw",
    "alpha_schedule",
    "constrained_walk_prob",
    # bounds
    "rgg_connectivity_radius",
    "irrigation_connectivity_threshold",
    "mapping_window_radius",
    "chernoff_upper",
    "binomial_concentration",
    "TailBoundInputs",
    "C1TailBound",
    "c1_tail_bound",
    "solve_t",
    "t_zero",
    "link_event_bound",
    "delta_good_prob_bound",
    # harness
    "ConfigError",
    "ExperimentSpec",
    "parse_config",
    "serialize_config",
    "dump_edges",
    "run",
    "sweep",
    # seeding
    "sub_seed",
    "make_rng",
]
