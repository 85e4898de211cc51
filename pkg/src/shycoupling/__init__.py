"""Coupled Brownian motion simulators on metric graphs and planar domains.

The package has three layers: data models and single-step operations
(metric_graph, graph_diffusion, graph_couplings, convex_geometry,
reflected_coupling), analytic bounds and ensemble diagnostics (analysis),
and a batch harness with named scenarios and a CLI (harness, scenarios,
cli).
"""

from .analysis import (BoundPair, ShynessReport, VariationDiagnostics,
                       backbone_projection, gaussian_exit_bounds,
                       lemma34_bounds, shyness_statistics,
                       variation_diagnostics)
from .convex_geometry import (BoundaryContact, ConvexDomain, GeometryError,
                              annulus, contains, disc, ellipse,
                              project_with_normal, strict_convexity_margin)
from .graph_couplings import (CouplingError, Fig36State, GraphCouplingState,
                              SigmaProfile, init_fig36_state,
                              init_hybrid_state, init_isometry_state, sigma,
                              step_fig36, step_hybrid, step_isometry)
from .graph_diffusion import (DiffusionParams, FirstHitEstimate, SkewParams,
                              beta_for_degree, first_hit_mc, step_skew,
                              step_walsh_bm)
from .harness import (ExperimentConfig, RunReport, config_for,
                      list_scenarios, run_experiment)
from .metric_graph import (Edge, GraphError, GraphIsometry, GraphPosition,
                           MetricGraph, apply_isometry, build_graph,
                           fixture, geodesic_distance, load_graph)
from .reflected_coupling import (DriverKind, PairPath, PairState,
                                 driver_increments, growth_ex42, independent,
                                 mirror, rotation, simulate_pair,
                                 simulate_pair_ensemble, step_skorokhod,
                                 synchronous)
from .rng import path_rng

__version__ = "0.1.0"
