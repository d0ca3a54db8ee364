"""patrees: preferential attachment trees with sublinear attraction.

Growth (discrete and continuous-time), Malthusian growth rates, centroid
tracking, and confidence sets for the earliest vertex.
"""

from .attraction import (
    AttractionSpec,
    UndefinedDegreeError,
    ValidationReport,
    alpha_sublinear,
    evaluate,
    evaluate_many,
    linear,
    spec_from_dict,
    spec_to_dict,
    table,
    uniform,
    validate,
)
from .tree import (
    CentralityOrder,
    CentroidReport,
    CentroidTracker,
    GrowingTree,
    centroids,
    compare_centrality,
    forest_sizes,
    line_tree,
    psi_all,
    star_tree,
    subtree_size,
)
from .growth import (
    CmjTrajectory,
    GrowthCapError,
    WeightedIndex,
    grow_cmj,
    grow_discrete,
    grow_from_seed_tree,
    population_trajectory,
)
from .population import PopulationRun, run_population
from .malthus import (
    MalthusEstimate,
    SeriesNotConverged,
    mean_offspring,
    offspring_tail,
    solve_malthusian,
)
from .experiments import (
    SEED_SCHEME,
    CentroidChangeLog,
    CoverageRow,
    CoverageTable,
    DominanceReport,
    HoeffdingRow,
    MaxDegreeRow,
    RaceResult,
    derived_rng,
    dominance_check,
    h_k_psi,
    hoeffding_probe,
    max_degree_scan,
    race,
    resolve_shape,
    root_coverage,
    track_centroid,
)

__version__ = "0.1.0"
