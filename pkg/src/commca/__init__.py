"""Community consensus toolkit: excess-robustness certification, synchronous
median-consensus simulation with Byzantine agents, and outcome verdicts."""

from .graph import (
    CommunityLayout,
    FormatError,
    Graph,
    InducedSubgraph,
    add_cross_edges,
    complete_graph,
    disjoint_union,
    format_communities,
    format_graph,
    parse_communities,
    parse_graph,
)
from .robustness import (
    DEFAULT_ENUMERATION_CAP,
    CommunityCheck,
    EnumerationCapExceeded,
    PairEvaluation,
    PreservationResult,
    ReachabilityReport,
    RobustnessWitness,
    complete_rs_certificate,
    evaluate_pair,
    excess,
    format_witness,
    is_community,
    is_r_excess_robust,
    is_rs_excess_robust,
    reachable_set,
    verify_reachability_preservation,
)
from .protocol import (
    AdversaryStrategy,
    ConfigError,
    ConstantValue,
    IsolationReport,
    PerNeighborTable,
    PresetValues,
    RoundScript,
    SimulationConfig,
    StateVector,
    Trace,
    median,
    run,
    step,
)
from .analysis import (
    Cluster,
    CommunityOutcome,
    RacVerdict,
    format_verdict,
    rac_verdict,
    spread,
    summary_lines,
)
from .scenarios import (
    DEFAULT_ALPHA,
    DEFAULT_ROUNDS,
    DEFAULT_SEED,
    EXAMPLE2_SPLIT,
    EXAMPLES,
    ExplicitValues,
    InitializerSpec,
    NormalDraw,
    example1,
    example2,
    example3,
    format_scenario,
    load_scenario,
)

__version__ = "0.1.0"
