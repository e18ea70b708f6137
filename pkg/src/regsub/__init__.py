"""Subgraph probabilities in random regular graphs: estimates, exact
enumeration oracles, samplers and experiment harness."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CapabilityError,
    ConstructionError,
    ContractError,
    MalformedInputError,
    ModelError,
    RegsubError,
    RetryLimitError,
    UndefinedProbabilityError,
    VertexRangeError,
)
from .graph_core import (  # noqa: E402
    DegreeSequence,
    Pattern,
    SimpleGraph,
    TriangleTuple,
    aut_size,
    build_graph,
    hole_count,
    is_strictly_balanced,
    read_edge_list,
    rho,
    triangle_bound_holds,
    triangle_count,
    write_edge_list,
)
from .estimates import (  # noqa: E402
    ConditioningPair,
    ProbEstimate,
    cond_edge_prob_baseline,
    cond_edge_prob_refined_general,
    cond_edge_prob_refined_regular,
    cycle_phi_sequence,
    lambda_cycle,
    mu_pattern,
    phi,
    sigma2_triangle,
    variance_hypotheses,
)
from .oracle import (  # noqa: E402
    enumerate_regular,
    exact_conditional_edge_prob,
    exact_count_distribution,
    factorial_moments,
)
from .sampler import (  # noqa: E402
    SamplerConfig,
    apply_switching,
    backward_switchings,
    conditional_sample,
    forward_switchings,
    sample_regular,
    switching_ratio_estimate,
)
