"""Fixpoint semantics for propositional normal logic programs, with
conditional-independence detection and decomposed parallel solving."""

from .errors import (
    CitsolveError,
    InconsistentPairError,
    InvalidPartitionError,
    NonMonotoneOperatorError,
    ParseError,
    PivotMismatchError,
    ResourceCutoffError,
    UsageError,
)
from .lattice import (
    ApproxPair,
    AtomUniverse,
    Interp,
    Scope,
    TruthValue,
    combine,
    combine_pairs,
    kleene_lfp,
    leq_i,
    leq_t,
    project,
    project_pair,
)
from .program import (
    DepGraph,
    Program,
    Rule,
    dep_graph,
    marginalise,
    parse_program,
    restrict_to_scope,
)
from .semantics import (
    SEMANTICS,
    Approximator,
    SemanticsResult,
    enumerate_fixpoints,
    eval_formula,
    gl_reduct_stable,
    ic2,
    ic4,
    kripke_kleene,
    solve_monolithic,
    stable_op,
    ultimate,
    well_founded,
)
from .independence import (
    CiCertificate,
    Partition3,
    check_symmetry,
    check_weak_union,
    ci_semantic,
    ci_syntactic,
    darwiche_entails,
    detect_partitions,
    stratifiable,
)
from .cit import (
    Cit,
    CitConfig,
    CitNode,
    CitSizes,
    build_cit,
    cit_sizes,
    load_cit,
    query_decomposed,
    run_decomposed,
    solve_decomposed,
)

__version__ = "0.1.0"
