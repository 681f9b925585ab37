"""Category-based access control with obligations over strategic port-graph rewriting."""

from .obligations import (
    DutyDelta,
    DutyRecord,
    DutyState,
    SimulationState,
    TimeRegression,
    duty_state,
)
from .policy import (
    AuthorizationDecision,
    NotAPath,
    NotWellFormed,
    PolicyBuilder,
    PolicyError,
    PolicyGraph,
    PolicyModel,
    UnknownEntity,
    Violation,
    as_policy,
    constrained_paths,
    decide,
    ensure_valid,
    extract_policy,
    path_type,
    validate,
)
from .rules import builtin_rules, saturate
from .strategy import (
    DerivationTree,
    LocatedGraph,
    LocatedRule,
    StrategyError,
    run_strategy,
)
from .workspace import (
    HideRule,
    ParseError,
    ViewFilter,
    compute_visuals,
    doc_from_policy,
    export_dot,
    export_view,
    load_policy,
    policy_from_doc,
    query_duties,
    save_policy,
)

__version__ = "0.1.0"

__all__ = [
    "AuthorizationDecision",
    "DerivationTree",
    "DutyDelta",
    "DutyRecord",
    "DutyState",
    "HideRule",
    "LocatedGraph",
    "LocatedRule",
    "NotAPath",
    "NotWellFormed",
    "ParseError",
    "PolicyBuilder",
    "PolicyError",
    "PolicyGraph",
    "PolicyModel",
    "SimulationState",
    "StrategyError",
    "TimeRegression",
    "UnknownEntity",
    "ViewFilter",
    "Violation",
    "as_policy",
    "builtin_rules",
    "compute_visuals",
    "constrained_paths",
    "decide",
    "doc_from_policy",
    "duty_state",
    "ensure_valid",
    "export_dot",
    "export_view",
    "extract_policy",
    "load_policy",
    "path_type",
    "policy_from_doc",
    "query_duties",
    "run_strategy",
    "saturate",
    "save_policy",
    "validate",
]
