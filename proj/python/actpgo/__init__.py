from ._core import (
    Graph,
    GraphError,
    ParseError,
    Scenario,
    SolveReport,
    ate,
    bench_csv,
    chi2_critical,
    covariance_update,
    evaluate,
    exp,
    generate,
    log,
    method_names,
    object_slam_config,
    solve,
)

__all__ = [
    "Graph",
    "GraphError",
    "ParseError",
    "Scenario",
    "SolveReport",
    "ate",
    "bench_csv",
    "chi2_critical",
    "covariance_update",
    "evaluate",
    "exp",
    "generate",
    "log",
    "method_names",
    "object_slam_config",
    "solve",
]
