"""Local density of every vertex: exact oracles, fair orientations and
LOCAL/CONGEST round simulations."""

from .congest import ClockSchedule, CongestProtocol, ProtocolError, make_schedule, run_congest_orientation
from .exact import (
    ConvergenceError,
    Decomposition,
    GuardError,
    densest_subgraph_bruteforce,
    density,
    diminishing_decomposition,
    local_density_exact,
    quotient_density,
    solve_fo2,
    verify_duality,
)
from .flow import FlowNetwork, blocking_flow
from .graph import Graph, GraphFormatError, Subgraph, generate, khop_subgraph, load_graph, serialize
from .local_algo import local_density_local_model
from .orientation import (
    FractionalOrientation,
    LevelIndex,
    approx_check,
    decrease,
    delete_edge_maintaining_fairness,
    eta_for,
    init_half,
    is_eta_fair,
    is_locally_fair,
    level_of,
    orientation_from_masses,
    schedule_k,
)
from .reporting import ReportResult, elect_leaders, report_local_subgraph, report_subgraph, verify_t_hop_dense_subgraph
from .sim import LOCAL, CONGEST, Trace, charge_abstract_rounds, run

__version__ = "0.1.0"
