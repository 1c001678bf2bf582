"""Local (1+eps)-approximate flow on unit-capacity undirected graphs.

Entry points: :func:`solve_single` / :func:`solve_multi` return either a
low-congestion approximate flow or a self-verifying infeasibility
certificate, doing work proportional to the demand's neighborhood
rather than the graph.  :mod:`localflow.verify` re-checks any output
independently; :mod:`localflow.stats` defines the work units and the
locality audits.
"""

from .graph import Graph, apply_incidence, boundary_size, build_graph, volume
from .mwu import (MwuContractViolation, MwuParams, MwuReport, WeightLedger,
                  compute_iterations, run_mwu)
from .multi import MultiResult, PotentialCertificate, solve_multi
from .single import CutCertificate, SingleResult, solve_single
from .sources import WeightedPair, decompose_to_pairs, norms, residual
from .stats import AuditViolation, RunStats, report, work_bound
from .verify import (VerifyReport, oracle_feasible_single,
                     verify_cut_certificate, verify_flow_output,
                     verify_potential_certificate)

__version__ = "0.1.0"

__all__ = [
    "Graph", "apply_incidence", "build_graph", "boundary_size", "volume",
    "MwuParams", "MwuReport", "MwuContractViolation", "WeightLedger",
    "compute_iterations", "run_mwu",
    "CutCertificate", "SingleResult", "solve_single",
    "PotentialCertificate", "MultiResult", "solve_multi",
    "WeightedPair", "decompose_to_pairs", "norms", "residual",
    "AuditViolation", "RunStats", "report", "work_bound",
    "VerifyReport", "oracle_feasible_single", "verify_cut_certificate",
    "verify_flow_output", "verify_potential_certificate",
    "__version__",
]
