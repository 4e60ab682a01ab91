"""Robust shifted proper orthogonal decomposition.

Splits a space-time snapshot matrix into low-rank co-moving fields, each
transported by a known shift, plus a sparse noise matrix.
"""
from ._backend import BACKEND
from .errors import (ContractError, DivergenceError, DomainError, FormatError,
                     NumericalError, ShapeError, SpodError)
from .metrics import (RunReport, build_table, noise_recovery_rate, pod_truncation_error,
                      relative_reconstruction_error, spod_truncation_error)
from .prox import estimate_rank, l1_norm, nuclear_norm, soft_threshold, svt
from .solvers import (ConvergenceHistory, Decomposition, SolverConfig, SpodProblem,
                      mu_frames, mu_snapshots, solve)
from .synth import BenchmarkSpec, GroundTruth, add_salt_pepper, default_spec, generate
from .transport import (SnapshotMatrix, SpatialGrid, TransportOperator, apply_shift,
                        lagrange_weights, transport_backward, transport_forward)

__version__ = "0.1.0"
