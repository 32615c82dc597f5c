"""Quantum (nonabelian) Kuramoto flows on matrix Lie groups.

Configurations are ``(n, d, d)`` arrays of group elements, coupled along a
weighted graph. The package covers simulation, special solutions, the
linearisation around fixed points, closed-form twist spectra with their
stability thresholds, and necessary conditions on the forcing.
"""
from .algebra import (MatrixGroup, SO, SoBasis, U1, algebra_coords, canonical_twist,
                      check_lohe_closure, coords_to_algebra, exp_map, generic_group,
                      group_from_tag, retract_to_group, so_basis)
from .bounds import (AdmissibilityReport, drift_bound, node_max_norm, so3_admissibility,
                     so3_lp_constant, zero_sum_check)
from .dynamics import (LINEAR, CouplingSeries, FrustrationPair, QKFlow, Trajectory,
                       classical_rhs, coupling_drift, frustrated_drift, frustrated_rhs,
                       integrate, integrate_classical, qk_rhs)
from .errors import (BlowUpError, ConsistencyError, ConstructionError, DimensionError,
                     DomainError, NumericError, PreconditionError, QKError, RankError,
                     RetractionError)
from .graphs import (CirculantSpec, WeightedGraph, alpha_graph, circulant, circulant_graph,
                     graph_from_edges, laplacian, laplacian_pseudoinverse,
                     strict_bandwidth_graph)
from .linearization import (JacobianMatrix, StabilityVerdict, apply_linearization,
                            classify_stability, fd_jacobian_oracle,
                            frustrated_linearization, jacobian_matrix)
from .solutions import (TwistFlipSpec, TwistSpec, double_flip_example, fixed_point_residual,
                        near_sync, sync_configuration, twist, twist_configuration,
                        twist_flip_configuration)
from .spectra import (TwistSpectrum, alpha_star, double_twist_eigs, g_threshold,
                      higher_twist_kappa, rho_star, single_twist_eigs, supports_one_twist,
                      twist_integrals)

__version__ = "0.1.0"
