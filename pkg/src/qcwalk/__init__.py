"""Continuous-time quantum walks under decoherence, compared with the classical walk."""

__version__ = "0.1.0"

from .distance import (AsymptoteResult, QCDistanceCurve, asymptotic_qc_distance, fidelity,
                       numerical_asymptote, qc_distance_at, qc_distance_curve)
from .dynamics import (QSW, HakenStrobl, Intrinsic, Unitary, build_liouvillian,
                       classical_evolve, classical_propagator, intrinsic_asymptotic,
                       intrinsic_evolve, intrinsic_evolve_quadrature, lindblad_evolve,
                       localized_state, stationary_check, unitary_evolve)
from .errors import GraphError, InvalidArgument, NotConverged, NumericalFailure, SizeLimitError
from .graphs import (Graph, Spectrum, build_custom_graph, build_graph, degeneracy_report,
                     graph_spectrum, laplacian, spectral_decompose)
from .symmetry import check_simple_eigenvalue_bound, enumerate_automorphisms
