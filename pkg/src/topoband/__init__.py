"""Topological invariants of nearest-neighbor tight-binding models.

Bulk indices (winding, Chern by three routes, Kane-Mele), edge spectra
by strip diagonalization and by complex-momentum continuation, and
numerical verification that the two sides agree.
"""

__version__ = "0.1.0"

from .clifford import DiracModel, TrigPoly, assemble_dirac, dirac_decompose, gamma
from .correspondence import CorrespondenceReport, m_parity, sweep, verify
from .edge_invariants import (
    FiducialLine,
    chiral_zero_count,
    crossings_vs_band_edge,
    find_crossings,
    km_edge,
    signed_crossings,
)
from .edge_spectrum import (
    EdgeBranch,
    build_strip,
    dirac_edge_states,
    edge_lambda_roots,
    incipience_points_singular,
    singular_edge_branches,
    strip_edge_branches,
)
from .bulk_invariants import (
    InvariantResult,
    chern_fh,
    chern_great_circle,
    chern_north_preimage,
    km_dirac,
    w_matrix_at_trim,
    winding_chiral,
)
from .ellipse import EllipseFrame, build_frame, encloses_origin
from .errors import ModelError, NumericalError, TopobandError
from .models import (
    BulkModel,
    FourierMatrix,
    bloch_grid,
    check_symmetries,
    eval_bulk,
    gap_report,
    model_from_dict,
    model_to_dict,
)

__all__ = [
    "__version__",
    "BulkModel",
    "FourierMatrix",
    "eval_bulk",
    "bloch_grid",
    "gap_report",
    "check_symmetries",
    "model_from_dict",
    "model_to_dict",
    "TrigPoly",
    "DiracModel",
    "dirac_decompose",
    "assemble_dirac",
    "gamma",
    "EllipseFrame",
    "build_frame",
    "encloses_origin",
    "InvariantResult",
    "winding_chiral",
    "chern_fh",
    "chern_north_preimage",
    "chern_great_circle",
    "km_dirac",
    "w_matrix_at_trim",
    "EdgeBranch",
    "build_strip",
    "strip_edge_branches",
    "edge_lambda_roots",
    "dirac_edge_states",
    "singular_edge_branches",
    "incipience_points_singular",
    "FiducialLine",
    "find_crossings",
    "signed_crossings",
    "chiral_zero_count",
    "km_edge",
    "crossings_vs_band_edge",
    "CorrespondenceReport",
    "verify",
    "m_parity",
    "sweep",
    "TopobandError",
    "ModelError",
    "NumericalError",
]
