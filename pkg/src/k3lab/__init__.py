"""Triangle side-length spectra of path metric spaces.

Computes and certifies which side-length triples (a, b, c) occur as
distances among three points of a space: cone membership and degeneracy
defects, exact metrics on weighted graphs, a catalog of model spaces,
tripod witnesses with the degenerate-loop certificate, realization
search, and a small GF(2) chain engine for the configuration complex.
"""

from .cone import (
    SideTriple,
    boundary_distance,
    defect,
    eps_degenerate,
    winding_number,
)
from .graphs import MetricGraph, OnEdge, PathWitness, Vertex
from .homology import Gf2Chain, Gf2Complex, boundary, build_s_complex, h1_dim, homologous
from .spaces import build_cover_graph, build_space, space_spec_from_json
from .tripods import ModelTripod, TripodWitness, build_lambda, check_lambda, compare_sandwich, verify_tripod
from .explorer import TriangleRecord, certify_degenerate_bound, realize, sample_k3

__version__ = "0.1.0"

__all__ = [
    "SideTriple",
    "defect",
    "eps_degenerate",
    "boundary_distance",
    "winding_number",
    "MetricGraph",
    "Vertex",
    "OnEdge",
    "PathWitness",
    "Gf2Complex",
    "Gf2Chain",
    "build_s_complex",
    "boundary",
    "h1_dim",
    "homologous",
    "build_space",
    "build_cover_graph",
    "space_spec_from_json",
    "ModelTripod",
    "TripodWitness",
    "verify_tripod",
    "compare_sandwich",
    "build_lambda",
    "check_lambda",
    "TriangleRecord",
    "sample_k3",
    "realize",
    "certify_degenerate_bound",
    "__version__",
]
