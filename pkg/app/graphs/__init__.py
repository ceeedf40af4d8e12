from .regular_graph import RegularGraph, build_regular_graph, is_connected, quadratic_form
from .spectrum import GraphSpectrum, laplacian_spectrum
from .expanders import generate_expander_family, sample_expander
from .io import read_graph, write_graph, format_graph, parse_graph

__all__ = [
    "RegularGraph",
    "build_regular_graph",
    "is_connected",
    "quadratic_form",
    "GraphSpectrum",
    "laplacian_spectrum",
    "generate_expander_family",
    "sample_expander",
    "read_graph",
    "write_graph",
    "format_graph",
    "parse_graph",
]
