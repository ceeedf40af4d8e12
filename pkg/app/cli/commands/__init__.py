from . import experiments, graphs, spectra, surfaces

__all__ = ["experiments", "graphs", "spectra", "surfaces"]
