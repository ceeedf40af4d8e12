"""
Steklov Expanders
Steklov eigenvalues of surfaces sewn along expander graphs
"""

__version__ = "1.0.0"
