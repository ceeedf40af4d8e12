from .assembly import (
    assemble_boundary_mass,
    assemble_stiffness,
    cotangents,
    dirichlet_energy,
    lumped_mass,
    triangle_energies,
)
from .dtn import DtNOperator, dtn_schur, harmonic_extension
from .eigen import (
    BoundaryCondition,
    EigenOptions,
    LoopCondition,
    RayleighQuotient,
    SteklovSpectrum,
    boundary_mean,
    neumann_eigenvalues,
    neumann_lambda1,
    rayleigh_quotient,
    sloshing_mu1,
    sloshing_spectrum,
    steklov_spectrum,
)

__all__ = [
    "assemble_boundary_mass",
    "assemble_stiffness",
    "cotangents",
    "dirichlet_energy",
    "lumped_mass",
    "triangle_energies",
    "DtNOperator",
    "dtn_schur",
    "harmonic_extension",
    "BoundaryCondition",
    "EigenOptions",
    "LoopCondition",
    "RayleighQuotient",
    "SteklovSpectrum",
    "boundary_mean",
    "neumann_eigenvalues",
    "neumann_lambda1",
    "rayleigh_quotient",
    "sloshing_mu1",
    "sloshing_spectrum",
    "steklov_spectrum",
]
