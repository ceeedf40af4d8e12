import logging
import math
from typing import Optional

from pydantic import Field

from app.fem import BoundaryCondition, sloshing_mu1, steklov_spectrum
from app.services import dump_report
from app.storage import atomic_write_text
from app.surfaces import build_flat_cylinder, read_mesh
from app.cli.router import CommandGroup
from app.cli.schemas import EigenRequest, print_values

logger = logging.getLogger(__name__)

group = CommandGroup()


class SolveRequest(EigenRequest):
    mesh: str = Field(description="IMESH file")
    steklov: Optional[str] = Field(default=None, description="comma-separated Steklov loops; the rest are Neumann")
    out: Optional[str] = Field(default=None, description="JSON file for the spectrum record")


class SloshingRequest(EigenRequest):
    nb: int = Field(default=32, ge=3, description="vertices around the cylinder")
    layers: int = Field(default=16, ge=1, description="rings along the cylinder")
    length: float = Field(default=1.0, gt=0, description="cylinder length; the circumference is 1")


def sloshing_oracle(length: float, circumference: float = 1.0) -> float:
    """First sloshing eigenvalue of a flat cylinder: Steklov on one end, Neumann on the other."""
    frequency = 2.0 * math.pi / circumference
    return frequency * math.tanh(frequency * length)


@group.command("solve", SolveRequest)
def solve(request: SolveRequest) -> None:
    """Print the lowest Steklov eigenvalues of a mesh, sigma_0 = 0 first."""
    mesh = read_mesh(request.mesh)
    loops = None
    if request.steklov:
        loops = [label.strip() for label in request.steklov.split(",") if label.strip()]
        for label in loops:
            mesh.loop(label)
    spectrum = steklov_spectrum(mesh, request.eigen_options(), loops)
    print_values("sigma", spectrum.sigmas)
    if request.out:
        atomic_write_text(request.out, dump_report(spectrum.to_record()))
        logger.info(f"Wrote spectrum record to {request.out}")


@group.command("sloshing", SloshingRequest)
def sloshing(request: SloshingRequest) -> None:
    """First sloshing eigenvalue of a flat unit-circumference cylinder against its closed form."""
    cylinder = build_flat_cylinder(request.nb, request.layers, 1.0, request.length)
    bc = BoundaryCondition.sloshing(cylinder, cylinder.loop_labels[0])
    mu1 = sloshing_mu1(cylinder, bc, request.eigen_options())
    oracle = sloshing_oracle(request.length)
    print(f"mu1 {mu1:.12g} oracle {oracle:.12g} relative_error {abs(mu1 - oracle) / oracle:.3g}")
