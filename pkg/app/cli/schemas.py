"""Request pieces shared by several commands."""

import json
from typing import Annotated, Any, Dict, List, Literal

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field

from app.config import settings
from app.fem import EigenOptions


def parse_int_list(value: Any) -> Any:
    if isinstance(value, str):
        return [int(part) for part in value.replace(" ", "").split(",") if part]
    return value


IntList = Annotated[List[int], BeforeValidator(parse_int_list)]


class CommandRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")


class EigenRequest(CommandRequest):
    n_eigs: int = Field(default_factory=lambda: settings.n_eigs, ge=2, description="eigenvalues to compute")
    solver: Literal["auto", "dense", "iterative"] = Field(default="auto", description="eigensolver path")

    def eigen_options(self) -> EigenOptions:
        return EigenOptions(n_eigs=self.n_eigs, solver=self.solver)


def print_values(name: str, values) -> None:
    for i, value in enumerate(values):
        print(f"{name}_{i} {float(value):.12g}")


def print_json(data: Dict[str, Any]) -> None:
    print(json.dumps(data, indent=2, sort_keys=True))
