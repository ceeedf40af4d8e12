"""
Command groups, the argparse counterpart of an API router.

Each command is a handler taking one validated request model. Flags are
generated from the request's fields (`n_eigs` becomes `--n-eigs`) and carry
strings; the model does all coercion, so a flag and a config-file entry go
through the same validation.
"""

import argparse
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Type

from pydantic import BaseModel

from app.errors import InvalidUsage


class CommandParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise InvalidUsage(message)


@dataclass
class Command:
    name: str
    request: Type[BaseModel]
    handler: Callable[[BaseModel], None]
    help: Optional[str] = None


@dataclass
class CommandGroup:
    commands: List[Command] = field(default_factory=list)

    def command(self, name: str, request: Type[BaseModel], help: Optional[str] = None):
        def decorator(handler: Callable[[BaseModel], None]):
            self.commands.append(Command(name, request, handler, help or handler.__doc__))
            return handler

        return decorator


def flag_name(field_name: str) -> str:
    return "--" + field_name.replace("_", "-")


def add_command(subparsers, command: Command) -> None:
    parser = subparsers.add_parser(
        command.name,
        help=command.help,
        description=command.help,
        argument_default=argparse.SUPPRESS,
    )
    for name, info in command.request.model_fields.items():
        if info.is_required():
            default = "required"
        elif info.default_factory is not None:
            default = "from settings"
        else:
            default = repr(info.default)
        parser.add_argument(flag_name(name), dest=name, metavar=name.upper(), help=f"{info.description or ''} ({default})")
    parser.set_defaults(command_spec=command)
