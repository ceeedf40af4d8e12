import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Type

from dotenv import dotenv_values
from pydantic import BaseModel
from pydantic import ValidationError as PydanticValidationError

from app.config import settings
from app.errors import InvalidConfig, InvalidParams, StorageError, SteklovError
from .router import CommandParser, add_command
from .commands import experiments, graphs, spectra, surfaces

logger = logging.getLogger(__name__)

GLOBAL_OPTIONS = ("command", "command_spec", "config", "log_level", "log_file")
USAGE_ERROR_TYPES = ("extra_forbidden", "missing")


def build_parser() -> CommandParser:
    parser = CommandParser(
        prog="steklov",
        description=f"{settings.app_name} {settings.app_version}: Steklov eigenvalues of surfaces sewn along expander graphs",
    )
    parser.add_argument("--config", help="key = value file with command parameters; flags override it")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--log-file", help="also write the log to this file")

    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for group in (graphs.group, surfaces.group, spectra.group, experiments.group):
        for command in group.commands:
            add_command(subparsers, command)
    return parser


def load_config_file(path: str) -> Dict[str, str]:
    if not Path(path).is_file():
        raise StorageError(f"config file {path} not found")
    values = {}
    for key, value in dotenv_values(path).items():
        if value is None:
            raise InvalidConfig(f"config entry {key!r} has no value")
        values[key.strip().lower().replace("-", "_")] = value
    return values


def format_validation_error(e: PydanticValidationError) -> str:
    return "; ".join(f"{'.'.join(str(p) for p in err['loc']) or 'request'}: {err['msg']}" for err in e.errors())


def build_request(model: Type[BaseModel], args: argparse.Namespace) -> BaseModel:
    values: Dict[str, object] = {}
    if args.config:
        values.update(load_config_file(args.config))
    values.update({k: v for k, v in vars(args).items() if k not in GLOBAL_OPTIONS})
    try:
        return model(**values)
    except PydanticValidationError as e:
        if any(err["type"] in USAGE_ERROR_TYPES for err in e.errors()):
            raise InvalidConfig(format_validation_error(e))
        raise InvalidParams(format_validation_error(e))


def format_error(e: SteklovError) -> str:
    message = " ".join(str(e).split())
    return f"error: {e.category}: {type(e).__name__}: {message}"


def report_error(e: SteklovError) -> int:
    print(format_error(e), file=sys.stderr)
    return e.exit_code


def dispatch(args: argparse.Namespace) -> int:
    command = args.command_spec
    try:
        request = build_request(command.request, args)
        logger.debug(f"Running {command.name} with {request.model_dump()}")
        command.handler(request)
    except PydanticValidationError as e:
        return report_error(InvalidParams(format_validation_error(e)))
    except SteklovError as e:
        logger.debug(f"{command.name} failed", exc_info=True)
        return report_error(e)
    return 0


def run_cli(argv: Optional[List[str]] = None) -> int:
    """Parse and dispatch without touching logging; `app.main` is the configured entry point."""
    try:
        args = build_parser().parse_args(argv)
    except SteklovError as e:
        return report_error(e)
    return dispatch(args)
