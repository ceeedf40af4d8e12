from .app import build_parser, dispatch, format_error, load_config_file, report_error, run_cli
from .router import Command, CommandGroup, CommandParser

__all__ = [
    "build_parser",
    "dispatch",
    "format_error",
    "load_config_file",
    "report_error",
    "run_cli",
    "Command",
    "CommandGroup",
    "CommandParser",
]
