import sys
import logging
from typing import List, Optional

from app.cli import build_parser, dispatch, report_error
from app.config import settings
from app.errors import SteklovError

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

logger = logging.getLogger(__name__)


def setup_logging(level: str = "INFO", log_file: Optional[str] = None) -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT, handlers=handlers, force=True)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SteklovError as e:
        return report_error(e)

    setup_logging(args.log_level, args.log_file)
    logger.info(f"Starting {settings.app_name} v{settings.app_version}: {args.command}")
    return dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
