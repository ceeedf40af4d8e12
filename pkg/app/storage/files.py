import logging
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Generator, Union

from app.errors import StorageError

logger = logging.getLogger(__name__)


@contextmanager
def atomic_writer(path: Union[str, Path], mode: str = "w") -> Generator[IO, None, None]:
    """Write to a temporary sibling of `path`, then rename it into place on success."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    except OSError as e:
        raise StorageError(f"cannot create {path}: {e}")

    newline = "" if "b" not in mode else None
    handle = os.fdopen(fd, mode, newline=newline)
    try:
        yield handle
        handle.close()
        os.replace(tmp_name, path)
    except Exception as e:
        handle.close()
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        logger.error(f"Write to {path} aborted: {e}")
        if isinstance(e, OSError):
            raise StorageError(f"cannot write {path}: {e}")
        raise
    logger.debug(f"Wrote {path}")


def atomic_write_text(path: Union[str, Path], text: str) -> None:
    with atomic_writer(path, "w") as handle:
        handle.write(text)


def atomic_write_bytes(path: Union[str, Path], data: bytes) -> None:
    with atomic_writer(path, "wb") as handle:
        handle.write(data)
