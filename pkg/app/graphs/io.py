"""Graph text format: `n k` on the first line, then one ascending `u v` pair per line."""

from pathlib import Path
from typing import Union

from app.errors import GraphFormatError
from app.storage import atomic_write_text
from .regular_graph import RegularGraph, build_regular_graph


def format_graph(g: RegularGraph) -> str:
    lines = [f"{g.n_vertices} {g.degree}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> RegularGraph:
    rows = [line.split() for line in text.splitlines() if line.strip()]
    if not rows or len(rows[0]) != 2:
        raise GraphFormatError("missing `n k` header")
    try:
        n, k = int(rows[0][0]), int(rows[0][1])
        edges = [(int(a), int(b)) for a, b in rows[1:]]
    except ValueError as e:
        raise GraphFormatError(f"malformed graph file: {e}")
    return build_regular_graph(n, k, edges)


def write_graph(g: RegularGraph, path: Union[str, Path]) -> None:
    atomic_write_text(path, format_graph(g))


def read_graph(path: Union[str, Path]) -> RegularGraph:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise GraphFormatError(f"cannot read graph file {path}: {e}")
    return parse_graph(text)
