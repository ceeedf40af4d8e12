from .files import atomic_writer, atomic_write_text, atomic_write_bytes

__all__ = [
    "atomic_writer",
    "atomic_write_text",
    "atomic_write_bytes",
]
