import logging
from typing import Sequence

import numpy as np
from rich.console import Console
from rich.logging import RichHandler

# Initialize a single console to be imported across all apps
console = Console()

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)


def setup_logging(verbose: bool = False):
    """Routes the nmkdv logger hierarchy through rich. Safe to call repeatedly."""
    logger = logging.getLogger("nmkdv")
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        handler = RichHandler(console=Console(stderr=True), show_path=False, markup=False)
        handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
        logger.addHandler(handler)


def to_pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def from_pair(pair: Sequence[float]) -> complex:
    return complex(pair[0], pair[1])


def parse_grid(text: str) -> tuple[float, float, int]:
    """Parses 'lo:hi:n' into (lo, hi, n)."""
    try:
        lo, hi, n = text.split(":")
        lo_f, hi_f, n_i = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise ValueError(f"grid must look like lo:hi:n, got {text!r}") from exc
    if n_i < 2 or hi_f <= lo_f:
        raise ValueError(f"grid needs hi > lo and n >= 2, got {text!r}")
    return lo_f, hi_f, n_i

def parse_floats(text: str) -> list[float]:
    return [float(s) for s in text.split(",") if s.strip()]
