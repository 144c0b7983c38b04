"""Certified reproduction of Tribonacci-factorial product results."""

from .bounds import cascade_theorem1, cascade_theorem2, cascade_theorem3, replay
from .factorials import FactorialMultiset, decompose, smoothness
from .search import run_pipeline, search_negative, search_positive, verify_claimed
from .sequence import term, values
from .valuations import nu, nu2_tribo_closed

__version__ = "0.1.0"

__all__ = [
    "FactorialMultiset",
    "cascade_theorem1",
    "cascade_theorem2",
    "cascade_theorem3",
    "decompose",
    "nu",
    "nu2_tribo_closed",
    "replay",
    "run_pipeline",
    "search_negative",
    "search_positive",
    "smoothness",
    "term",
    "values",
    "verify_claimed",
]
