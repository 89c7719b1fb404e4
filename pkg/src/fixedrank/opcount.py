"""Lightweight operation counters for complexity assertions in tests.

Hot paths report their arithmetic volume and the size of the dense
temporaries they allocate.  Counting is off unless a measurement context
is active, so production runs pay a single falsy check per call site.
Not thread safe; intended for single-threaded test use.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass


@dataclass
class OpCounter:
    flops: int = 0
    max_dense_entries: int = 0


_stack: list[OpCounter] = []


@contextmanager
def measure():
    """Collect flop counts and the dense-allocation high-water mark."""
    counter = OpCounter()
    _stack.append(counter)
    try:
        yield counter
    finally:
        _stack.pop()


def add_flops(n: int) -> None:
    if _stack:
        _stack[-1].flops += int(n)


def note_dense(*shape: int) -> None:
    """Record a dense temporary of the given shape."""
    if _stack:
        entries = 1
        for s in shape:
            entries *= int(s)
        top = _stack[-1]
        if entries > top.max_dense_entries:
            top.max_dense_entries = entries
