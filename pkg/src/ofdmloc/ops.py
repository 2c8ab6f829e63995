"""Operation counters for complexity accounting.

Counters are opt-in: functions that accept a counter do no bookkeeping when
it is None. Counts tally the element-operations the vectorized code actually
evaluates (complex multiply-adds, transcendental evaluations), so ratios
between runs reflect real work.
"""

from __future__ import annotations

from collections import defaultdict


class OpCounter:
    """Named integer accumulators."""

    def __init__(self):
        self._counts = defaultdict(int)

    def add(self, key: str, n: int):
        self._counts[key] += int(n)

    def get(self, key: str) -> int:
        return self._counts.get(key, 0)

    def merge(self, other: "OpCounter"):
        for k, v in other._counts.items():
            self._counts[k] += v

    def as_dict(self) -> dict[str, int]:
        return dict(self._counts)

    def __repr__(self):
        inner = ", ".join(f"{k}={v}" for k, v in sorted(self._counts.items()))
        return f"OpCounter({inner})"
