"""Multiscale temporal hierarchy of overlapping intervals + interval tree."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Interval:
    start: int  # inclusive bucket index
    end: int  # exclusive bucket index
    level: int
    index_in_level: int

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValueError(f"bad interval [{self.start},{self.end})")

    @property
    def width(self) -> int:
        return self.end - self.start

    def contains(self, t: int) -> bool:
        return self.start <= t < self.end

    def overlap(self, start: int, end: int) -> int:
        return max(0, min(self.end, end) - max(self.start, start))

    def jaccard(self, start: int, end: int) -> float:
        inter = self.overlap(start, end)
        union = (self.end - self.start) + (end - start) - inter
        return inter / union if union else 0.0

    def key(self) -> tuple[int, int]:
        return (self.level, self.index_in_level)


class _TreeNode:
    __slots__ = ("center", "left", "right", "by_start", "by_end")

    def __init__(self, center, left, right, by_start, by_end):
        self.center = center
        self.left = left
        self.right = right
        self.by_start = by_start  # intervals crossing center, sorted by start
        self.by_end = by_end  # same intervals, sorted by descending end


class IntervalTree:
    """Centered interval tree over half-open [start, end) intervals."""

    def __init__(self, intervals: list[Interval]):
        self.root = self._build(list(intervals))

    @staticmethod
    def _build(items: list[Interval]):
        if not items:
            return None
        points = sorted({x for iv in items for x in (iv.start, iv.end - 1)})
        center = points[len(points) // 2]
        left = [iv for iv in items if iv.end - 1 < center]
        right = [iv for iv in items if iv.start > center]
        mid = [iv for iv in items if iv.start <= center <= iv.end - 1]
        return _TreeNode(
            center,
            IntervalTree._build(left),
            IntervalTree._build(right),
            sorted(mid, key=lambda iv: iv.start),
            sorted(mid, key=lambda iv: -iv.end),
        )

    def stab(self, t: int) -> list[Interval]:
        """All intervals containing t, unsorted."""
        out: list[Interval] = []
        node = self.root
        while node is not None:
            if t < node.center:
                for iv in node.by_start:
                    if iv.start > t:
                        break
                    out.append(iv)
                node = node.left
            elif t > node.center:
                for iv in node.by_end:
                    if iv.end - 1 < t:
                        break
                    out.append(iv)
                node = node.right
            else:
                out.extend(node.by_start)
                node = node.right if node.right else None
                break
        return out

    def overlapping(self, start: int, end: int) -> list[Interval]:
        """All intervals overlapping [start, end), unsorted."""
        out: list[Interval] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node is None:
                continue
            for iv in node.by_start:
                if iv.start >= end:
                    break
                if iv.end > start:
                    out.append(iv)
            if start < node.center:
                stack.append(node.left)
            if end - 1 > node.center:
                stack.append(node.right)
        return out


class SnapshotHierarchy:
    """All intervals of the multiscale hierarchy for a T-bucket axis.

    Level 1 holds the T singletons; level ``l >= 2`` holds rolling windows of
    width ``2^(l-1)`` with stride half the width, clipped at T; one root
    interval spans [0, T) above the widest level. For T = 1 the single
    level-1 interval doubles as the root.
    """

    def __init__(self, t_count: int):
        if t_count < 1:
            raise ValueError("T must be >= 1")
        self.t_count = t_count
        self.levels: list[list[Interval]] = []

        level1 = [Interval(t, t + 1, 1, t) for t in range(t_count)]
        self.levels.append(level1)
        if t_count == 1:
            self.root = level1[0]
        else:
            max_exp = math.ceil(math.log2(t_count))
            for exp in range(1, max_exp + 1):
                width = 2**exp
                stride = width // 2
                level = exp + 1
                row = [
                    Interval(s, min(s + width, t_count), level, k)
                    for k, s in enumerate(range(0, t_count, stride))
                ]
                self.levels.append(row)
            self.root = Interval(0, t_count, max_exp + 2, 0)
            self.levels.append([self.root])

        self._by_key = {iv.key(): iv for iv in self.all_intervals()}
        self.tree = IntervalTree(self.all_intervals())

    @property
    def root_level(self) -> int:
        return self.root.level

    def all_intervals(self) -> list[Interval]:
        return [iv for row in self.levels for iv in row]

    @property
    def interval_count(self) -> int:
        return sum(len(row) for row in self.levels)

    def get(self, level: int, k: int) -> Interval:
        try:
            return self._by_key[(level, k)]
        except KeyError:
            raise KeyError(f"no interval at level={level}, k={k}") from None

    def non_singleton_intervals(self) -> list[Interval]:
        """The intervals that get embedded: everything above level 1.

        For T = 1 the root *is* the level-1 interval and is still embedded.
        """
        if self.t_count == 1:
            return [self.root]
        return [iv for row in self.levels[1:] for iv in row]

    def window_query(self, start: int, end: int) -> Interval:
        """Best-fitting interval by Jaccard overlap with [start, end).

        Ties break toward the smaller level, then the smaller start.
        """
        if not (0 <= start < end <= self.t_count):
            raise ValueError(f"query [{start},{end}) outside [0,{self.t_count})")
        candidates = self.tree.overlapping(start, end)
        return max(candidates, key=lambda iv: (iv.jaccard(start, end), -iv.level, -iv.start))

    def stabbing_query(self, t: int) -> list[Interval]:
        """All intervals containing bucket t, sorted by (level, start)."""
        if not (0 <= t < self.t_count):
            raise ValueError(f"t={t} outside [0,{self.t_count})")
        return sorted(self.tree.stab(t), key=lambda iv: (iv.level, iv.start))


def build_hierarchy(t_count: int) -> SnapshotHierarchy:
    return SnapshotHierarchy(t_count)
