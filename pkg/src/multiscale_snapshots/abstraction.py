"""Automated snapshot-view abstraction and metric-to-color mapping."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .hierarchy import Interval, SnapshotHierarchy

METAPHORS = ("node_link", "matrix", "metrics_series", "animation")

LIGHT_BLUE = (0xDE, 0xEB, 0xF7)
DARK_BLUE = (0x08, 0x51, 0x9C)

DEFAULT_MAX_LEVELS = 4
DEFAULT_PER_LEVEL_BUDGET = 6


@dataclass(frozen=True)
class SnapshotView:
    interval: Interval
    metaphor: str = "node_link"
    abstracted: bool = False
    summary_type: str = "union"


@dataclass
class ViewState:
    visible: list[SnapshotView] = field(default_factory=list)
    max_levels: int = DEFAULT_MAX_LEVELS
    per_level_budget: int = DEFAULT_PER_LEVEL_BUDGET
    color_metric: str = "edge_count"

    def levels_shown(self) -> list[int]:
        return sorted({v.interval.level for v in self.visible})

    def check_invariants(self) -> None:
        if len(self.levels_shown()) > self.max_levels:
            raise AssertionError("too many distinct levels visible")
        per_level: dict[int, int] = {}
        for v in self.visible:
            if not v.abstracted:
                lvl = v.interval.level
                per_level[lvl] = per_level.get(lvl, 0) + 1
        for lvl, count in per_level.items():
            if count > self.per_level_budget:
                raise AssertionError(f"level {lvl} exceeds view budget")

    def to_json(self) -> dict:
        return {
            "visible": [
                {
                    "level": v.interval.level,
                    "k": v.interval.index_in_level,
                    "start": v.interval.start,
                    "end": v.interval.end,
                    "metaphor": v.metaphor,
                    "abstracted": v.abstracted,
                    "summary_type": v.summary_type,
                }
                for v in self.visible
            ],
            "max_levels": self.max_levels,
            "per_level_budget": self.per_level_budget,
            "color_metric": self.color_metric,
        }

    @classmethod
    def from_json(cls, data: dict, hierarchy: SnapshotHierarchy) -> "ViewState":
        views = [
            SnapshotView(
                hierarchy.get(v["level"], v["k"]),
                v.get("metaphor", "node_link"),
                bool(v.get("abstracted", False)),
                v.get("summary_type", "union"),
            )
            for v in data.get("visible", [])
        ]
        return cls(views,
                   int(data.get("max_levels", DEFAULT_MAX_LEVELS)),
                   int(data.get("per_level_budget", DEFAULT_PER_LEVEL_BUDGET)),
                   data.get("color_metric", "edge_count"))


def _coverage_by_finer(view: SnapshotView, finer: list[SnapshotView]) -> float:
    """Fraction of the view's interval covered by finer non-abstracted views."""
    covered = [False] * view.interval.width
    for f in finer:
        lo = max(f.interval.start, view.interval.start)
        hi = min(f.interval.end, view.interval.end)
        for t in range(lo, hi):
            covered[t - view.interval.start] = True
    return sum(covered) / view.interval.width


def _overlap_with_finer(view: SnapshotView, finer: list[SnapshotView]) -> int:
    return sum(view.interval.overlap(f.interval.start, f.interval.end) for f in finer)


def auto_abstract(state: ViewState, hierarchy: SnapshotHierarchy) -> ViewState:
    """Top-down abstraction pass.

    Coarse views whose interval is majority-covered (> 0.5) by finer
    non-abstracted views are abstracted; levels over budget then abstract
    views in decreasing order of overlap with finer views (ties: earlier
    start first). Deterministic and idempotent; abstracted views stay in the
    state so the UI can render them as colored rectangles.
    """
    for v in state.visible:
        hierarchy.get(v.interval.level, v.interval.index_in_level)  # validity check

    views = list(state.visible)
    # keep only the max_levels coarsest levels (level limit applies first)
    levels = sorted({v.interval.level for v in views}, reverse=True)
    keep_levels = set(levels[: state.max_levels])
    views = [v for v in views if v.interval.level in keep_levels]

    for level in sorted(keep_levels, reverse=True):  # coarse to fine
        finer = [v for v in views if v.interval.level < level and not v.abstracted]
        # (1) duplicate-period rule: majority coverage by finer views
        for i, v in enumerate(views):
            if v.interval.level != level or v.abstracted:
                continue
            if finer and _coverage_by_finer(v, finer) > 0.5:
                views[i] = replace(v, abstracted=True)
        # (2) budget rule
        active = [(i, v) for i, v in enumerate(views)
                  if v.interval.level == level and not v.abstracted]
        excess = len(active) - state.per_level_budget
        if excess > 0:
            ranked = sorted(
                active,
                key=lambda pair: (-_overlap_with_finer(pair[1], finer),
                                  pair[1].interval.start))
            for i, v in ranked[:excess]:
                views[i] = replace(v, abstracted=True)

    out = ViewState(views, state.max_levels, state.per_level_budget, state.color_metric)
    out.check_invariants()
    return out


def metric_color(value: float, lo: float, hi: float) -> str:
    """Linear light-blue to dark-blue scale, clamped to [lo, hi], as hex."""
    if lo > hi:
        raise ValueError("lo must be <= hi")
    if hi == lo:
        frac = 0.0
    else:
        frac = min(max((value - lo) / (hi - lo), 0.0), 1.0)
    rgb = tuple(round(a + (b - a) * frac) for a, b in zip(LIGHT_BLUE, DARK_BLUE))
    return "#{:02X}{:02X}{:02X}".format(*rgb)
