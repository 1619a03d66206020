/**
 * Application state: the set of open views, the active brush, and the most
 * recent query results. Plain data + small mutators so tests can drive the
 * app without a DOM.
 */

import type { AbstractView, IntervalRef, KnnNeighbor } from "./api";
import type { Metaphor } from "./scene";

export interface View {
  id: number;
  level: number;
  kIndex: number;
  start: number;
  end: number;
  summaryType: "union" | "intersection" | "disjoint";
  metaphor: Metaphor;
  abstracted: boolean;
  metricColor: string | null;
  /** animation playback position */
  frame: number;
}

export interface AppState {
  views: View[];
  nextViewId: number;
  highlighted: string | null;
  neighbors: KnnNeighbor[];
  selected: IntervalRef | null;
  filter: string[] | null;
  sessionId: string | null;
}

export function initialState(): AppState {
  return {
    views: [],
    nextViewId: 1,
    highlighted: null,
    neighbors: [],
    selected: null,
    filter: null,
    sessionId: null,
  };
}

export function addView(
  state: AppState,
  ref: IntervalRef,
  summaryType: View["summaryType"],
  metaphor: Metaphor,
): View {
  const view: View = {
    id: state.nextViewId,
    level: ref.level,
    kIndex: ref.k,
    start: ref.start,
    end: ref.end,
    summaryType,
    metaphor,
    abstracted: false,
    metricColor: null,
    frame: 0,
  };
  state.views.push(view);
  state.nextViewId += 1;
  return view;
}

export function removeView(state: AppState, id: number): void {
  state.views = state.views.filter((v) => v.id !== id);
}

export function setHighlight(state: AppState, nodeId: string | null): void {
  state.highlighted = nodeId;
}

/** Merge server-side abstraction results back into local views. */
export function applyAbstraction(state: AppState, views: AbstractView[]): void {
  const byKey = new Map(views.map((v) => [`${v.level}:${v.k}`, v]));
  const kept: View[] = [];
  for (const view of state.views) {
    const server = byKey.get(`${view.level}:${view.kIndex}`);
    if (!server) continue; // level dropped by the level limit
    view.abstracted = server.abstracted;
    view.metricColor = server.color ?? null;
    kept.push(view);
  }
  state.views = kept;
}
