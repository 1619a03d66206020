/**
 * Application wiring: fetches data through an injected ApiClient, keeps the
 * AppState, and re-renders the view grid plus the query timeline into a
 * container element. All effects flow through explicit async methods so the
 * test suite can drive the app with a mocked fetch.
 */

import {
  ApiClient,
  HierarchyInfo,
  IntervalRef,
  KnnNeighbor,
  SnapshotPayload,
} from "./api";
import {
  AppState,
  View,
  addView,
  applyAbstraction,
  initialState,
  removeView,
  setHighlight,
} from "./state";
import {
  Metaphor,
  abstractedScene,
  animationScene,
  degreeOrder,
  matrixScene,
  metricsSeriesScene,
  nodeLinkScene,
  rcmOrder,
} from "./scene";
import { renderScene } from "./render";
import { opacityScale, timelineDots } from "./query";

export type MatrixReorder = "degree" | "rcm";

export class App {
  state: AppState = initialState();
  hierarchy: HierarchyInfo | null = null;
  matrixReorder: MatrixReorder = "degree";
  private payloads = new Map<number, SnapshotPayload>();

  constructor(
    private api: ApiClient,
    private container: HTMLElement,
  ) {}

  /** Load the hierarchy, open the root union view, and draw. */
  async init(): Promise<void> {
    this.hierarchy = await this.api.hierarchy();
    const session = await this.api.session();
    this.state.sessionId = session.session_id;
    const top = this.hierarchy.levels[this.hierarchy.levels.length - 1];
    const root = top.intervals[0];
    await this.openView(
      { level: top.level, k: root.k, start: root.start, end: root.end },
      "union",
      "node_link",
    );
  }

  async openView(
    ref: IntervalRef,
    summaryType: View["summaryType"],
    metaphor: Metaphor,
  ): Promise<View> {
    const view = addView(this.state, ref, summaryType, metaphor);
    await this.refreshView(view);
    this.redraw();
    return view;
  }

  closeView(id: number): void {
    removeView(this.state, id);
    this.payloads.delete(id);
    this.redraw();
  }

  private async refreshView(view: View): Promise<void> {
    const payload = await this.api.snapshot(view.level, view.kIndex, {
      summaryType: view.summaryType,
      metaphor: view.metaphor,
      sessionId: this.state.sessionId ?? undefined,
    });
    this.payloads.set(view.id, payload);
  }

  /** Run a similarity query seeded by an open view. */
  async query(viewId: number, k = 10): Promise<KnnNeighbor[]> {
    const view = this.state.views.find((v) => v.id === viewId);
    if (!view) throw new Error(`no view ${viewId}`);
    const res = await this.api.knn({
      level: view.level,
      k_index: view.kIndex,
      summary_type: view.summaryType,
      k,
    });
    this.state.neighbors = res.neighbors;
    this.redraw();
    return res.neighbors;
  }

  /** Clicking a timeline dot opens the corresponding snapshot. */
  async openNeighbor(neighbor: KnnNeighbor, metaphor: Metaphor = "node_link"): Promise<View> {
    return this.openView(
      neighbor,
      neighbor.summary_type as View["summaryType"],
      metaphor,
    );
  }

  /** Brushing: highlight one node in every open view. */
  brush(nodeId: string | null): void {
    setHighlight(this.state, nodeId);
    this.redraw();
  }

  async setFilter(nodes: string[] | null): Promise<void> {
    if (!this.state.sessionId) return;
    const res = await this.api.filter(this.state.sessionId, nodes);
    this.state.filter = res.filter;
    for (const view of this.state.views) await this.refreshView(view);
    this.redraw();
  }

  /** Ask the server to abstract the current view set, then apply it. */
  async abstract(): Promise<void> {
    const visible = this.state.views.map((v) => ({
      level: v.level,
      k: v.kIndex,
      metaphor: v.metaphor,
      summary_type: v.summaryType,
    }));
    const res = await this.api.abstract(visible);
    applyAbstraction(this.state, res.visible);
    this.redraw();
  }

  setFrame(viewId: number, frame: number): void {
    const view = this.state.views.find((v) => v.id === viewId);
    if (!view) return;
    view.frame = frame;
    this.redraw();
  }

  private sceneFor(view: View) {
    if (view.abstracted) return abstractedScene(view.metricColor);
    const payload = this.payloads.get(view.id);
    if (!payload) return abstractedScene(null);
    switch (view.metaphor) {
      case "matrix": {
        const order =
          this.matrixReorder === "rcm" ? rcmOrder(payload) : degreeOrder(payload);
        return matrixScene(payload, order, this.state.highlighted);
      }
      case "metrics_series": {
        const frames = payload.frames ?? [];
        const names = ["density", "avg_clustering"] as const;
        const series = names.map((name) =>
          frames.map((f, i) => ({ bucket: view.start + i, value: f.metrics[name] })),
        );
        return metricsSeriesScene(series, [...names]);
      }
      case "animation":
        return animationScene(payload, view.frame, this.state.highlighted);
      default:
        return nodeLinkScene(payload, this.state.highlighted);
    }
  }

  redraw(): void {
    const doc = this.container.ownerDocument;
    this.container.textContent = "";
    const grid = doc.createElement("div");
    grid.className = "views";
    const opacities = opacityScale(this.state.neighbors);
    for (const view of this.state.views) {
      const cell = doc.createElement("div");
      cell.className = "view";
      cell.dataset.viewId = String(view.id);
      cell.dataset.level = String(view.level);
      cell.dataset.k = String(view.kIndex);
      const opacity = opacities.get(`${view.level}:${view.kIndex}`) ?? 1.0;
      const svg = renderScene(doc, this.sceneFor(view), opacity);
      svg.addEventListener("click", (ev) => {
        const target = ev.target as Element | null;
        const nodeId = target?.getAttribute?.("data-node-id");
        if (nodeId) this.brush(nodeId);
      });
      cell.appendChild(svg);
      grid.appendChild(cell);
    }
    this.container.appendChild(grid);
    this.container.appendChild(this.renderTimeline(doc));
  }

  private renderTimeline(doc: Document): HTMLElement {
    const bar = doc.createElement("div");
    bar.className = "timeline";
    if (!this.hierarchy) return bar;
    for (const dot of timelineDots(this.state.neighbors, this.hierarchy)) {
      const el = doc.createElement("span");
      el.className = "dot";
      el.dataset.level = String(dot.level);
      el.dataset.k = String(dot.k);
      el.style.left = `${(dot.x * 100).toFixed(1)}%`;
      el.style.top = `${(dot.y * 100).toFixed(1)}%`;
      el.style.opacity = dot.opacity.toFixed(3);
      el.addEventListener("click", () => {
        const n = this.state.neighbors.find(
          (m) => m.level === dot.level && m.k === dot.k,
        );
        if (n) void this.openNeighbor(n);
      });
      bar.appendChild(el);
    }
    return bar;
  }
}
