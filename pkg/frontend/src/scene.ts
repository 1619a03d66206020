/**
 * Pure scene-graph construction: every metaphor maps a snapshot payload to a
 * tree of primitive shapes. Rendering to SVG happens elsewhere, so all
 * visual logic stays testable without a canvas.
 */

import type { GraphNode, SnapshotPayload } from "./api";

export type Metaphor = "node_link" | "matrix" | "metrics_series" | "animation";

export interface Shape {
  kind: "rect" | "circle" | "line" | "text" | "group" | "polyline";
  attrs: Record<string, string | number>;
  children?: Shape[];
  /** node id for brushing hit-tests, when the shape represents a graph node */
  nodeId?: string;
}

const VIEW_W = 240;
const VIEW_H = 180;
const HIGHLIGHT = "#e6550d";
const NODE_FILL = "#3182bd";
const EDGE_STROKE = "#9ecae1";

function group(children: Shape[], attrs: Record<string, string | number> = {}): Shape {
  return { kind: "group", attrs, children };
}

/** Map layout coordinates into the view box, preserving aspect. */
export function fitPositions(nodes: GraphNode[]): Map<string, [number, number]> {
  const out = new Map<string, [number, number]>();
  if (nodes.length === 0) return out;
  const xs = nodes.map((n) => n.x);
  const ys = nodes.map((n) => n.y);
  const minX = Math.min(...xs), maxX = Math.max(...xs);
  const minY = Math.min(...ys), maxY = Math.max(...ys);
  const span = Math.max(maxX - minX, maxY - minY, 1e-9);
  const pad = 12;
  const scale = Math.min(VIEW_W, VIEW_H) - 2 * pad;
  for (const n of nodes) {
    out.set(n.id, [
      pad + ((n.x - minX) / span) * scale,
      pad + ((n.y - minY) / span) * scale,
    ]);
  }
  return out;
}

export function nodeLinkScene(payload: SnapshotPayload, highlighted: string | null): Shape {
  const pos = fitPositions(payload.nodes);
  const edges: Shape[] = payload.edges.map((e) => {
    const [x1, y1] = pos.get(e.source)!;
    const [x2, y2] = pos.get(e.target)!;
    return {
      kind: "line",
      attrs: {
        x1, y1, x2, y2,
        stroke: EDGE_STROKE,
        "stroke-width": Math.min(1 + Math.log1p(e.weight), 4),
      },
    };
  });
  const nodes: Shape[] = payload.nodes.map((n) => {
    const [cx, cy] = pos.get(n.id)!;
    return {
      kind: "circle",
      nodeId: n.id,
      attrs: {
        cx, cy,
        r: n.size ? Math.min(4 + Math.sqrt(n.size), 12) : 4,
        fill: n.id === highlighted ? HIGHLIGHT : NODE_FILL,
      },
    };
  });
  return group([group(edges), group(nodes)], { class: "node-link" });
}

/** Degree-descending order; ties broken by id for determinism. */
export function degreeOrder(payload: SnapshotPayload): string[] {
  const degree = new Map<string, number>();
  for (const n of payload.nodes) degree.set(n.id, 0);
  for (const e of payload.edges) {
    degree.set(e.source, (degree.get(e.source) ?? 0) + 1);
    degree.set(e.target, (degree.get(e.target) ?? 0) + 1);
  }
  return [...degree.keys()].sort(
    (a, b) => degree.get(b)! - degree.get(a)! || a.localeCompare(b),
  );
}

/** Reverse Cuthill-McKee: BFS from low-degree vertices, output reversed. */
export function rcmOrder(payload: SnapshotPayload): string[] {
  const adj = new Map<string, string[]>();
  for (const n of payload.nodes) adj.set(n.id, []);
  for (const e of payload.edges) {
    adj.get(e.source)!.push(e.target);
    adj.get(e.target)!.push(e.source);
  }
  const deg = (id: string) => adj.get(id)!.length;
  const visited = new Set<string>();
  const order: string[] = [];
  const starts = [...adj.keys()].sort((a, b) => deg(a) - deg(b) || a.localeCompare(b));
  for (const s of starts) {
    if (visited.has(s)) continue;
    const queue = [s];
    visited.add(s);
    while (queue.length) {
      const u = queue.shift()!;
      order.push(u);
      const next = adj.get(u)!
        .filter((v) => !visited.has(v))
        .sort((a, b) => deg(a) - deg(b) || a.localeCompare(b));
      for (const v of next) {
        visited.add(v);
        queue.push(v);
      }
    }
  }
  return order.reverse();
}

export function matrixScene(
  payload: SnapshotPayload,
  order: string[],
  highlighted: string | null,
): Shape {
  const index = new Map(order.map((id, i) => [id, i]));
  const n = Math.max(order.length, 1);
  const cell = Math.min(VIEW_W, VIEW_H) / n;
  const cells: Shape[] = [];
  const weights = new Map<string, number>();
  for (const e of payload.edges) {
    weights.set(`${e.source}|${e.target}`, e.weight);
    weights.set(`${e.target}|${e.source}`, e.weight);
  }
  const maxW = Math.max(...payload.edges.map((e) => e.weight), 1);
  for (const e of payload.edges) {
    for (const [a, b] of [[e.source, e.target], [e.target, e.source]]) {
      const i = index.get(a)!, j = index.get(b)!;
      const shade = Math.round(255 - 175 * (e.weight / maxW));
      cells.push({
        kind: "rect",
        attrs: {
          x: j * cell, y: i * cell, width: cell, height: cell,
          fill: `rgb(${shade},${shade},255)`,
        },
      });
    }
  }
  const labels: Shape[] = order.map((id, i) => ({
    kind: "rect",
    nodeId: id,
    attrs: {
      x: -4, y: i * cell, width: 3, height: cell,
      fill: id === highlighted ? HIGHLIGHT : "#bbb",
    },
  }));
  return group([group(cells), group(labels)], { class: "matrix" });
}

/** One polyline per metric over the interval's buckets. */
export function metricsSeriesScene(
  series: { bucket: number; value: number }[][],
  metricNames: string[],
): Shape {
  const palette = ["#3182bd", "#31a354", "#756bb1", "#e6550d"];
  const all = series.flat().map((p) => p.value);
  const max = Math.max(...all, 1e-9);
  const lines: Shape[] = series.map((points, s) => {
    const xs = points.map((p, i) => {
      const x = (i / Math.max(points.length - 1, 1)) * VIEW_W;
      const y = VIEW_H - (p.value / max) * (VIEW_H - 10);
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    });
    return {
      kind: "polyline",
      attrs: {
        points: xs.join(" "),
        fill: "none",
        stroke: palette[s % palette.length],
        "data-metric": metricNames[s],
      },
    };
  });
  return group(lines, { class: "metrics-series" });
}

/** A single animation frame; playback just advances frameIndex. */
export function animationScene(
  payload: SnapshotPayload,
  frameIndex: number,
  highlighted: string | null,
): Shape {
  const frames = payload.frames ?? [];
  if (frames.length === 0) return group([], { class: "animation" });
  const idx = Math.min(Math.max(frameIndex, 0), frames.length - 1);
  const frame = frames[idx];
  const framePayload = { ...payload, nodes: frame.nodes, edges: frame.edges };
  const inner = nodeLinkScene(framePayload, highlighted);
  return group([inner], { class: "animation", "data-frame": idx });
}

/** Abstracted views collapse to one metric-colored rectangle. */
export function abstractedScene(color: string | null): Shape {
  return group(
    [{
      kind: "rect",
      attrs: {
        x: 0, y: 0, width: VIEW_W, height: VIEW_H,
        fill: color ?? "#deebf7",
      },
    }],
    { class: "abstracted" },
  );
}

export function collectNodeIds(scene: Shape): Set<string> {
  const out = new Set<string>();
  const walk = (s: Shape) => {
    if (s.nodeId) out.add(s.nodeId);
    s.children?.forEach(walk);
  };
  walk(scene);
  return out;
}

export const VIEW_SIZE = { width: VIEW_W, height: VIEW_H };
