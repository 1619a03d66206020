/**
 * Query-result presentation helpers: similarity-to-opacity mapping and
 * timeline dot placement for k-NN results.
 */

import type { HierarchyInfo, KnnNeighbor } from "./api";

/**
 * Nearest neighbour renders fully opaque, the farthest at 0.2, with a
 * linear ramp in between. A single result (or all-equal distances) is
 * fully opaque.
 */
export function opacityScale(neighbors: KnnNeighbor[]): Map<string, number> {
  const out = new Map<string, number>();
  if (neighbors.length === 0) return out;
  const ds = neighbors.map((n) => n.distance);
  const min = Math.min(...ds);
  const max = Math.max(...ds);
  const span = max - min;
  for (const n of neighbors) {
    const t = span > 0 ? (n.distance - min) / span : 0;
    out.set(`${n.level}:${n.k}`, 1.0 - 0.8 * t);
  }
  return out;
}

export interface TimelineDot {
  level: number;
  k: number;
  /** horizontal position in [0, 1]: interval midpoint over the full span */
  x: number;
  /** vertical band in [0, 1]: coarser levels sit higher */
  y: number;
  opacity: number;
}

export function timelineDots(
  neighbors: KnnNeighbor[],
  hierarchy: HierarchyInfo,
): TimelineDot[] {
  const opacity = opacityScale(neighbors);
  const span = Math.max(hierarchy.bucket_count, 1);
  const levels = Math.max(hierarchy.levels.length, 1);
  return neighbors.map((n) => ({
    level: n.level,
    k: n.k,
    x: ((n.start + n.end) / 2) / span,
    y: 1 - n.level / levels,
    opacity: opacity.get(`${n.level}:${n.k}`)!,
  }));
}
