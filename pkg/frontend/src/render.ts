/**
 * Scene graph -> SVG DOM. The only module that touches document APIs for
 * drawing, so everything upstream stays pure.
 */

import { Shape, VIEW_SIZE } from "./scene";

const SVG_NS = "http://www.w3.org/2000/svg";

const TAG: Record<Shape["kind"], string> = {
  rect: "rect",
  circle: "circle",
  line: "line",
  text: "text",
  group: "g",
  polyline: "polyline",
};

export function renderShape(doc: Document, shape: Shape): SVGElement {
  const el = doc.createElementNS(SVG_NS, TAG[shape.kind]) as SVGElement;
  for (const [key, value] of Object.entries(shape.attrs)) {
    el.setAttribute(key, String(value));
  }
  if (shape.nodeId !== undefined) {
    el.setAttribute("data-node-id", shape.nodeId);
  }
  for (const child of shape.children ?? []) {
    el.appendChild(renderShape(doc, child));
  }
  return el;
}

export function renderScene(
  doc: Document,
  scene: Shape,
  opacity = 1.0,
): SVGSVGElement {
  const svg = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  svg.setAttribute("viewBox", `-8 -8 ${VIEW_SIZE.width + 16} ${VIEW_SIZE.height + 16}`);
  svg.setAttribute("width", String(VIEW_SIZE.width));
  svg.setAttribute("height", String(VIEW_SIZE.height));
  svg.setAttribute("opacity", opacity.toFixed(3));
  svg.appendChild(renderShape(doc, scene));
  return svg;
}
