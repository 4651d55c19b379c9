// Canvas scene painter: elements in layer order, selection handles, and the
// graph / residual / thirds overlays.

import type { ViewState } from './state.js';
import type { ElementRecord, GraphEdge } from './types.js';

const PALETTE = ['#7aa2f7', '#9ece6a', '#e0af68', '#f7768e', '#bb9af7', '#7dcfff'];

export interface SceneMetrics {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export function fitCanvas(
  viewWidth: number,
  viewHeight: number,
  designWidth: number,
  designHeight: number,
): SceneMetrics {
  const scale = Math.min(viewWidth / designWidth, viewHeight / designHeight) * 0.95;
  return {
    scale,
    offsetX: (viewWidth - designWidth * scale) / 2,
    offsetY: (viewHeight - designHeight * scale) / 2,
  };
}

export function toCanvasSpace(m: SceneMetrics, px: number, py: number): { x: number; y: number } {
  return { x: (px - m.offsetX) / m.scale, y: (py - m.offsetY) / m.scale };
}

function centroid(el: ElementRecord): { x: number; y: number } {
  return { x: el.x, y: el.y };
}

function edgeKey(e: GraphEdge): string {
  return `${e.source}|${e.kind}|${e.target}`;
}

export function renderScene(
  ctx: CanvasRenderingContext2D,
  view: ViewState,
  metrics: SceneMetrics,
  preview: { index: number; x: number; y: number; width: number; height: number } | null = null,
): void {
  const design = view.design;
  ctx.save();
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  if (!design) {
    ctx.restore();
    return;
  }
  ctx.translate(metrics.offsetX, metrics.offsetY);
  ctx.scale(metrics.scale, metrics.scale);

  // canvas sheet
  ctx.fillStyle = '#ffffff';
  ctx.strokeStyle = '#444';
  ctx.lineWidth = 1 / metrics.scale;
  ctx.fillRect(0, 0, design.canvas.width, design.canvas.height);
  ctx.strokeRect(0, 0, design.canvas.width, design.canvas.height);

  for (const el of design.elements) {
    const geo = preview && preview.index === el.index ? preview : el;
    drawElement(ctx, el, geo, metrics);
  }

  if (view.overlays.thirds) drawThirds(ctx, design.canvas.width, design.canvas.height, metrics);
  if (view.overlays.graph && view.graph) {
    drawGraphEdges(ctx, design.elements, view.graph.edges, metrics, new Set());
  }
  if (view.overlays.residuals) {
    const violated = view.session?.last?.diagnostics.steps.flatMap(
      (s) => s.residuals?.violated_edges ?? [],
    );
    if (violated && violated.length) {
      drawGraphEdges(ctx, design.elements, violated, metrics, new Set(violated.map(edgeKey)));
    }
  }

  if (view.selected !== null) {
    const el = design.elements[view.selected];
    if (el) drawHandles(ctx, preview && preview.index === el.index ? preview : el, metrics);
  }
  ctx.restore();
}

function drawElement(
  ctx: CanvasRenderingContext2D,
  el: ElementRecord,
  geo: { x: number; y: number; width: number; height: number },
  metrics: SceneMetrics,
): void {
  ctx.save();
  ctx.translate(geo.x, geo.y);
  if (el.angle) ctx.rotate((el.angle * Math.PI) / 180);
  const left = -geo.width / 2;
  const top = -geo.height / 2;
  if (el.modality === 'text') {
    ctx.fillStyle = 'rgba(26, 27, 38, 0.06)';
    ctx.fillRect(left, top, geo.width, geo.height);
    ctx.fillStyle = '#1a1b26';
    ctx.font = `${el.font_size ?? 16}px sans-serif`;
    ctx.textAlign = el.text_align ?? 'left';
    ctx.textBaseline = 'middle';
    const anchorX = el.text_align === 'center' ? 0 : el.text_align === 'right' ? geo.width / 2 : left;
    ctx.fillText(el.content ?? '', anchorX, 0, geo.width);
  } else {
    // image placeholder: tinted box with a diagonal and the asset name
    const color = PALETTE[el.index % PALETTE.length]!;
    ctx.fillStyle = color + '55';
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.5 / metrics.scale;
    ctx.fillRect(left, top, geo.width, geo.height);
    ctx.strokeRect(left, top, geo.width, geo.height);
    ctx.beginPath();
    ctx.moveTo(left, top);
    ctx.lineTo(left + geo.width, top + geo.height);
    ctx.stroke();
    ctx.fillStyle = '#16161e';
    ctx.font = `${Math.max(11 / metrics.scale, 11)}px sans-serif`;
    ctx.textAlign = 'center';
    ctx.textBaseline = 'middle';
    ctx.fillText(el.asset ?? `image ${el.index}`, 0, 0, geo.width);
  }
  ctx.restore();
}

function drawThirds(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  metrics: SceneMetrics,
): void {
  ctx.save();
  ctx.strokeStyle = 'rgba(122, 162, 247, 0.8)';
  ctx.setLineDash([6 / metrics.scale, 6 / metrics.scale]);
  ctx.lineWidth = 1 / metrics.scale;
  for (const fx of [1 / 3, 2 / 3]) {
    ctx.beginPath();
    ctx.moveTo(width * fx, 0);
    ctx.lineTo(width * fx, height);
    ctx.stroke();
    ctx.beginPath();
    ctx.moveTo(0, height * fx);
    ctx.lineTo(width, height * fx);
    ctx.stroke();
  }
  ctx.restore();
}

function drawGraphEdges(
  ctx: CanvasRenderingContext2D,
  elements: ElementRecord[],
  edges: GraphEdge[],
  metrics: SceneMetrics,
  highlight: Set<string>,
): void {
  const byIndex = new Map(elements.map((el) => [el.index, el]));
  ctx.save();
  ctx.lineWidth = 1.5 / metrics.scale;
  ctx.font = `${12 / metrics.scale}px sans-serif`;
  ctx.textAlign = 'center';
  for (const edge of edges) {
    const src = typeof edge.source === 'number' ? byIndex.get(edge.source) : undefined;
    if (!src) continue;
    const from = centroid(src);
    let to: { x: number; y: number };
    if (edge.target === 'canvas') {
      to = { x: from.x, y: from.y - 24 / metrics.scale };
    } else {
      const tgt = byIndex.get(edge.target);
      if (!tgt) continue;
      to = centroid(tgt);
    }
    const violated = highlight.has(`${edge.source}|${edge.kind}|${edge.target}`);
    ctx.strokeStyle = violated ? '#f7768e' : edge.kind === 'size' ? '#9ece6a' : '#7aa2f7';
    ctx.beginPath();
    ctx.moveTo(from.x, from.y);
    ctx.lineTo(to.x, to.y);
    ctx.stroke();
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(edge.label, (from.x + to.x) / 2, (from.y + to.y) / 2 - 4 / metrics.scale);
  }
  ctx.restore();
}

function drawHandles(
  ctx: CanvasRenderingContext2D,
  geo: { x: number; y: number; width: number; height: number },
  metrics: SceneMetrics,
): void {
  const size = 8 / metrics.scale;
  ctx.save();
  ctx.strokeStyle = '#f7768e';
  ctx.lineWidth = 1.5 / metrics.scale;
  ctx.setLineDash([4 / metrics.scale, 3 / metrics.scale]);
  ctx.strokeRect(geo.x - geo.width / 2, geo.y - geo.height / 2, geo.width, geo.height);
  ctx.setLineDash([]);
  ctx.fillStyle = '#f7768e';
  for (const [hx, hy] of [
    [geo.x - geo.width / 2, geo.y - geo.height / 2],
    [geo.x + geo.width / 2, geo.y - geo.height / 2],
    [geo.x - geo.width / 2, geo.y + geo.height / 2],
    [geo.x + geo.width / 2, geo.y + geo.height / 2],
  ] as const) {
    ctx.fillRect(hx - size / 2, hy - size / 2, size, size);
  }
  ctx.restore();
}
