// Pointer gesture controllers. A gesture tracks canvas-space positions and,
// on release, yields exactly one canonical operation string (or null when
// nothing effectively changed). Coordinates round to integers at gesture end,
// so the UI emits the same canonical ops as the CLI.

import { formatMove, formatResize } from './ops.js';
import type { ElementRecord } from './types.js';

export interface Point {
  x: number;
  y: number;
}

export type ResizeHandle = 'nw' | 'ne' | 'sw' | 'se';

export interface GestureResult {
  op: string | null;
  /** Live geometry for drawing the drag preview (never applied locally). */
  preview: { x: number; y: number; width: number; height: number };
}

export class DragController {
  private current: Point;

  constructor(
    private element: ElementRecord,
    private start: Point,
  ) {
    this.current = start;
  }

  update(point: Point): GestureResult {
    this.current = point;
    return { op: null, preview: this.previewGeometry() };
  }

  end(point: Point): GestureResult {
    this.current = point;
    const geo = this.previewGeometry();
    const op =
      Math.round(geo.x) === Math.round(this.element.x) &&
      Math.round(geo.y) === Math.round(this.element.y)
        ? null
        : formatMove(this.element.index, geo.x, geo.y);
    return { op, preview: geo };
  }

  private previewGeometry() {
    return {
      x: this.element.x + (this.current.x - this.start.x),
      y: this.element.y + (this.current.y - this.start.y),
      width: this.element.width,
      height: this.element.height,
    };
  }
}

/**
 * Corner-handle resize. The element's center stays fixed (matching the
 * engine's resize semantics), so the new size is twice the distance from the
 * center to the dragged corner.
 */
export class ResizeController {
  private current: Point;

  constructor(
    private element: ElementRecord,
    private handle: ResizeHandle,
    start: Point,
  ) {
    this.current = start;
  }

  update(point: Point): GestureResult {
    this.current = point;
    return { op: null, preview: this.previewGeometry() };
  }

  end(point: Point): GestureResult {
    this.current = point;
    const geo = this.previewGeometry();
    const op =
      Math.round(geo.width) === Math.round(this.element.width) &&
      Math.round(geo.height) === Math.round(this.element.height)
        ? null
        : formatResize(this.element.index, geo.width, geo.height);
    return { op, preview: geo };
  }

  private previewGeometry() {
    const w = Math.max(1, 2 * Math.abs(this.current.x - this.element.x));
    const h = Math.max(1, 2 * Math.abs(this.current.y - this.element.y));
    return { x: this.element.x, y: this.element.y, width: w, height: h };
  }
}

/** Which resize handle (if any) sits under a canvas-space point. */
export function handleAt(el: ElementRecord, point: Point, tolerance = 8): ResizeHandle | null {
  const corners: [ResizeHandle, number, number][] = [
    ['nw', el.x - el.width / 2, el.y - el.height / 2],
    ['ne', el.x + el.width / 2, el.y - el.height / 2],
    ['sw', el.x - el.width / 2, el.y + el.height / 2],
    ['se', el.x + el.width / 2, el.y + el.height / 2],
  ];
  for (const [handle, cx, cy] of corners) {
    if (Math.abs(point.x - cx) <= tolerance && Math.abs(point.y - cy) <= tolerance) return handle;
  }
  return null;
}

/** Topmost element whose bounding box contains the point (layer order). */
export function elementAt(elements: ElementRecord[], point: Point): ElementRecord | null {
  for (let i = elements.length - 1; i >= 0; i--) {
    const el = elements[i]!;
    if (
      Math.abs(point.x - el.x) <= el.width / 2 &&
      Math.abs(point.y - el.y) <= el.height / 2
    ) {
      return el;
    }
  }
  return null;
}
