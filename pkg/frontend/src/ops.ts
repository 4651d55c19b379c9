// Canonical operation strings. These must match the engine's grammar byte
// for byte: gesture output goes on the wire verbatim.

export interface ParsedOp {
  action: 'move' | 'resize' | 'add' | 'delete';
  target: number;
  x?: number;
  y?: number;
  width?: number;
  height?: number;
}

export function formatMove(target: number, x: number, y: number): string {
  return `move element ${target} to {"x": ${Math.round(x)}, "y": ${Math.round(y)}}`;
}

export function formatResize(target: number, width: number, height: number): string {
  const w = Math.max(1, Math.round(width));
  const h = Math.max(1, Math.round(height));
  return `resize element ${target} to {"width": ${w}, "height": ${h}}`;
}

export function formatAdd(target: number): string {
  return `add element ${target}`;
}

export function formatDelete(target: number): string {
  return `delete element ${target}`;
}

const MOVE_RE = /^move element (\d+) to \{"x": (-?\d+), "y": (-?\d+)\}$/;
const RESIZE_RE = /^resize element (\d+) to \{"width": (\d+), "height": (\d+)\}$/;
const PLAIN_RE = /^(add|delete) element (\d+)$/;

/** Parse a canonical operation line; used to check wire fidelity. */
export function parseOp(text: string): ParsedOp {
  let m = MOVE_RE.exec(text);
  if (m) return { action: 'move', target: Number(m[1]), x: Number(m[2]), y: Number(m[3]) };
  m = RESIZE_RE.exec(text);
  if (m) return { action: 'resize', target: Number(m[1]), width: Number(m[2]), height: Number(m[3]) };
  m = PLAIN_RE.exec(text);
  if (m) return { action: m[1] as 'add' | 'delete', target: Number(m[2]) };
  throw new Error(`not a canonical operation: ${text}`);
}

export function printOp(op: ParsedOp): string {
  switch (op.action) {
    case 'move':
      return formatMove(op.target, op.x!, op.y!);
    case 'resize':
      return formatResize(op.target, op.width!, op.height!);
    case 'add':
      return formatAdd(op.target);
    case 'delete':
      return formatDelete(op.target);
  }
}
