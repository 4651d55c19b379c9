import { describe, expect, it } from 'vitest';

import { DragController, ResizeController, elementAt, handleAt } from '../src/gestures.js';
import type { ElementRecord } from '../src/types.js';

const headline: ElementRecord = {
  index: 3,
  modality: 'text',
  content: 'STOP DREAMING START DOING',
  x: 100,
  y: 100,
  width: 441,
  height: 336,
  font_size: 70,
  text_align: 'left',
};

describe('drag gesture', () => {
  it('emits the exact canonical move op for a drag to (583, 394)', () => {
    const drag = new DragController(headline, { x: 90, y: 80 });
    drag.update({ x: 300, y: 200 });
    const result = drag.end({ x: 90 + 483, y: 80 + 294 });
    expect(result.op).toBe('move element 3 to {"x": 583, "y": 394}');
  });

  it('rounds fractional pointer positions at gesture end', () => {
    const drag = new DragController(headline, { x: 0, y: 0 });
    const result = drag.end({ x: 482.7, y: 294.2 });
    expect(result.op).toBe('move element 3 to {"x": 583, "y": 394}');
  });

  it('returns no op when the element lands where it started', () => {
    const drag = new DragController(headline, { x: 10, y: 10 });
    drag.update({ x: 50, y: 50 });
    expect(drag.end({ x: 10.2, y: 9.9 }).op).toBeNull();
  });

  it('previews live geometry without mutating the element record', () => {
    const drag = new DragController(headline, { x: 0, y: 0 });
    const mid = drag.update({ x: 40, y: 20 });
    expect(mid.preview).toEqual({ x: 140, y: 120, width: 441, height: 336 });
    expect(headline.x).toBe(100);
  });
});

describe('resize gesture', () => {
  it('emits a center-anchored resize from a corner handle', () => {
    const resize = new ResizeController(headline, 'se', { x: 320.5, y: 268 });
    const result = resize.end({ x: 300, y: 250 });
    // width = 2*|300 - 100|, height = 2*|250 - 100|
    expect(result.op).toBe('resize element 3 to {"width": 400, "height": 300}');
  });

  it('never emits a non-positive size', () => {
    const resize = new ResizeController(headline, 'nw', { x: 0, y: 0 });
    const result = resize.end({ x: 100, y: 100 });
    expect(result.op).toBe('resize element 3 to {"width": 1, "height": 1}');
  });

  it('returns no op when dimensions are unchanged', () => {
    const resize = new ResizeController(headline, 'se', { x: 0, y: 0 });
    expect(resize.end({ x: 100 + 441 / 2, y: 100 + 336 / 2 }).op).toBeNull();
  });
});

describe('hit testing', () => {
  const elements: ElementRecord[] = [
    { index: 0, modality: 'image', asset: 'a.png', x: 100, y: 100, width: 200, height: 200 },
    { index: 1, modality: 'image', asset: 'b.png', x: 120, y: 120, width: 50, height: 50 },
  ];

  it('picks the topmost element under the pointer', () => {
    expect(elementAt(elements, { x: 120, y: 120 })?.index).toBe(1);
    expect(elementAt(elements, { x: 30, y: 30 })?.index).toBe(0);
    expect(elementAt(elements, { x: 900, y: 900 })).toBeNull();
  });

  it('detects corner handles within tolerance', () => {
    const el = elements[1]!;
    expect(handleAt(el, { x: 95, y: 95 })).toBe('nw');
    expect(handleAt(el, { x: 145, y: 145 })).toBe('se');
    expect(handleAt(el, { x: 120, y: 120 })).toBeNull();
  });
});
