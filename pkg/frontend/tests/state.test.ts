import { describe, expect, it } from 'vitest';

import { EditorStore } from '../src/state.js';
import type { SessionState } from '../src/types.js';
import { APPENDIX_DOC } from './fixtures.js';

function sessionState(cursor: number, historyLength: number): SessionState {
  return {
    id: 'abc123',
    design_id: 'd1',
    alpha: 0.1,
    backend: 'solver',
    cursor,
    history_length: historyLength,
    design: structuredClone(APPENDIX_DOC),
    last:
      cursor > 0
        ? {
            operation: ['move element 3 to {"x": 583, "y": 100}'],
            diagnostics: { steps: [], size_rel: 1.0, pos_rel: 0.9, op: 1 },
          }
        : null,
  };
}

describe('EditorStore', () => {
  it('starts with no design and an empty metric panel', () => {
    const store = new EditorStore();
    expect(store.view.design).toBeNull();
    expect(store.metricPanel()).toEqual({ size_rel: null, pos_rel: null, op: null });
  });

  it('only server acknowledgments change the design', () => {
    const store = new EditorStore();
    store.acknowledge(sessionState(0, 0));
    const before = store.view.design;
    store.setDraft('move element 3 to {"x": 1, "y": 2}');
    store.select(3);
    expect(store.view.design).toBe(before); // untouched by draft/selection
    const ack = sessionState(1, 1);
    ack.design.elements[3]!.x = 583;
    store.acknowledge(ack);
    expect(store.view.design?.elements[3]?.x).toBe(583);
    expect(store.view.draft).toBeNull(); // draft cleared on ack
  });

  it('gates concurrent submissions while one is in flight', () => {
    const store = new EditorStore();
    store.acknowledge(sessionState(0, 0));
    expect(store.beginSubmit()).toBe(true);
    expect(store.beginSubmit()).toBe(false); // disabled until acknowledged
    store.acknowledge(sessionState(1, 1));
    expect(store.beginSubmit()).toBe(true);
  });

  it('keeps the draft when the server rejects the edit', () => {
    const store = new EditorStore();
    store.acknowledge(sessionState(0, 0));
    store.setDraft('delete element 99');
    store.beginSubmit();
    store.fail('not_found: element 99');
    expect(store.view.draft).toBe('delete element 99');
    expect(store.view.error).toContain('element 99');
    expect(store.view.busy).toBe(false);
  });

  it('derives undo/redo availability from the cursor', () => {
    const store = new EditorStore();
    store.acknowledge(sessionState(0, 2));
    expect(store.canUndo).toBe(false);
    expect(store.canRedo).toBe(true);
    store.acknowledge(sessionState(2, 2));
    expect(store.canUndo).toBe(true);
    expect(store.canRedo).toBe(false);
  });

  it('mirrors the last diagnostics into the metric panel', () => {
    const store = new EditorStore();
    store.acknowledge(sessionState(1, 1));
    expect(store.metricPanel()).toEqual({ size_rel: 1.0, pos_rel: 0.9, op: 1 });
  });

  it('drops the selection when the element disappears', () => {
    const store = new EditorStore();
    store.acknowledge(sessionState(0, 0));
    store.select(3);
    const smaller = sessionState(1, 1);
    smaller.design.elements = smaller.design.elements.slice(0, 2);
    store.acknowledge(smaller);
    expect(store.view.selected).toBeNull();
  });
});
