// Round-trip against a real service process: the UI-side client drives an
// editing session end to end and the metric panel mirrors server diagnostics.

import { spawn, type ChildProcess } from 'node:child_process';
import { mkdtempSync, rmSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { DragController } from '../src/gestures.js';
import { EditorStore } from '../src/state.js';
import { APPENDIX_DOC } from './fixtures.js';

const PORT = 8600 + (process.pid % 300);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let storeDir: string;

async function waitForServer(timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${BASE}/designs/probe`);
      if (resp.status === 404) return; // server answering
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error('service did not come up');
}

beforeAll(async () => {
  storeDir = mkdtempSync(join(tmpdir(), 'layoutedit-ui-'));
  server = spawn(
    'python3',
    ['-m', 'layoutedit.cli', 'serve', '--port', String(PORT), '--store', storeDir],
    { stdio: 'ignore' },
  );
  await waitForServer();
}, 40_000);

afterAll(() => {
  server?.kill();
  rmSync(storeDir, { recursive: true, force: true });
});

describe('editor round trip against a live service', () => {
  it('applies a drag-generated op, mirrors diagnostics, and undoes', async () => {
    const api = new ApiClient(BASE);
    const store = new EditorStore();

    const { id: designId } = await api.createDesign(APPENDIX_DOC);
    store.acknowledge(await api.createSession(designId));
    expect(store.view.design?.elements).toHaveLength(4);

    // move the headline away first so the return drag is a real change
    store.beginSubmit();
    store.acknowledge(await api.applyEdit(store.view.session!.id, {
      op: 'move element 3 to {"x": 100, "y": 100}',
    }));
    const priorRender = structuredClone(store.view.design!);
    expect(priorRender.elements[3]!.x).toBe(100);

    // drag gesture back to (583, 394) emits the exact canonical string
    const el3 = store.view.design!.elements[3]!;
    const drag = new DragController(el3, { x: 110, y: 90 });
    drag.update({ x: 300, y: 250 });
    const gesture = drag.end({ x: 110 + 483, y: 90 + 294 });
    expect(gesture.op).toBe('move element 3 to {"x": 583, "y": 394}');

    expect(store.beginSubmit()).toBe(true);
    const ack = await api.applyEdit(store.view.session!.id, { op: gesture.op! });
    store.acknowledge(ack);

    // solver output rendered: target exactly at the requested center
    expect(store.view.design!.elements[3]!.x).toBe(583);
    expect(store.view.design!.elements[3]!.y).toBe(394);

    // metric panel mirrors the server diagnostics verbatim
    const diag = ack.last!.diagnostics;
    expect(store.metricPanel()).toEqual({
      size_rel: diag.size_rel,
      pos_rel: diag.pos_rel,
      op: diag.op,
    });
    expect(diag.op).toBe(1);
    expect(diag.size_rel).toBe(1.0);

    // undo restores the prior render input
    expect(store.canUndo).toBe(true);
    store.beginSubmit();
    store.acknowledge(await api.undo(store.view.session!.id));
    expect(store.view.design).toEqual(priorRender);
  }, 30_000);

  it('surfaces graph edges for the overlay', async () => {
    const api = new ApiClient(BASE);
    const { id: designId } = await api.createDesign(APPENDIX_DOC);
    const graph = await api.designGraph(designId, 0.1, 1);
    expect(graph.edges).toHaveLength(16);
    expect(graph.blocks).toContain('element 0 large element 1');
  });

  it('reports structured errors for invalid edits', async () => {
    const api = new ApiClient(BASE);
    const { id: designId } = await api.createDesign(APPENDIX_DOC);
    const session = await api.createSession(designId);
    await expect(api.applyEdit(session.id, { op: 'delete element 99' })).rejects.toMatchObject({
      status: 400,
    });
    // session untouched by the failed edit
    const after = await api.getSession(session.id);
    expect(after.cursor).toBe(0);
  });
});
