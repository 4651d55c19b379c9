// Editor bootstrap: DOM wiring between the store, the API client, the canvas
// renderer, and the gesture controllers.

import { ApiClient, ApiError } from './api.js';
import { DragController, ResizeController, elementAt, handleAt } from './gestures.js';
import { formatAdd, formatDelete } from './ops.js';
import { fitCanvas, renderScene, toCanvasSpace } from './render.js';
import { EditorStore } from './state.js';
import type { DesignDoc, NewElementBody, SessionState } from './types.js';

const params = new URLSearchParams(location.search);
const api = new ApiClient(params.get('api') ?? location.origin);
const store = new EditorStore();

const canvas = document.getElementById('scene') as HTMLCanvasElement;
const ctx = canvas.getContext('2d')!;
const statusEl = document.getElementById('status')!;
const metricEls = {
  size_rel: document.getElementById('metric-size')!,
  pos_rel: document.getElementById('metric-pos')!,
  op: document.getElementById('metric-op')!,
};

let metrics = fitCanvas(canvas.width, canvas.height, 1, 1);
let gesture: DragController | ResizeController | null = null;
let preview: { index: number; x: number; y: number; width: number; height: number } | null = null;

function redraw(): void {
  const design = store.view.design;
  if (design) {
    metrics = fitCanvas(canvas.width, canvas.height, design.canvas.width, design.canvas.height);
  }
  renderScene(ctx, store.view, metrics, preview);
  const panel = store.metricPanel();
  metricEls.size_rel.textContent = panel.size_rel === null ? '-' : panel.size_rel.toFixed(3);
  metricEls.pos_rel.textContent = panel.pos_rel === null ? '-' : panel.pos_rel.toFixed(3);
  metricEls.op.textContent = panel.op === null ? '-' : String(panel.op);
  (document.getElementById('undo') as HTMLButtonElement).disabled = !store.canUndo || store.view.busy;
  (document.getElementById('redo') as HTMLButtonElement).disabled = !store.canRedo || store.view.busy;
  statusEl.textContent = store.view.busy
    ? 'working...'
    : store.view.error ?? (store.view.session ? `cursor ${store.view.session.cursor}` : 'no session');
}

store.subscribe(redraw);

async function refreshGraph(): Promise<void> {
  const session = store.view.session;
  if (!session) return;
  try {
    store.setGraph(await api.designGraph(session.design_id, session.alpha, 1));
  } catch {
    store.setGraph(null);
  }
}

async function submit(body: Parameters<ApiClient['applyEdit']>[1]): Promise<void> {
  const session = store.view.session;
  if (!session || !store.beginSubmit()) return;
  try {
    store.acknowledge(await api.applyEdit(session.id, body));
  } catch (err) {
    store.fail(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err));
  }
}

// --- pointer handling -------------------------------------------------------

canvas.addEventListener('pointerdown', (ev) => {
  const design = store.view.design;
  if (!design || store.view.busy) return;
  const point = toCanvasSpace(metrics, ev.offsetX, ev.offsetY);
  const selected = store.view.selected !== null ? design.elements[store.view.selected] : null;
  if (selected) {
    const handle = handleAt(selected, point, 10 / metrics.scale);
    if (handle) {
      gesture = new ResizeController(selected, handle, point);
      canvas.setPointerCapture(ev.pointerId);
      return;
    }
  }
  const hit = elementAt(design.elements, point);
  store.select(hit ? hit.index : null);
  if (hit) {
    gesture = new DragController(hit, point);
    canvas.setPointerCapture(ev.pointerId);
  }
});

canvas.addEventListener('pointermove', (ev) => {
  if (!gesture) return;
  const point = toCanvasSpace(metrics, ev.offsetX, ev.offsetY);
  const result = gesture.update(point);
  const el = store.view.selected;
  if (el !== null) {
    preview = { index: el, ...result.preview };
    redraw();
  }
});

canvas.addEventListener('pointerup', (ev) => {
  if (!gesture) return;
  const point = toCanvasSpace(metrics, ev.offsetX, ev.offsetY);
  const result = gesture.end(point);
  gesture = null;
  preview = null;
  if (result.op) {
    store.setDraft(result.op);
    void submit({ op: result.op });
  } else {
    redraw();
  }
});

// --- toolbar -----------------------------------------------------------------

document.getElementById('load')!.addEventListener('click', async () => {
  const text = (document.getElementById('design-json') as HTMLTextAreaElement).value;
  try {
    const doc = JSON.parse(text) as DesignDoc;
    const { id } = await api.createDesign(doc);
    const session: SessionState = await api.createSession(id);
    store.acknowledge(session);
    await refreshGraph();
  } catch (err) {
    store.fail(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err));
  }
});

document.getElementById('undo')!.addEventListener('click', async () => {
  const session = store.view.session;
  if (!session || !store.beginSubmit()) return;
  try {
    store.acknowledge(await api.undo(session.id));
  } catch (err) {
    store.fail(err instanceof ApiError ? err.message : String(err));
  }
});

document.getElementById('redo')!.addEventListener('click', async () => {
  const session = store.view.session;
  if (!session || !store.beginSubmit()) return;
  try {
    store.acknowledge(await api.redo(session.id));
  } catch (err) {
    store.fail(err instanceof ApiError ? err.message : String(err));
  }
});

document.getElementById('delete')!.addEventListener('click', () => {
  const selected = store.view.selected;
  if (selected !== null) void submit({ op: formatDelete(selected) });
});

document.getElementById('add-image')!.addEventListener('click', () => {
  const design = store.view.design;
  if (!design) return;
  const body: NewElementBody = { modality: 'image', asset: 'placeholder.png', width: 160, height: 120 };
  void submit({ op: formatAdd(design.elements.length), new_element: body });
});

document.getElementById('add-text')!.addEventListener('click', () => {
  const design = store.view.design;
  if (!design) return;
  const content = prompt('Text content?', 'NEW TEXT') ?? 'NEW TEXT';
  const body: NewElementBody = { modality: 'text', content, width: 240, height: 60, font_size: 32 };
  void submit({ op: formatAdd(design.elements.length), new_element: body });
});

for (const name of ['graph', 'residuals', 'thirds'] as const) {
  document.getElementById(`overlay-${name}`)!.addEventListener('change', () => {
    store.toggleOverlay(name);
    if (name === 'graph' && store.view.overlays.graph && !store.view.graph) void refreshGraph();
  });
}

document.getElementById('translate')!.addEventListener('click', async () => {
  const session = store.view.session;
  const input = document.getElementById('instruction') as HTMLInputElement;
  if (!session || !input.value.trim()) return;
  try {
    const { operations } = await api.translate(session.id, input.value);
    const previewBox = document.getElementById('op-preview')!;
    previewBox.textContent = operations.join('\n');
    if (confirm(`Apply?\n${operations.join('\n')}`)) {
      await submit({ instruction: input.value });
    }
  } catch (err) {
    store.fail(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err));
  }
});

redraw();
