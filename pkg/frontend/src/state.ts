// View state store. The design shown on screen always mirrors the last
// acknowledged server state; drafts and gestures never mutate it locally.

import type { DesignDoc, EditDiagnostics, GraphDump, SessionState } from './types.js';

export interface OverlayToggles {
  graph: boolean;
  residuals: boolean;
  thirds: boolean;
}

export interface MetricPanel {
  size_rel: number | null;
  pos_rel: number | null;
  op: number | null;
}

export interface ViewState {
  session: SessionState | null;
  design: DesignDoc | null;
  graph: GraphDump | null;
  selected: number | null;
  overlays: OverlayToggles;
  draft: string | null;
  busy: boolean;
  error: string | null;
}

type Listener = (state: ViewState) => void;

export class EditorStore {
  private state: ViewState = {
    session: null,
    design: null,
    graph: null,
    selected: null,
    overlays: { graph: false, residuals: true, thirds: false },
    draft: null,
    busy: false,
    error: null,
  };
  private listeners: Listener[] = [];

  get view(): ViewState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  private patch(partial: Partial<ViewState>): void {
    this.state = { ...this.state, ...partial };
    this.emit();
  }

  /** Replace the view with an acknowledged server state. */
  acknowledge(session: SessionState): void {
    const keepSelected =
      this.state.selected !== null && this.state.selected < session.design.elements.length
        ? this.state.selected
        : null;
    this.patch({
      session,
      design: session.design,
      selected: keepSelected,
      draft: null,
      busy: false,
      error: null,
    });
  }

  setGraph(graph: GraphDump | null): void {
    this.patch({ graph });
  }

  select(index: number | null): void {
    this.patch({ selected: index });
  }

  toggleOverlay(name: keyof OverlayToggles): void {
    const overlays = { ...this.state.overlays, [name]: !this.state.overlays[name] };
    this.patch({ overlays });
  }

  setDraft(draft: string | null): void {
    this.patch({ draft });
  }

  /** Mark an edit in flight; submissions are disabled until acknowledged. */
  beginSubmit(): boolean {
    if (this.state.busy) return false;
    this.patch({ busy: true, error: null });
    return true;
  }

  fail(message: string): void {
    // the draft is retained so the user can retry
    this.patch({ busy: false, error: message });
  }

  get canUndo(): boolean {
    return (this.state.session?.cursor ?? 0) > 0;
  }

  get canRedo(): boolean {
    const s = this.state.session;
    return s !== null && s.cursor < s.history_length;
  }

  /** Size Rel / Pos Rel / Op of the last acknowledged edit. */
  metricPanel(): MetricPanel {
    const diag: EditDiagnostics | undefined = this.state.session?.last?.diagnostics;
    if (!diag) return { size_rel: null, pos_rel: null, op: null };
    return { size_rel: diag.size_rel, pos_rel: diag.pos_rel, op: diag.op };
  }
}
