// Wire types mirroring the service payloads.

export interface CanvasSize {
  width: number;
  height: number;
}

export interface ElementRecord {
  index: number;
  modality: 'image' | 'text';
  content?: string;
  asset?: string;
  x: number;
  y: number;
  width: number;
  height: number;
  angle?: number;
  font_size?: number;
  text_align?: 'left' | 'center' | 'right';
}

export interface DesignDoc {
  canvas: CanvasSize;
  elements: ElementRecord[];
}

export interface GraphEdge {
  source: number | 'canvas';
  target: number | 'canvas';
  kind: 'size' | 'position';
  label: string;
}

export interface GraphDump {
  alpha: number;
  seed: number;
  nodes: (number | 'canvas')[];
  edges: GraphEdge[];
  blocks: string;
}

export interface ResidualReport {
  total: number;
  op_residual: number;
  overlap_penalty: number;
  violated_edges: GraphEdge[];
}

export interface StepDiagnostics {
  backend: string;
  op: number;
  size_rel: number;
  pos_rel: number;
  residuals: ResidualReport | null;
  attempts: number;
  id_map: Record<string, number>;
}

export interface EditDiagnostics {
  steps: StepDiagnostics[];
  size_rel: number;
  pos_rel: number;
  op: number;
}

export interface HistoryEntry {
  operation: string[];
  diagnostics: EditDiagnostics;
}

export interface SessionState {
  id: string;
  design_id: string;
  alpha: number;
  backend: string;
  cursor: number;
  history_length: number;
  design: DesignDoc;
  last: HistoryEntry | null;
}

export interface NewElementBody {
  modality: 'image' | 'text';
  content?: string;
  asset?: string;
  width?: number;
  height?: number;
  x?: number;
  y?: number;
  font_size?: number;
  text_align?: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  path: string;
}
