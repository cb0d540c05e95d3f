/** Wire types mirroring the service's documented JSON payloads. */

export interface PoseJson {
  rotation: [number, number, number, number];
  translation: [number, number, number];
  scale: number;
}

export const IDENTITY_POSE: PoseJson = {
  rotation: [1, 0, 0, 0],
  translation: [0, 0, 0],
  scale: 1,
};

export type ViewKind = "volume" | "slice" | "histogram" | "scatter3" | "bar" | "density";

export interface ViewJson {
  view_id: number;
  kind: ViewKind;
  params: Record<string, unknown>;
  pose: PoseJson;
}

export interface WorkspaceJson {
  views: ViewJson[];
  active_dataset: string | null;
  sample_pose: PoseJson;
  next_view_id: number;
}

export interface SessionInfo {
  session_id: string;
  workspace_id: string;
  restored: boolean;
}

export interface SessionState {
  session_id: string;
  workspace_id: string;
  workspace: WorkspaceJson;
  event_count: number;
}

export interface DatasetInfo {
  id: string;
  display_name: string;
  markers: number[];
  has_table: boolean;
}

export interface HistogramPayload {
  kind: "histogram";
  counts: number[];
  edges: number[];
  below: number;
  above: number;
  column?: string;
  view_id?: number;
}

export interface Scatter3Payload {
  kind: "scatter3";
  x: number[];
  y: number[];
  z: number[];
  labels: [string, string, string];
  units: [string, string, string];
  dropped: number;
  view_id?: number;
}

export interface DensityPayload {
  kind: "density";
  x: number[];
  density: number[];
  bandwidth: number;
  column?: string;
  view_id?: number;
}

export interface BarPayload {
  kind: "bar";
  labels: string[];
  values: (number | null)[];
  edges: number[];
  agg: "count" | "mean" | "sum";
  view_id?: number;
}

export type ChartPayload = HistogramPayload | Scatter3Payload | DensityPayload | BarPayload;

export interface FrameReport {
  detections: unknown[];
  events: string[];
  unresolved: number[];
  loaded: boolean;
  active_dataset: string | null;
  sample_pose: PoseJson;
}

/** Server-sent event bodies, keyed by the SSE `event:` field. */
export interface DatasetChangedEvent {
  dataset: string;
  display_name: string;
}

export interface PoseEvent {
  pose: PoseJson;
  marker_id: number;
}

export interface ViewChangedEvent {
  view_id: number;
  action: "placed" | "moved" | "deleted";
}

export type ServerEvent =
  | { id: number; event: "dataset-changed"; data: DatasetChangedEvent }
  | { id: number; event: "pose"; data: PoseEvent }
  | { id: number; event: "view-changed"; data: ViewChangedEvent };
