/** Payload fixtures mirroring the service's documented JSON shapes. */

import type {
  HistogramPayload,
  PoseJson,
  Scatter3Payload,
  ServerEvent,
  WorkspaceJson,
} from "../src/types.js";

export const POSE_A: PoseJson = {
  rotation: [0.0, 1.0, 0.0, 0.0],
  translation: [1.2, -3.4, 310.5],
  scale: 1,
};

/** The pre-selected inspection workspace: two length histograms plus the
 * diameter/area/length scatterplot. */
export function defaultWorkspace(): WorkspaceJson {
  return {
    views: [
      {
        view_id: 1,
        kind: "histogram",
        params: { column: "straight_length", bins: 16 },
        pose: { rotation: [1, 0, 0, 0], translation: [-220, 120, 0], scale: 1 },
      },
      {
        view_id: 2,
        kind: "histogram",
        params: { column: "curved_length", bins: 16 },
        pose: { rotation: [1, 0, 0, 0], translation: [220, 120, 0], scale: 1 },
      },
      {
        view_id: 3,
        kind: "scatter3",
        params: { x: "diameter", y: "surface_area", z: "curved_length" },
        pose: { rotation: [1, 0, 0, 0], translation: [0, -160, 0], scale: 1 },
      },
    ],
    active_dataset: "fiber_sample_A",
    sample_pose: POSE_A,
    next_view_id: 4,
  };
}

export function histogramPayload(total = 214): HistogramPayload {
  // 16 bins summing to `total`, mirroring GET /sessions/{sid}/charts/{vid}.
  const counts = new Array(16).fill(Math.floor(total / 16));
  counts[0] += total - counts.reduce((a: number, b: number) => a + b, 0);
  return {
    kind: "histogram",
    counts,
    edges: Array.from({ length: 17 }, (_, i) => i * 0.5),
    below: 0,
    above: 0,
    column: "straight_length",
    view_id: 1,
  };
}

export function scatterPayload(n = 214): Scatter3Payload {
  const seq = (k: number) => Array.from({ length: n }, (_, i) => ((i * 37 + k * 11) % 100) / 10);
  return {
    kind: "scatter3",
    x: seq(1),
    y: seq(2),
    z: seq(3),
    labels: ["diameter", "surface_area", "curved_length"],
    units: ["mm", "mm^2", "mm"],
    dropped: 0,
    view_id: 3,
  };
}

export function datasetChanged(id: number, dataset: string): ServerEvent {
  return { id, event: "dataset-changed", data: { dataset, display_name: dataset } };
}

export function poseEvent(id: number, markerId = 3): ServerEvent {
  return { id, event: "pose", data: { pose: POSE_A, marker_id: markerId } };
}

export function viewChanged(
  id: number,
  viewId: number,
  action: "placed" | "moved" | "deleted",
): ServerEvent {
  return { id, event: "view-changed", data: { view_id: viewId, action } };
}
