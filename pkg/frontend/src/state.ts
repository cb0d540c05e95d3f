/** Application state as a pure reduction of the server event log.
 *
 * The UI never mutates analysis state locally: every transition is driven
 * by a server event (or a full workspace snapshot fetched after reconnect),
 * so replaying the same log always reproduces the same panels.
 */

import type { PoseJson, ServerEvent, ViewJson, WorkspaceJson } from "./types.js";
import { IDENTITY_POSE } from "./types.js";

export interface AppState {
  activeDataset: string | null;
  datasetDisplayName: string | null;
  samplePose: PoseJson;
  /** Server view ids that need (re)syncing from /sessions/{sid}. */
  staleViews: Set<number>;
  deletedViews: Set<number>;
  lastEventId: number;
  /** Transitions between two loaded datasets (cold start is a load, not a
   * switch). */
  datasetSwitches: number;
  poseEvents: number;
  connected: boolean;
}

export function initialState(): AppState {
  return {
    activeDataset: null,
    datasetDisplayName: null,
    samplePose: IDENTITY_POSE,
    staleViews: new Set(),
    deletedViews: new Set(),
    lastEventId: 0,
    datasetSwitches: 0,
    poseEvents: 0,
    connected: false,
  };
}

/** Apply one server event; returns a new state (input is not mutated). */
export function reduce(state: AppState, event: ServerEvent): AppState {
  if (event.id <= state.lastEventId) {
    return state; // replayed duplicate after reconnect
  }
  const next: AppState = {
    ...state,
    staleViews: new Set(state.staleViews),
    deletedViews: new Set(state.deletedViews),
    lastEventId: event.id,
  };
  switch (event.event) {
    case "dataset-changed": {
      if (state.activeDataset !== null && event.data.dataset !== state.activeDataset) {
        next.datasetSwitches += 1;
      }
      next.activeDataset = event.data.dataset;
      next.datasetDisplayName = event.data.display_name;
      break;
    }
    case "pose": {
      next.samplePose = event.data.pose;
      next.poseEvents += 1;
      break;
    }
    case "view-changed": {
      if (event.data.action === "deleted") {
        next.deletedViews.add(event.data.view_id);
        next.staleViews.delete(event.data.view_id);
      } else {
        next.staleViews.add(event.data.view_id);
        next.deletedViews.delete(event.data.view_id);
      }
      break;
    }
  }
  return next;
}

export function reduceAll(state: AppState, events: ServerEvent[]): AppState {
  return events.reduce(reduce, state);
}

/** Panels the UI should show for a workspace snapshot. */
export function visibleViews(workspace: WorkspaceJson, state: AppState): ViewJson[] {
  return workspace.views.filter((v) => !state.deletedViews.has(v.view_id));
}

export function setConnected(state: AppState, connected: boolean): AppState {
  if (state.connected === connected) return state;
  return { ...state, connected };
}
