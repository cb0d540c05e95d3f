/** Frame replay: emulates picking up a physical sample by posting a
 * sequence of synthetic camera frames to the session. */

import type { ApiClient } from "./api.js";
import type { FrameReport } from "./types.js";

export interface ReplayLogEntry {
  index: number;
  dataset: string;
  ok: boolean;
  loaded: boolean;
  events: string[];
  error?: string;
}

export interface ReplayResult {
  log: ReplayLogEntry[];
  datasetSwitches: number;
}

/** POST `count` demo frames for each dataset in order; stops never, logs
 * per-frame failures. */
export async function replayFrames(
  api: ApiClient,
  sessionId: string,
  datasets: string[],
  countPerDataset: number,
  onFrame?: (entry: ReplayLogEntry, report: FrameReport | null) => void,
): Promise<ReplayResult> {
  const log: ReplayLogEntry[] = [];
  let switches = 0;
  let index = 0;
  for (const dataset of datasets) {
    for (let i = 0; i < countPerDataset; i++) {
      let entry: ReplayLogEntry;
      let report: FrameReport | null = null;
      try {
        const frame = await api.fetchDemoFrame(dataset, i);
        report = await api.postFrame(sessionId, frame);
        if (report.loaded) switches += 1;
        entry = {
          index,
          dataset,
          ok: true,
          loaded: report.loaded,
          events: report.events,
        };
      } catch (err) {
        entry = {
          index,
          dataset,
          ok: false,
          loaded: false,
          events: [],
          error: err instanceof Error ? err.message : String(err),
        };
      }
      log.push(entry);
      onFrame?.(entry, report);
      index += 1;
    }
  }
  return { log, datasetSwitches: switches };
}
