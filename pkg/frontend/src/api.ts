/** Thin typed client over the service HTTP API.
 *
 * All analysis numbers displayed by the UI come from these payloads; the
 * client never computes results locally.  `fetchFn` is injectable so tests
 * can run against a fake transport.
 */

import type {
  ChartPayload,
  DatasetInfo,
  FrameReport,
  PoseJson,
  SessionInfo,
  SessionState,
  ViewKind,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, readonly detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export interface CameraRequest {
  position: [number, number, number];
  look_at: [number, number, number];
  up?: [number, number, number];
  fov_deg?: number;
  near?: number;
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async json<T>(url: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + url, init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = (await resp.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  listDatasets(): Promise<{ datasets: DatasetInfo[] }> {
    return this.json("/datasets");
  }

  createSession(workspaceId?: string): Promise<SessionInfo> {
    return this.json("/sessions", {
      method: "POST",
      body: JSON.stringify(workspaceId ? { workspace_id: workspaceId } : {}),
    });
  }

  sessionState(sid: string): Promise<SessionState> {
    return this.json(`/sessions/${sid}`);
  }

  postFrame(sid: string, png: Blob | ArrayBuffer): Promise<FrameReport> {
    return this.json(`/sessions/${sid}/frames`, { method: "POST", body: png });
  }

  chart(sid: string, viewId: number): Promise<ChartPayload> {
    return this.json(`/sessions/${sid}/charts/${viewId}`);
  }

  placeView(
    sid: string,
    kind: ViewKind,
    params: Record<string, unknown>,
    pose?: PoseJson,
  ): Promise<{ view_id: number }> {
    return this.json(`/sessions/${sid}/views`, {
      method: "POST",
      body: JSON.stringify({ kind, params, ...(pose ? { pose } : {}) }),
    });
  }

  moveView(sid: string, viewId: number, pose: PoseJson): Promise<{ ok: boolean }> {
    return this.json(`/sessions/${sid}/views/${viewId}`, {
      method: "PATCH",
      body: JSON.stringify({ pose }),
    });
  }

  deleteView(sid: string, viewId: number): Promise<{ ok: boolean }> {
    return this.json(`/sessions/${sid}/views/${viewId}`, { method: "DELETE" });
  }

  renderUrl(
    sid: string,
    mode: "mip" | "dvr",
    w: number,
    h: number,
    camera: CameraRequest,
    tf?: unknown,
  ): string {
    const params = new URLSearchParams({
      mode,
      w: String(w),
      h: String(h),
      camera: JSON.stringify(camera),
    });
    if (tf !== undefined) params.set("tf", JSON.stringify(tf));
    return `${this.base}/sessions/${sid}/render?${params.toString()}`;
  }

  async fetchRender(url: string): Promise<{ blob: Blob; hash: string | null }> {
    const resp = await this.fetchFn(url);
    if (!resp.ok) throw new ApiError(resp.status, resp.statusText);
    return { blob: await resp.blob(), hash: resp.headers.get("X-Content-Hash") };
  }

  demoFrameUrl(dataset: string, index: number): string {
    const params = new URLSearchParams({ dataset, index: String(index) });
    return `${this.base}/demo/frame?${params.toString()}`;
  }

  async fetchDemoFrame(dataset: string, index: number): Promise<ArrayBuffer> {
    const resp = await this.fetchFn(this.demoFrameUrl(dataset, index));
    if (!resp.ok) throw new ApiError(resp.status, resp.statusText);
    return resp.arrayBuffer();
  }
}
