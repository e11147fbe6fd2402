// Typed client for the planning service. The console never computes doses
// itself; everything displayed comes back from these calls.

export interface SurfaceSpec {
  width_m: number;
  length_m: number;
  resolution_m?: number;
}

export interface ProfileDoc {
  id: string;
  cutoff_radius_m: number;
  fit_order: number;
  max_residual_W_m2: number;
}

export interface RegionDoc {
  vertices: number[][];
  polygon: number[][];
  bounds: number[];
  max_residual_m: number;
}

export interface ParamsEcho {
  k: number;
  rate: number;
  v_max: number;
  accel: number;
  motion: string;
  lamp_on: boolean;
  required_dose_J_m2: number;
}

export interface PlanDoc {
  waypoints: number[][];
  commanded_velocity_m_s: number;
  pass_spacing_m: number;
  scale_factor: number;
  d_min_J_m2: number;
  d_req_J_m2: number;
}

export interface SceneDoc {
  id: string;
  surface: Required<SurfaceSpec>;
  profile_id: string;
  region: RegionDoc | null;
  params: ParamsEcho | null;
  plan: PlanDoc | null;
  run_ids: string[];
}

export interface HeatmapDoc {
  width: number;
  height: number;
  resolution_m: number;
  origin_m: number[];
  d_req_J_m2: number;
  dose: number[];
  normalized: number[];
}

export interface ReportDoc {
  fraction_covered: number;
  min_dose_J_m2: number;
  max_dose_J_m2: number;
  mean_dose_J_m2: number;
  d_req_J_m2: number;
  region_cells: number;
  failing_cells: number[][];
}

export interface RunEvent {
  type: "progress" | "done" | "failed";
  t_s?: number;
  x_m?: number;
  y_m?: number;
  speed_m_s?: number;
  heatmap?: HeatmapDoc;
  report?: ReportDoc;
  error?: string;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(path, init);
  if (!response.ok) {
    let detail = `${response.status}`;
    try {
      const body = await response.json();
      detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(response.status, detail);
  }
  return response.json() as Promise<T>;
}

function postJson<T>(path: string, body?: unknown): Promise<T> {
  return request<T>(path, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: body === undefined ? undefined : JSON.stringify(body),
  });
}

function putJson<T>(path: string, body: unknown): Promise<T> {
  return request<T>(path, {
    method: "PUT",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  });
}

export function uploadProfileCsv(csv: string, order = 15): Promise<ProfileDoc> {
  return request<ProfileDoc>(`/profiles?order=${order}`, {
    method: "POST",
    headers: { "content-type": "text/csv" },
    body: csv,
  });
}

export function createScene(surface: SurfaceSpec, profileId: string): Promise<SceneDoc> {
  return postJson<SceneDoc>("/scenes", { surface, profile_id: profileId });
}

export function putRegion(sceneId: string, vertices: number[][]): Promise<RegionDoc> {
  return putJson<RegionDoc>(`/scenes/${sceneId}/region`, { vertices });
}

export function putParams(
  sceneId: string,
  params: { k: number; rate: number; v_max?: number; accel?: number; motion?: string; lamp_on?: boolean },
): Promise<ParamsEcho> {
  return putJson<ParamsEcho>(`/scenes/${sceneId}/params`, params);
}

export function postPlan(sceneId: string): Promise<PlanDoc> {
  return postJson<PlanDoc>(`/scenes/${sceneId}/plan`);
}

export async function postExecute(sceneId: string): Promise<string> {
  const body = await postJson<{ run_id: string }>(`/scenes/${sceneId}/execute`);
  return body.run_id;
}

export function getReport(runId: string): Promise<ReportDoc> {
  return request<ReportDoc>(`/runs/${runId}/report`);
}

export function eventsUrl(runId: string): string {
  return `/runs/${runId}/events`;
}

/** Subscribe to a run's progress stream; resolves on the terminal event. */
export function followRun(
  runId: string,
  onEvent: (event: RunEvent) => void,
): Promise<RunEvent> {
  return new Promise((resolve, reject) => {
    const source = new EventSource(eventsUrl(runId));
    source.onmessage = (message) => {
      const event = JSON.parse(message.data) as RunEvent;
      onEvent(event);
      if (event.type === "done" || event.type === "failed") {
        source.close();
        resolve(event);
      }
    };
    source.onerror = () => {
      source.close();
      reject(new Error("event stream interrupted"));
    };
  });
}
