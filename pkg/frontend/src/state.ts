// Console state and its transition rules. Pure functions so the invariants
// (stale-plan clearing, server-echoed dose readout, monotone heatmap
// opacity, execute gating) are unit-testable without a DOM or a server.

import type { HeatmapDoc, ParamsEcho, PlanDoc, RegionDoc, ReportDoc } from "./api";

export interface Point {
  x: number;
  y: number;
}

export type Verdict = { kind: "pass" } | { kind: "fail"; failingCells: number[][] };

export interface ConsoleState {
  profileId: string | null;
  sceneId: string | null;
  surface: { width: number; length: number };
  vertices: Point[];
  region: RegionDoc | null;
  params: ParamsEcho | null;
  plan: PlanDoc | null;
  runId: string | null;
  running: boolean;
  heatmap: HeatmapDoc | null;
  verdict: Verdict | null;
  error: string | null;
}

export function initialState(): ConsoleState {
  return {
    profileId: null,
    sceneId: null,
    surface: { width: 0.1, length: 1.0 },
    vertices: [],
    region: null,
    params: null,
    plan: null,
    runId: null,
    running: false,
    heatmap: null,
    verdict: null,
    error: null,
  };
}

export const MAX_VERTICES = 4;

/** Place the next region corner; editing the region makes any plan stale. */
export function addVertex(state: ConsoleState, point: Point): ConsoleState {
  if (state.running || state.vertices.length >= MAX_VERTICES) return state;
  return {
    ...state,
    vertices: [...state.vertices, point],
    plan: null,
    verdict: null,
    error: null,
  };
}

/** Move an existing corner (drag); the stored plan is stale afterwards. */
export function moveVertex(state: ConsoleState, index: number, point: Point): ConsoleState {
  if (state.running || index < 0 || index >= state.vertices.length) return state;
  const vertices = state.vertices.slice();
  vertices[index] = point;
  return { ...state, vertices, plan: null, region: null, verdict: null };
}

export function clearVertices(state: ConsoleState): ConsoleState {
  if (state.running) return state;
  return { ...state, vertices: [], region: null, plan: null, verdict: null };
}

export function applyRegion(state: ConsoleState, region: RegionDoc): ConsoleState {
  return { ...state, region, error: null };
}

/**
 * The dose readout is whatever the service echoed, never a local formula;
 * new parameters also invalidate the displayed plan.
 */
export function applyParams(state: ConsoleState, echo: ParamsEcho): ConsoleState {
  return { ...state, params: echo, plan: null, verdict: null, error: null };
}

export function requiredDoseReadout(state: ConsoleState): number | null {
  return state.params ? state.params.required_dose_J_m2 : null;
}

export function applyPlan(state: ConsoleState, plan: PlanDoc): ConsoleState {
  return { ...state, plan, verdict: null, error: null };
}

export function canPlan(state: ConsoleState): boolean {
  return (
    state.sceneId !== null &&
    state.region !== null &&
    state.params !== null &&
    !state.running
  );
}

/** Execute stays disabled until a current (non-stale) plan exists. */
export function canExecute(state: ConsoleState): boolean {
  return state.plan !== null && !state.running;
}

export function startRun(state: ConsoleState, runId: string): ConsoleState {
  return { ...state, runId, running: true, heatmap: null, verdict: null, error: null };
}

/**
 * Merge a progress frame. Opacity never decreases: each cell keeps the
 * maximum it has ever shown, even if a frame arrives out of order.
 */
export function mergeHeatmap(state: ConsoleState, frame: HeatmapDoc): ConsoleState {
  if (!state.heatmap) return { ...state, heatmap: frame };
  const previous = state.heatmap;
  const normalized = frame.normalized.map((value, i) =>
    Math.max(value, previous.normalized[i] ?? 0),
  );
  const dose = frame.dose.map((value, i) => Math.max(value, previous.dose[i] ?? 0));
  return { ...state, heatmap: { ...frame, normalized, dose } };
}

export function finishRun(state: ConsoleState, report: ReportDoc): ConsoleState {
  const verdict: Verdict =
    report.fraction_covered >= 1.0
      ? { kind: "pass" }
      : { kind: "fail", failingCells: report.failing_cells };
  return { ...state, running: false, verdict };
}

export function failRun(state: ConsoleState, error: string): ConsoleState {
  return { ...state, running: false, error };
}

export function setError(state: ConsoleState, error: string): ConsoleState {
  return { ...state, error };
}

type Listener = (state: ConsoleState) => void;

/** Minimal store: reducers above + subscription for rendering. */
export function createStore(start: ConsoleState = initialState()) {
  let state = start;
  const listeners: Listener[] = [];
  return {
    get(): ConsoleState {
      return state;
    },
    update(next: ConsoleState): void {
      state = next;
      for (const listener of listeners) listener(state);
    },
    apply(transition: (s: ConsoleState) => ConsoleState): void {
      this.update(transition(state));
    },
    subscribe(listener: Listener): void {
      listeners.push(listener);
      listener(state);
    },
  };
}
