import "./style.css";

import * as api from "./api";
import { hitVertex, makeViewport, render, toSurface } from "./canvas";
import { createPanel } from "./panel";
import { REFERENCE_SOURCE_CSV } from "./referenceSource";
import {
  addVertex,
  applyParams,
  applyPlan,
  applyRegion,
  canExecute,
  canPlan,
  clearVertices,
  createStore,
  failRun,
  finishRun,
  mergeHeatmap,
  moveVertex,
  setError,
  startRun,
} from "./state";

const app = document.querySelector<HTMLDivElement>("#app")!;
app.innerHTML = `
  <h1>UV disinfection console</h1>
  <div class="layout">
    <canvas id="surface" width="420" height="900"></canvas>
    <div id="panel-slot"></div>
  </div>
`;

const canvas = document.querySelector<HTMLCanvasElement>("#surface")!;
const ctx = canvas.getContext("2d")!;
const store = createStore();

const view = () =>
  makeViewport(
    canvas.width,
    canvas.height,
    store.get().surface.width,
    store.get().surface.length,
  );

async function syncRegion(): Promise<void> {
  const state = store.get();
  if (!state.sceneId || state.vertices.length < 3) return;
  try {
    const region = await api.putRegion(
      state.sceneId,
      state.vertices.map((v) => [v.x, v.y, 0]),
    );
    store.apply((s) => applyRegion(s, region));
  } catch (error) {
    store.apply((s) => setError(s, `region rejected: ${(error as Error).message}`));
  }
}

async function syncParams(k: number, rate: number): Promise<void> {
  const state = store.get();
  if (!state.sceneId) return;
  try {
    const echo = await api.putParams(state.sceneId, { k, rate });
    store.apply((s) => applyParams(s, echo));
  } catch (error) {
    store.apply((s) => setError(s, (error as Error).message));
  }
}

async function loadProfile(csv: string): Promise<void> {
  try {
    const profile = await api.uploadProfileCsv(csv);
    const scene = await api.createScene(
      { width_m: store.get().surface.width, length_m: store.get().surface.length },
      profile.id,
    );
    store.update({
      ...store.get(),
      profileId: profile.id,
      sceneId: scene.id,
      vertices: [],
      region: null,
      params: null,
      plan: null,
      verdict: null,
      heatmap: null,
      error: null,
    });
    await syncParams(panel.currentK(), panel.currentRate());
  } catch (error) {
    store.apply((s) => setError(s, (error as Error).message));
  }
}

const panel = createPanel({
  onParamsChanged: (k, rate) => void syncParams(k, rate),
  onPlan: async () => {
    const state = store.get();
    if (!canPlan(state) || !state.sceneId) return;
    try {
      const plan = await api.postPlan(state.sceneId);
      store.apply((s) => applyPlan(s, plan));
    } catch (error) {
      store.apply((s) => setError(s, (error as Error).message));
    }
  },
  onExecute: async () => {
    const state = store.get();
    if (!canExecute(state) || !state.sceneId) return;
    try {
      const runId = await api.postExecute(state.sceneId);
      store.apply((s) => startRun(s, runId));
      const terminal = await api.followRun(runId, (event) => {
        if (event.type === "progress" && event.heatmap) {
          store.apply((s) => mergeHeatmap(s, event.heatmap!));
        }
      });
      if (terminal.type === "done" && terminal.report) {
        if (terminal.report && store.get().runId === runId) {
          store.apply((s) => finishRun(s, terminal.report!));
        }
      } else {
        store.apply((s) => failRun(s, terminal.error ?? "run failed"));
      }
    } catch (error) {
      store.apply((s) => failRun(s, (error as Error).message));
    }
  },
  onClearRegion: () => store.apply(clearVertices),
  onUseReferenceSource: () => void loadProfile(REFERENCE_SOURCE_CSV),
  onProfileCsv: (text) => void loadProfile(text),
});
document.querySelector("#panel-slot")!.replaceWith(panel.root);

let dragging = -1;
canvas.addEventListener("pointerdown", (event) => {
  const rect = canvas.getBoundingClientRect();
  const point = { x: event.clientX - rect.left, y: event.clientY - rect.top };
  dragging = hitVertex(view(), store.get().vertices, point);
  if (dragging < 0) {
    store.apply((s) => addVertex(s, toSurface(view(), point)));
    if (store.get().vertices.length >= 3) void syncRegion();
  }
});
canvas.addEventListener("pointermove", (event) => {
  if (dragging < 0) return;
  const rect = canvas.getBoundingClientRect();
  const point = toSurface(view(), {
    x: event.clientX - rect.left,
    y: event.clientY - rect.top,
  });
  store.apply((s) => moveVertex(s, dragging, point));
});
canvas.addEventListener("pointerup", () => {
  if (dragging >= 0) {
    dragging = -1;
    void syncRegion();
  }
});

store.subscribe((state) => {
  render(ctx, view(), state);
  panel.update(state);
});
