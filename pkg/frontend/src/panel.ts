// Parameter form, action buttons, and verdict readout.

import type { ConsoleState } from "./state";
import { canExecute, canPlan, requiredDoseReadout } from "./state";

export const RATE_OPTIONS = [
  { value: 0.9, label: "90%" },
  { value: 0.99, label: "99%" },
  { value: 0.999, label: "99.9%" },
  { value: 0.9999, label: "99.99%" },
  { value: 0.99999, label: "99.999%" },
];

export const K_SLIDER = { min: 0.001, max: 1.0, step: 0.0001, initial: 0.0867 };

export interface PanelHandlers {
  onParamsChanged(k: number, rate: number): void;
  onPlan(): void;
  onExecute(): void;
  onClearRegion(): void;
  onUseReferenceSource(): void;
  onProfileCsv(text: string): void;
}

export interface Panel {
  root: HTMLElement;
  update(state: ConsoleState): void;
  currentK(): number;
  currentRate(): number;
}

export function createPanel(handlers: PanelHandlers): Panel {
  const root = document.createElement("div");
  root.className = "panel";
  root.innerHTML = `
    <section>
      <h2>UV source</h2>
      <button id="use-reference">Use reference source</button>
      <label class="file">or upload measurement CSV
        <input type="file" id="profile-csv" accept=".csv,text/csv" />
      </label>
      <div id="profile-status" class="muted">no profile loaded</div>
    </section>
    <section>
      <h2>Disinfection target</h2>
      <label>rate constant k (m&sup2;/J)
        <input type="range" id="k-slider"
               min="${K_SLIDER.min}" max="${K_SLIDER.max}" step="${K_SLIDER.step}"
               value="${K_SLIDER.initial}" />
        <span id="k-value">${K_SLIDER.initial.toFixed(4)}</span>
      </label>
      <fieldset id="rate-group">
        <legend>disinfection rate</legend>
        ${RATE_OPTIONS.map(
          (option, i) => `
          <label><input type="radio" name="rate" value="${option.value}"
                        ${i === 0 ? "checked" : ""} /> ${option.label}</label>`,
        ).join("")}
      </fieldset>
      <div class="readout">required dose:
        <strong id="dose-readout">&mdash;</strong>
      </div>
    </section>
    <section>
      <h2>Mission</h2>
      <div class="muted">click 4 corners on the surface to designate the region</div>
      <button id="clear-region">Clear region</button>
      <button id="plan" disabled>Plan path</button>
      <button id="execute" disabled>Execute path</button>
      <div id="plan-summary" class="muted"></div>
      <div id="status" class="muted"></div>
      <div id="verdict"></div>
    </section>
  `;

  const kSlider = root.querySelector<HTMLInputElement>("#k-slider")!;
  const kValue = root.querySelector<HTMLSpanElement>("#k-value")!;
  const doseReadout = root.querySelector<HTMLElement>("#dose-readout")!;
  const planButton = root.querySelector<HTMLButtonElement>("#plan")!;
  const executeButton = root.querySelector<HTMLButtonElement>("#execute")!;
  const planSummary = root.querySelector<HTMLElement>("#plan-summary")!;
  const statusLine = root.querySelector<HTMLElement>("#status")!;
  const verdictBox = root.querySelector<HTMLElement>("#verdict")!;
  const profileStatus = root.querySelector<HTMLElement>("#profile-status")!;

  const currentK = () => Number(kSlider.value);
  const currentRate = () =>
    Number(root.querySelector<HTMLInputElement>("input[name=rate]:checked")!.value);

  kSlider.addEventListener("input", () => {
    kValue.textContent = currentK().toFixed(4);
  });
  kSlider.addEventListener("change", () => handlers.onParamsChanged(currentK(), currentRate()));
  root.querySelector("#rate-group")!.addEventListener("change", () => {
    handlers.onParamsChanged(currentK(), currentRate());
  });
  root.querySelector("#use-reference")!.addEventListener("click", handlers.onUseReferenceSource);
  root.querySelector<HTMLInputElement>("#profile-csv")!.addEventListener("change", async (e) => {
    const input = e.target as HTMLInputElement;
    const file = input.files?.[0];
    if (file) handlers.onProfileCsv(await file.text());
  });
  planButton.addEventListener("click", handlers.onPlan);
  executeButton.addEventListener("click", handlers.onExecute);
  root.querySelector("#clear-region")!.addEventListener("click", handlers.onClearRegion);

  function update(state: ConsoleState): void {
    profileStatus.textContent = state.profileId
      ? `profile ${state.profileId}${state.sceneId ? ` / scene ${state.sceneId}` : ""}`
      : "no profile loaded";

    const dose = requiredDoseReadout(state);
    doseReadout.textContent = dose === null ? "—" : `${dose.toFixed(2)} J/m²`;

    planButton.disabled = !canPlan(state);
    executeButton.disabled = !canExecute(state);

    planSummary.textContent = state.plan
      ? `sweep at ${state.plan.commanded_velocity_m_s.toFixed(2)} m/s, ` +
        `${state.plan.waypoints.length / 2} passes ` +
        `(D_min ${state.plan.d_min_J_m2.toFixed(2)} J/m² at full speed)`
      : "";

    if (state.error) {
      statusLine.textContent = state.error;
      statusLine.className = "error";
    } else if (state.running) {
      statusLine.textContent = "executing… dose accumulating";
      statusLine.className = "muted";
    } else {
      statusLine.textContent = "";
      statusLine.className = "muted";
    }

    if (state.verdict?.kind === "pass") {
      verdictBox.innerHTML = `<div class="verdict pass">PASS — every region cell reached the required dose</div>`;
    } else if (state.verdict?.kind === "fail") {
      const cells = state.verdict.failingCells
        .slice(0, 8)
        .map(([x, y]) => `(${x.toFixed(3)}, ${y.toFixed(3)})`)
        .join(", ");
      const extra =
        state.verdict.failingCells.length > 8
          ? ` and ${state.verdict.failingCells.length - 8} more`
          : "";
      verdictBox.innerHTML = `<div class="verdict fail">FAIL — under-dosed cells at ${cells}${extra}</div>`;
    } else {
      verdictBox.innerHTML = "";
    }
  }

  return { root, update, currentK, currentRate };
}
