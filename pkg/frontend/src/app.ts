// DOM wiring for the judge console.
//
// Live mode paces the run with an explicit "advance" button so the
// judge can deliberate; batch-oracle sessions are spectated read-only.

import { SessionClient, ServiceError } from "./client.js";
import {
  ViewModel,
  accusationAllowed,
  applySessionInfo,
  applyStepRecord,
  applyStreamMessage,
  applyTheory,
  applyVerdictResult,
  gridCells,
  ruleLines,
  theoryEdges,
  initialViewModel,
} from "./viewmodel.js";

const TERRAIN_COLORS = { shore: "#b7a083", bridge: "#8a5a2b", water: "#3f6fb5" };

export class ConsoleApp {
  vm: ViewModel = initialViewModel();
  private client: SessionClient;
  private closeStream: (() => void) | null = null;

  constructor(
    private root: HTMLElement,
    baseUrl: string = window.location.origin,
  ) {
    this.client = new SessionClient(baseUrl);
  }

  async start(mode: "live-human" | "batch-oracle", constellation: string, seed: number) {
    this.closeStream?.();
    const info = await this.client.createSession({ mode, constellation, seed });
    this.vm = applySessionInfo(this.vm, info);
    this.closeStream = this.client.openStream(info.session, (message) => {
      this.vm = applyStreamMessage(this.vm, message);
      this.render();
    });
    this.render();
  }

  async advance() {
    if (this.vm.sessionId === null) return;
    try {
      const record = await this.client.step(this.vm.sessionId);
      this.vm = applyStepRecord(this.vm, record);
    } catch (err) {
      if (err instanceof ServiceError && err.status === 409) {
        this.vm = { ...this.vm, error: err.message };
      } else {
        throw err;
      }
    }
    this.render();
  }

  async accuse(obligation: string, reason: string) {
    const sessionId = this.vm.sessionId;
    if (sessionId === null || !accusationAllowed(this.vm, obligation, reason)) return;
    const result = await this.client.submitAccusation(sessionId, obligation, reason);
    this.vm = applyVerdictResult(
      this.vm,
      result.accepted,
      result.revision,
      result.accepted ? `accused: (${obligation}, ${reason})` : result.reason ?? "rejected",
    );
    if (result.accepted) {
      const { theory, revision } = await this.client.theory(sessionId);
      this.vm = applyTheory(this.vm, theory, revision);
    }
    this.render();
  }

  async noAccusation() {
    if (this.vm.sessionId === null || !this.vm.pendingVerdict) return;
    const result = await this.client.submitNoAccusation(this.vm.sessionId);
    this.vm = applyVerdictResult(this.vm, result.accepted, result.revision, "no accusation");
    this.render();
  }

  render() {
    const vm = this.vm;
    this.renderGrid();
    this.text("#labels", vm.labels.length ? vm.labels.join("  ") : "(none)");
    this.renderPalette();
    this.renderScenarios();
    this.renderTheory();
    this.text("#revision", `revision ${vm.revision}`);
    this.text("#note", vm.error ?? vm.lastVerdictNote ?? "");
    const banner = this.root.querySelector<HTMLElement>("#pending-banner");
    if (banner) banner.style.display = vm.pendingVerdict ? "block" : "none";
    this.renderAccusationControls();
  }

  private renderGrid() {
    const host = this.root.querySelector<HTMLElement>("#grid");
    if (!host || this.vm.grid === null) return;
    host.style.display = "grid";
    host.style.gridTemplateColumns = `repeat(${this.vm.grid.width}, 36px)`;
    host.replaceChildren(
      ...gridCells(this.vm).map((cell) => {
        const div = document.createElement("div");
        div.className = `cell ${cell.terrain}`;
        div.style.width = "36px";
        div.style.height = "36px";
        div.style.background = TERRAIN_COLORS[cell.terrain];
        div.style.border = "1px solid #222";
        div.style.textAlign = "center";
        div.style.fontSize = "20px";
        if (cell.goal) div.textContent = "G";
        for (const person of cell.persons) {
          div.textContent = person.inWater ? "x" : "o";
          div.title = person.inWater
            ? `person ${person.id}: in water for ${person.waterSteps} steps`
            : `person ${person.id}`;
        }
        if (cell.agent) div.textContent = "A";
        return div;
      }),
    );
  }

  private renderPalette() {
    const host = this.root.querySelector<HTMLElement>("#palette");
    if (!host) return;
    host.replaceChildren(
      ...this.vm.palette.map((button) => {
        const span = document.createElement("span");
        span.className = "palette-action";
        span.textContent = button.action;
        span.style.padding = "2px 8px";
        span.style.marginRight = "4px";
        span.style.border = button.executed ? "2px solid #000" : "1px solid #888";
        span.style.opacity = button.permitted ? "1" : "0.35";
        span.style.textDecoration = button.permitted ? "none" : "line-through";
        return span;
      }),
    );
  }

  private renderScenarios() {
    const host = this.root.querySelector<HTMLElement>("#scenarios");
    if (!host) return;
    host.replaceChildren(
      ...this.vm.scenarios.map((row) => {
        const li = document.createElement("li");
        li.textContent = `{${row.rules.join(", ")}}` + (row.chosen ? "  <- picked" : "");
        li.style.fontWeight = row.chosen ? "bold" : "normal";
        return li;
      }),
    );
  }

  private renderTheory() {
    const host = this.root.querySelector<HTMLElement>("#theory");
    if (!host) return;
    const lines = ruleLines(this.vm);
    const edges = theoryEdges(this.vm).map((e) => `${e.lower} < ${e.higher}`);
    host.replaceChildren(
      ...lines.map((line) => {
        const li = document.createElement("li");
        li.textContent = line;
        return li;
      }),
      ...edges.map((line) => {
        const li = document.createElement("li");
        li.textContent = line;
        li.className = "priority-edge";
        return li;
      }),
    );
  }

  private renderAccusationControls() {
    const vm = this.vm;
    const obligation = this.root.querySelector<HTMLSelectElement>("#obligation");
    const reason = this.root.querySelector<HTMLSelectElement>("#reason");
    const accuse = this.root.querySelector<HTMLButtonElement>("#accuse");
    const pass = this.root.querySelector<HTMLButtonElement>("#no-accusation");
    if (!obligation || !reason || !accuse || !pass) return;
    fillOptions(obligation, vm.obligationOptions);
    fillOptions(reason, vm.reasonOptions);
    const enabled = vm.mode === "live-human" && vm.pendingVerdict;
    obligation.disabled = !enabled;
    reason.disabled = !enabled;
    accuse.disabled = !enabled || vm.reasonOptions.length === 0;
    pass.disabled = !enabled;
  }

  private text(selector: string, value: string) {
    const el = this.root.querySelector<HTMLElement>(selector);
    if (el) el.textContent = value;
  }
}

function fillOptions(select: HTMLSelectElement, options: string[]) {
  const current = select.value;
  select.replaceChildren(
    ...options.map((name) => {
      const option = document.createElement("option");
      option.value = name;
      option.textContent = name;
      return option;
    }),
  );
  if (options.includes(current)) select.value = current;
}

export function mount(root: HTMLElement): ConsoleApp {
  const app = new ConsoleApp(root);
  root.querySelector("#start-live")?.addEventListener("click", () => {
    const constellation =
      root.querySelector<HTMLSelectElement>("#constellation")?.value ?? "dilemma";
    const seed = Number(root.querySelector<HTMLInputElement>("#seed")?.value ?? "0");
    void app.start("live-human", constellation, seed);
  });
  root.querySelector("#start-batch")?.addEventListener("click", () => {
    const constellation =
      root.querySelector<HTMLSelectElement>("#constellation")?.value ?? "dilemma";
    const seed = Number(root.querySelector<HTMLInputElement>("#seed")?.value ?? "0");
    void app.start("batch-oracle", constellation, seed);
  });
  root.querySelector("#advance")?.addEventListener("click", () => void app.advance());
  root.querySelector("#accuse")?.addEventListener("click", () => {
    const obligation = root.querySelector<HTMLSelectElement>("#obligation")?.value ?? "";
    const reason = root.querySelector<HTMLSelectElement>("#reason")?.value ?? "";
    void app.accuse(obligation, reason);
  });
  root
    .querySelector("#no-accusation")
    ?.addEventListener("click", () => void app.noAccusation());
  return app;
}
