// Pure view state for the judge console.
//
// Everything shown on screen is derived from the latest step record
// (never from client-side simulation) plus the last known theory.
// Messages are applied in step order: a record older than the one on
// screen is dropped, so a lagging socket can never roll the view back.

import {
  GridInfo,
  PALETTE_ACTIONS,
  SessionInfo,
  StepRecord,
  StreamMessage,
  TheoryView,
} from "./types.js";

export interface CellView {
  x: number;
  y: number;
  terrain: "shore" | "bridge" | "water";
  agent: boolean;
  goal: boolean;
  persons: { id: number; inWater: boolean; waterSteps: number | null }[];
}

export interface ActionButton {
  action: string;
  permitted: boolean;
  executed: boolean;
}

export interface ScenarioRow {
  rules: string[];
  chosen: boolean;
}

export interface TheoryEdge {
  lower: string;
  higher: string;
}

export interface ViewModel {
  sessionId: string | null;
  mode: "live-human" | "batch-oracle" | null;
  grid: GridInfo | null;
  record: StepRecord | null; // the record the whole view renders
  labels: string[];
  palette: ActionButton[];
  scenarios: ScenarioRow[];
  background: string[];
  ought: string | null;
  theory: TheoryView | null;
  revision: number;
  pendingVerdict: boolean;
  // Accusation selectors are restricted to the session's action types
  // and the accused state's labels.
  obligationOptions: string[];
  reasonOptions: string[];
  lastVerdictNote: string | null;
  error: string | null;
}

export function initialViewModel(): ViewModel {
  return {
    sessionId: null,
    mode: null,
    grid: null,
    record: null,
    labels: [],
    palette: [],
    scenarios: [],
    background: [],
    ought: null,
    theory: null,
    revision: 0,
    pendingVerdict: false,
    obligationOptions: [],
    reasonOptions: [],
    lastVerdictNote: null,
    error: null,
  };
}

export function applySessionInfo(vm: ViewModel, info: SessionInfo): ViewModel {
  return {
    ...initialViewModel(),
    sessionId: info.session,
    mode: info.mode,
    grid: info.grid,
    theory: info.theory,
    revision: info.revision,
    obligationOptions: [...info.action_types].sort(),
  };
}

function isStale(vm: ViewModel, record: StepRecord): boolean {
  if (vm.record === null) return false;
  if (record.episode !== vm.record.episode) {
    return record.episode < vm.record.episode;
  }
  return record.t <= vm.record.t;
}

export function applyStepRecord(vm: ViewModel, record: StepRecord): ViewModel {
  if (vm.sessionId !== null && record.session !== vm.sessionId) return vm;
  if (isStale(vm, record)) return vm;
  const permitted = new Set(record.shield.permitted);
  return {
    ...vm,
    record,
    labels: [...record.labels],
    palette: PALETTE_ACTIONS.map((action) => ({
      action,
      permitted: permitted.has(action),
      executed: action === record.action,
    })),
    scenarios: record.shield.proper.map((rules) => ({
      rules,
      chosen: sameSet(rules, record.shield.chosen),
    })),
    background: [...record.shield.background],
    ought: record.shield.ought,
    revision: record.revision,
    pendingVerdict: record.pending_verdict,
    reasonOptions: [...record.labels].sort(),
    lastVerdictNote: record.verdict
      ? `judged: (${record.verdict.obligation}, ${record.verdict.reason})`
      : vm.lastVerdictNote,
    error: null,
  };
}

export function applyTheory(vm: ViewModel, theory: TheoryView, revision: number): ViewModel {
  if (vm.theory !== null && revision < vm.revision) return vm;
  return { ...vm, theory, revision };
}

export function applyVerdictResult(
  vm: ViewModel,
  accepted: boolean,
  revision: number,
  note: string | null,
): ViewModel {
  return {
    ...vm,
    pendingVerdict: accepted ? false : vm.pendingVerdict,
    revision: Math.max(vm.revision, revision),
    lastVerdictNote: note,
    error: accepted ? null : note,
  };
}

export function applyStreamMessage(vm: ViewModel, message: StreamMessage): ViewModel {
  switch (message.type) {
    case "step":
      return applyStepRecord(vm, message);
    case "theory":
      return applyTheory(vm, message.theory, message.revision);
    case "verdict": {
      const note = message.accusation
        ? `accused: (${message.accusation.obligation}, ${message.accusation.reason})`
        : "no accusation";
      return {
        ...vm,
        pendingVerdict: false,
        revision: Math.max(vm.revision, message.revision),
        lastVerdictNote: note,
      };
    }
  }
}

export function gridCells(vm: ViewModel): CellView[] {
  if (vm.grid === null) return [];
  const state = vm.record?.state_after ?? null;
  const terrainName = { s: "shore", b: "bridge", w: "water" } as const;
  const cells: CellView[] = [];
  for (let y = 0; y < vm.grid.height; y += 1) {
    for (let x = 0; x < vm.grid.width; x += 1) {
      const letter = vm.grid.terrain[y][x] as "s" | "b" | "w";
      cells.push({
        x,
        y,
        terrain: terrainName[letter],
        agent: state !== null && state.agent[0] === x && state.agent[1] === y,
        goal: state !== null && state.goal[0] === x && state.goal[1] === y,
        persons:
          state === null
            ? []
            : state.persons
                .filter((p) => p.pos[0] === x && p.pos[1] === y)
                .map((p) => ({
                  id: p.id,
                  inWater: p.in_water_since !== null,
                  waterSteps:
                    p.in_water_since === null ? null : state.step - p.in_water_since,
                })),
      });
    }
  }
  return cells;
}

export function theoryEdges(vm: ViewModel): TheoryEdge[] {
  if (vm.theory === null) return [];
  return vm.theory.order.map((e) => ({ lower: e.lower, higher: e.higher }));
}

export function ruleLines(vm: ViewModel): string[] {
  if (vm.theory === null) return [];
  return vm.theory.rules.map((r) => `${r.premise} -> ${r.conclusion}`).sort();
}

export function accusationAllowed(vm: ViewModel, obligation: string, reason: string): boolean {
  return (
    vm.pendingVerdict &&
    vm.obligationOptions.includes(obligation) &&
    vm.reasonOptions.includes(reason)
  );
}

function sameSet(a: string[], b: string[]): boolean {
  if (a.length !== b.length) return false;
  const bs = new Set(b);
  return a.every((x) => bs.has(x));
}
