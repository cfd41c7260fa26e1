// Wire types for the reasonshield live service.

export interface GridInfo {
  width: number;
  height: number;
  terrain: string[]; // rows of "s" (shore), "b" (bridge), "w" (water)
  spawn_row: number;
  goal_row: number;
}

export interface PersonView {
  id: number;
  pos: [number, number];
  in_water_since: number | null;
}

export interface StateView {
  agent: [number, number];
  goal: [number, number];
  persons: PersonView[];
  step: number;
  delivered: boolean;
}

export interface ShieldView {
  permitted: string[];
  chosen: string[];
  proper: string[][];
  background: string[];
  ought: string | null;
}

export interface VerdictView {
  t: number;
  obligation: string;
  reason: string;
  source: string;
}

export interface StepRecord {
  type: "step";
  session: string;
  episode: number;
  t: number;
  revision: number;
  digest: string;
  labels: string[];
  shield: ShieldView;
  action: string;
  reward: number;
  terminal: boolean;
  events: unknown[][];
  verdict: VerdictView | null;
  pending_verdict: boolean;
  state_after: StateView;
}

export interface RuleView {
  id: string;
  premise: string;
  conclusion: string;
}

export interface TheoryView {
  rules: RuleView[];
  order: { lower: string; higher: string }[];
  revision: number;
}

export interface TheoryMessage {
  type: "theory";
  session: string;
  revision: number;
  theory: TheoryView;
}

export interface VerdictMessage {
  type: "verdict";
  session: string;
  t: number;
  episode: number;
  accusation: { obligation: string; reason: string } | null;
  source: string;
  revision: number;
}

export type StreamMessage = StepRecord | TheoryMessage | VerdictMessage;

export interface SessionInfo {
  session: string;
  mode: "live-human" | "batch-oracle";
  revision: number;
  grid: GridInfo;
  action_types: string[];
  theory: TheoryView;
}

export interface VerdictResponse {
  accepted: boolean;
  revision: number;
  reason?: string;
}

export const PALETTE_ACTIONS = [
  "north",
  "east",
  "south",
  "west",
  "idle",
  "pullOut",
] as const;
