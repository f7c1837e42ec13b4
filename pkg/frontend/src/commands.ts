/** Outbound command construction and the client-side mirror of the swarm
 * hyperparameter invariants, so obviously invalid edits never reach the wire. */

import { Command, GuideCommand, ReleaseCommand, SetParamsCommand } from "./schemas";

export function buildGuide(x: number, y: number): GuideCommand {
  return { type: "guide", x, y };
}

export function buildRelease(): ReleaseCommand {
  return { type: "release" };
}

export interface ParamsForm {
  c1?: number;
  c2?: number;
  c3?: number;
  c4?: number;
  c5?: number;
  s?: number;
  T?: number;
}

/** Validate a (possibly partial) edit against the current values. Returns a
 * list of human-readable problems; empty means the edit may be sent. */
export function validateParams(form: ParamsForm, current: ParamsForm = {}): string[] {
  const merged = { ...current, ...form };
  const problems: string[] = [];
  if (merged.c1 !== undefined && merged.c2 !== undefined && merged.c1 > merged.c2) {
    problems.push("c1 must not exceed c2");
  }
  if (
    merged.c1 !== undefined &&
    merged.c2 !== undefined &&
    merged.c4 !== undefined &&
    merged.c1 + merged.c2 > merged.c4
  ) {
    problems.push("c1 + c2 must not exceed c4");
  }
  if (merged.c5 !== undefined && (merged.c5 < 0 || merged.c5 > 1)) {
    problems.push("c5 must lie in [0, 1]");
  }
  if (merged.T !== undefined && merged.T <= 1) {
    problems.push("T must exceed 1");
  }
  return problems;
}

/** Build a SET_PARAMS command, or null (with problems reported) if the edit
 * violates an invariant. */
export function buildSetParams(
  form: ParamsForm,
  current: ParamsForm = {},
): { command: SetParamsCommand | null; problems: string[] } {
  const problems = validateParams(form, current);
  if (problems.length > 0) {
    return { command: null, problems };
  }
  return { command: { type: "set_params", ...form }, problems: [] };
}

export function encode(command: Command): string {
  return JSON.stringify(command);
}
