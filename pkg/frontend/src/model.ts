/** ConsoleModel: a pure fold over the inbound message stream. Rendering reads
 * this model and nothing else, so replaying a recorded stream reproduces the
 * console state exactly. */

import { ServerMessage, StateUpdate } from "./schemas";

export const TRAIL_LIMIT = 2000;

export type ConnectionStatus = "disconnected" | "connecting" | "connected";

export interface Point {
  x: number;
  y: number;
}

export interface ConfidencePoint {
  iter: number;
  confidence: number;
  T: number;
  verdict: string;
}

export interface ConsoleModel {
  connection: ConnectionStatus;
  latest: StateUpdate | null;
  /** Swarm-centroid trail, append-only, bounded to TRAIL_LIMIT points. */
  centroidTrail: Point[];
  /** Per-drone trails keyed by drone id, each bounded to TRAIL_LIMIT. */
  droneTrails: Map<number, Point[]>;
  /** Estimated-target trail: blob positions from correct/wrong verdicts. */
  estimateTrail: Point[];
  /** One entry per received state update. */
  confidenceSeries: ConfidencePoint[];
  /** Set when a command was sent and no state update has arrived since. */
  pendingCommand: string | null;
  /** Last schema/parse failure, shown as a banner; cleared by a valid message. */
  error: string | null;
}

export function initialModel(): ConsoleModel {
  return {
    connection: "disconnected",
    latest: null,
    centroidTrail: [],
    droneTrails: new Map(),
    estimateTrail: [],
    confidenceSeries: [],
    pendingCommand: null,
    error: null,
  };
}

function pushBounded(trail: Point[], p: Point): Point[] {
  const next = trail.concat([p]);
  return next.length > TRAIL_LIMIT ? next.slice(next.length - TRAIL_LIMIT) : next;
}

export function ingest(model: ConsoleModel, update: StateUpdate): ConsoleModel {
  const n = update.drones.length;
  const centroid: Point = {
    x: update.drones.reduce((acc, d) => acc + d.x, 0) / Math.max(n, 1),
    y: update.drones.reduce((acc, d) => acc + d.y, 0) / Math.max(n, 1),
  };
  const droneTrails = new Map(model.droneTrails);
  for (const d of update.drones) {
    droneTrails.set(d.id, pushBounded(droneTrails.get(d.id) ?? [], { x: d.x, y: d.y }));
  }
  const hasMarker =
    update.blob != null && (update.verdict === "correct" || update.verdict === "wrong");
  return {
    ...model,
    latest: update,
    centroidTrail: pushBounded(model.centroidTrail, centroid),
    droneTrails,
    estimateTrail: hasMarker
      ? pushBounded(model.estimateTrail, { x: update.blob!.x, y: update.blob!.y })
      : model.estimateTrail,
    confidenceSeries: model.confidenceSeries.concat([
      {
        iter: update.iter,
        confidence: update.confidence,
        T: update.T,
        verdict: update.verdict,
      },
    ]),
    pendingCommand: null,
    error: null,
  };
}

/** Apply one raw inbound message (already JSON-parsed). Invalid payloads set
 * the error banner and leave the rest of the model untouched. */
export function applyMessage(model: ConsoleModel, raw: unknown): ConsoleModel {
  const parsed = ServerMessage.safeParse(raw);
  if (!parsed.success) {
    return { ...model, error: `invalid message: ${parsed.error.issues[0]?.message}` };
  }
  const message = parsed.data;
  switch (message.type) {
    case "state":
      return ingest(model, message);
    case "ack":
      return { ...model, error: null };
    case "error":
      return { ...model, pendingCommand: null, error: message.reason };
  }
}

export function markCommandSent(model: ConsoleModel, command: string): ConsoleModel {
  return { ...model, pendingCommand: command };
}

export function setConnection(
  model: ConsoleModel,
  connection: ConnectionStatus,
): ConsoleModel {
  return { ...model, connection };
}

/** Fold a recorded stream of raw messages into a model; pure, so two replays
 * of the same stream are identical. */
export function replay(messages: unknown[], start?: ConsoleModel): ConsoleModel {
  return messages.reduce<ConsoleModel>(applyMessage, start ?? initialModel());
}
