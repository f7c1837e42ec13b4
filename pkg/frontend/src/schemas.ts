/** Wire schemas for the bridge protocol, mirrored with zod so every inbound
 * message is validated before it can touch the model. */

import { z } from "zod";

export const DroneState = z.object({
  id: z.number().int(),
  x: z.number(),
  y: z.number(),
  z: z.number(),
  heading: z.number(),
});
export type DroneState = z.infer<typeof DroneState>;

export const BlobSummary = z.object({
  x: z.number(),
  y: z.number(),
  relevance: z.number(),
  bbox_px: z.array(z.number().int()).nullish(),
});
export type BlobSummary = z.infer<typeof BlobSummary>;

export const Thumbnail = z.object({
  w: z.number().int(),
  h: z.number().int(),
  encoding: z.literal("pgm-base64"),
  data: z.string(),
});
export type Thumbnail = z.infer<typeof Thumbnail>;

export const StateUpdate = z.object({
  type: z.literal("state"),
  iter: z.number().int(),
  drones: z.array(DroneState),
  mode: z.string(),
  confidence: z.number(),
  T: z.number(),
  verdict: z.string(),
  blob: BlobSummary.nullish(),
  image: Thumbnail.nullish(),
  gt: z.array(z.number()).nullish(),
  timing_ms: z.number().default(0),
});
export type StateUpdate = z.infer<typeof StateUpdate>;

export const CommandAck = z.object({
  type: z.literal("ack"),
  command: z.string(),
});
export type CommandAck = z.infer<typeof CommandAck>;

export const CommandRejection = z.object({
  type: z.literal("error"),
  reason: z.string(),
});
export type CommandRejection = z.infer<typeof CommandRejection>;

export const ServerMessage = z.discriminatedUnion("type", [
  StateUpdate,
  CommandAck,
  CommandRejection,
]);
export type ServerMessage = z.infer<typeof ServerMessage>;

export interface GuideCommand {
  type: "guide";
  x: number;
  y: number;
}

export interface ReleaseCommand {
  type: "release";
}

export interface PauseCommand {
  type: "pause";
}

export interface ResumeCommand {
  type: "resume";
}

export interface SetParamsCommand {
  type: "set_params";
  c1?: number;
  c2?: number;
  c3?: number;
  c4?: number;
  c5?: number;
  s?: number;
  T?: number;
}

export interface ResetCommand {
  type: "reset";
  seed: number;
}

export type Command =
  | GuideCommand
  | ReleaseCommand
  | PauseCommand
  | ResumeCommand
  | SetParamsCommand
  | ResetCommand;
