/**
 * The stdio wire protocol: one handshake line, then one JSON object per
 * line in each direction.  Every well-formed request gets exactly one
 * response; anything the responder cannot serve comes back as a structured
 * error object, never a dropped frame.
 */

import * as readline from "node:readline";

export const PROTOCOL_VERSION = "symchain/1";
export const MODES = ["all", "step", "token"] as const;
export type Mode = (typeof MODES)[number];

export interface WireRequest {
  id: string;
  input: string;
  mode: Mode;
  stop_hint: "FULL" | "LINE" | "TOKEN";
}

export interface Responder {
  respond(req: WireRequest): string;
}

export function handshake(): string {
  return JSON.stringify({ hello: PROTOCOL_VERSION, modes: [...MODES] });
}

export function handleFrame(responder: Responder, raw: string): string {
  let id: unknown = null;
  try {
    const obj = JSON.parse(raw);
    if (typeof obj !== "object" || obj === null) {
      return JSON.stringify({ id: null, error: "frame is not an object" });
    }
    id = (obj as Record<string, unknown>).id ?? null;
    const req = decodeRequest(obj as Record<string, unknown>);
    const output = responder.respond(req);
    return JSON.stringify({ id: req.id, output });
  } catch (err) {
    const message = err instanceof Error ? err.message : String(err);
    return JSON.stringify({ id, error: message });
  }
}

function decodeRequest(obj: Record<string, unknown>): WireRequest {
  const { id, input, mode, stop_hint } = obj;
  if (typeof id !== "string" && typeof id !== "number") {
    throw new Error("missing or invalid 'id'");
  }
  if (typeof input !== "string") throw new Error("missing or invalid 'input'");
  if (typeof mode !== "string" || !MODES.includes(mode as Mode)) {
    throw new Error(`invalid 'mode': ${JSON.stringify(mode)}`);
  }
  if (stop_hint !== "FULL" && stop_hint !== "LINE" && stop_hint !== "TOKEN") {
    throw new Error(`invalid 'stop_hint': ${JSON.stringify(stop_hint)}`);
  }
  return { id: String(id), input, mode: mode as Mode, stop_hint };
}

/** Serve frames from stdin until EOF. */
export async function serveStdio(responder: Responder): Promise<void> {
  process.stdout.write(handshake() + "\n");
  const rl = readline.createInterface({ input: process.stdin, terminal: false });
  for await (const line of rl) {
    const raw = line.trim();
    if (raw === "") continue;
    process.stdout.write(handleFrame(responder, raw) + "\n");
  }
}
