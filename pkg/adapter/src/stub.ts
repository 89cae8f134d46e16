/**
 * Gold-replay stub: answers every request with the next unit of a gold
 * trace read from an instance JSONL file.  It exercises the full external
 * evaluation path without any trained model behind it.
 */

import * as fs from "node:fs";

import { chainLines, detokenizeDsl, splitContext, Token, tokenizeDsl } from "./dsl";
import { Responder, WireRequest } from "./protocol";

interface GoldEntry {
  traceText: string;
  lines: string[];
  tokens: Token[];
  /** Cumulative accretion-string lengths, one per token (strictly increasing). */
  prefixLens: number[];
}

export type Chaining = "shortest" | "exhaustive" | "backward" | "none";

export class GoldReplayStub implements Responder {
  private byQuestion = new Map<string, GoldEntry>();

  constructor(instancesPath: string, chaining: Chaining) {
    const content = fs.readFileSync(instancesPath, "utf-8");
    for (const raw of content.split("\n")) {
      const line = raw.trim();
      if (line === "") continue;
      const obj = JSON.parse(line) as { question: string; gold: Record<string, string> };
      if (typeof obj.question !== "string" || typeof obj.gold?.[chaining] !== "string") {
        throw new Error(`instance file misses question/gold.${chaining}`);
      }
      this.byQuestion.set(obj.question, buildEntry(obj.gold[chaining]));
    }
    if (this.byQuestion.size === 0) {
      throw new Error(`no instances in ${instancesPath}`);
    }
  }

  respond(req: WireRequest): string {
    const { question, partial } = splitContext(req.input);
    const entry = this.byQuestion.get(question);
    if (entry === undefined) {
      throw new Error(`unknown question: ${question.slice(0, 60)}`);
    }
    if (req.mode === "all") {
      return entry.traceText;
    }
    if (req.mode === "step") {
      const done = chainLines(partial).length;
      if (done >= entry.lines.length) throw new Error("chain already complete");
      return entry.lines[done];
    }
    const consumed = tokensConsumed(entry, partial);
    if (consumed === null) throw new Error("context is not a prefix of this chain");
    if (consumed >= entry.tokens.length) throw new Error("chain already complete");
    return entry.tokens[consumed].text;
  }
}

function buildEntry(traceText: string): GoldEntry {
  const tokens = tokenizeDsl(traceText);
  const prefixLens: number[] = [];
  let length = 0;
  let afterComma = false;
  for (const tok of tokens) {
    length += tok.text.length + (afterComma ? 1 : 0);
    prefixLens.push(length);
    afterComma = tok.kind === "COMMA";
  }
  return {
    traceText,
    lines: traceText.split(", ").flatMap((piece) => (piece === "" ? [] : [piece])),
    tokens,
    prefixLens,
  };
}

function tokensConsumed(entry: GoldEntry, partial: string): number | null {
  if (partial === "") return 0;
  const want = partial.length;
  let lo = 0;
  let hi = entry.prefixLens.length - 1;
  while (lo <= hi) {
    const mid = (lo + hi) >> 1;
    if (entry.prefixLens[mid] < want) lo = mid + 1;
    else hi = mid - 1;
  }
  if (lo >= entry.prefixLens.length || entry.prefixLens[lo] !== want) return null;
  if (!entry.traceText.startsWith(partial)) return null;
  return lo + 1;
}

/** Sanity helper used by tests: re-render a token prefix canonically. */
export function accrete(tokens: Token[]): string {
  return detokenizeDsl(tokens);
}
