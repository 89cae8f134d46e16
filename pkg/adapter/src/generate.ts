/**
 * Per-mode stopping around a trained model.  The model sees digit-split
 * text; replies on the wire are always plain (markers stripped, digits
 * rejoined).  LINE mode generates until a separator or the end marker and
 * strips to one line; TOKEN mode truncates at the first DSL token boundary.
 */

import { firstDslToken, isDslLine, joinDigits, splitDigits } from "./dsl";
import { ModelConfig } from "./model";
import { Responder, WireRequest } from "./protocol";

export interface GeneratingModel {
  cfg: ModelConfig;
  generate(input: string, maxLen: number): string;
}

export class ModelResponder implements Responder {
  constructor(
    private model: GeneratingModel,
    private maxLen = 400,
  ) {}

  respond(req: WireRequest): string {
    const { digitSplit, marker } = this.model.cfg;
    const modelInput = digitSplit ? splitDigits(req.input, marker) : req.input;
    const raw = this.model.generate(modelInput, this.maxLen);
    const plain = digitSplit ? joinDigits(raw, marker) : raw;
    if (req.mode === "all") {
      return plain.trim();
    }
    if (req.mode === "step") {
      // Contract: exactly one parseable line, or an error object.
      const line = plain.split(",")[0].trim();
      if (!isDslLine(line)) throw new Error("model produced no parseable line");
      return line;
    }
    const token = firstDslToken(plain.trim());
    if (token === null) throw new Error("model produced no DSL token");
    return token;
  }
}
