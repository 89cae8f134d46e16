/**
 * Text utilities for the equation DSL and the digit-split transform.
 *
 * The canonical surface form joins items with ", " and puts no whitespace
 * inside an equation.  Tokens are variable name runs ([A-Z]+), single
 * digits, "=", "+", "," and "?".  Partial chains rebuild with a space after
 * every comma and nothing else, matching the harness's accretion law.
 */

export const CHAIN_SEP = " ; ";

export type TokenKind = "VAR" | "EQUALS" | "PLUS" | "DIGIT" | "COMMA" | "QMARK";

export interface Token {
  kind: TokenKind;
  text: string;
}

export function tokenizeDsl(text: string): Token[] {
  const tokens: Token[] = [];
  let i = 0;
  while (i < text.length) {
    const c = text[i];
    if (c === " " || c === "\t" || c === "\n" || c === "\r") {
      i += 1;
    } else if (c >= "A" && c <= "Z") {
      let j = i;
      while (j < text.length && text[j] >= "A" && text[j] <= "Z") j += 1;
      tokens.push({ kind: "VAR", text: text.slice(i, j) });
      i = j;
    } else if (c >= "0" && c <= "9") {
      tokens.push({ kind: "DIGIT", text: c });
      i += 1;
    } else if (c === "=") {
      tokens.push({ kind: "EQUALS", text: c });
      i += 1;
    } else if (c === "+") {
      tokens.push({ kind: "PLUS", text: c });
      i += 1;
    } else if (c === ",") {
      tokens.push({ kind: "COMMA", text: c });
      i += 1;
    } else if (c === "?") {
      tokens.push({ kind: "QMARK", text: c });
      i += 1;
    } else {
      throw new Error(`unexpected character ${JSON.stringify(c)} at ${i}`);
    }
  }
  return tokens;
}

/** Canonical string for a token prefix: a space follows every comma. */
export function detokenizeDsl(tokens: Token[]): string {
  let out = "";
  for (const tok of tokens) {
    out += tok.text;
    if (tok.kind === "COMMA") out += " ";
  }
  return out.trimEnd();
}

/** Split a request input into question text and the partial chain. */
export function splitContext(input: string): { question: string; partial: string } {
  const at = input.indexOf(CHAIN_SEP);
  if (at < 0) return { question: input, partial: "" };
  return { question: input.slice(0, at), partial: input.slice(at + CHAIN_SEP.length) };
}

/** Lines of a (partial) chain: split on commas, whitespace-tolerant. */
export function chainLines(partial: string): string[] {
  if (partial.trim() === "") return [];
  return partial.split(",").map((piece) => piece.trim());
}

/**
 * Digit splitting: every numeral becomes per-digit marked pieces, so model
 * tokenizers that know 0-9 see single digits ("12" -> "@@1 @@2").  The
 * marker is configurable; files always store plain numerals, the transform
 * lives strictly around the model.
 */
export function splitDigits(text: string, marker = "@@"): string {
  return text.replace(/\d+/g, (run) =>
    run
      .split("")
      .map((d) => `${marker}${d}`)
      .join(" "),
  );
}

/** Inverse of splitDigits; tolerant of missing inter-digit spaces. */
export function joinDigits(text: string, marker = "@@"): string {
  const escaped = marker.replace(/[.*+?^${}()|[\]\\]/g, "\\$&");
  return text.replace(new RegExp(`${escaped}(\\d) ?`, "g"), "$1");
}

const LINE_RE = /^[A-Z]+=([A-Z]+|\d{1,2})(\+([A-Z]+|\d{1,2}))?$/;

/** True when text is one equation-shaped line (`X=a` or `X=a+b`). */
export function isDslLine(text: string): boolean {
  return LINE_RE.test(text);
}

/** First complete DSL token of a model's raw output, or null. */
export function firstDslToken(text: string): string | null {
  try {
    const tokens = tokenizeDsl(text);
    return tokens.length > 0 ? tokens[0].text : null;
  } catch {
    // Fall back to a prefix scan: take the leading run that lexes.
    for (let end = text.length; end > 0; end -= 1) {
      try {
        const tokens = tokenizeDsl(text.slice(0, end));
        if (tokens.length > 0) return tokens[0].text;
      } catch {
        continue;
      }
    }
    return null;
  }
}
