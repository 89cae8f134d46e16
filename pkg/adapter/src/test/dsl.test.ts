import assert from "node:assert/strict";
import { test } from "node:test";

import {
  chainLines,
  detokenizeDsl,
  firstDslToken,
  joinDigits,
  splitContext,
  splitDigits,
  tokenizeDsl,
} from "../dsl";

test("tokenize splits multi-digit numerals", () => {
  const tokens = tokenizeDsl("B=12");
  assert.deepEqual(
    tokens.map((t) => [t.kind, t.text]),
    [
      ["VAR", "B"],
      ["EQUALS", "="],
      ["DIGIT", "1"],
      ["DIGIT", "2"],
    ],
  );
});

test("tokenize groups variable letter runs", () => {
  const tokens = tokenizeDsl("AB=CD+1");
  assert.deepEqual(
    tokens.map((t) => t.text),
    ["AB", "=", "CD", "+", "1"],
  );
});

test("detokenize puts a space only after commas", () => {
  for (const text of ["A=1, A?", "B=2+A, B=2+1, B=3", "B=97"]) {
    assert.equal(detokenizeDsl(tokenizeDsl(text)), text);
  }
});

test("tokenize rejects foreign characters", () => {
  assert.throws(() => tokenizeDsl("B=2*3"));
});

test("splitContext separates question from partial chain", () => {
  assert.deepEqual(splitContext("A=1, B? ; A=1"), { question: "A=1, B?", partial: "A=1" });
  assert.deepEqual(splitContext("A=1, B? ; "), { question: "A=1, B?", partial: "" });
  assert.deepEqual(splitContext("A=1, B?"), { question: "A=1, B?", partial: "" });
});

test("chainLines counts partial lines", () => {
  assert.deepEqual(chainLines(""), []);
  assert.deepEqual(chainLines("A=1"), ["A=1"]);
  assert.deepEqual(chainLines("A=1, B=2+A"), ["A=1", "B=2+A"]);
});

test("digit splitting marks every digit", () => {
  assert.equal(splitDigits("B=12"), "B=@@1 @@2");
  assert.equal(splitDigits("B=3+1"), "B=@@3+@@1");
  assert.equal(splitDigits("A=1, B=12+A, B?"), "A=@@1, B=@@1 @@2+A, B?");
});

test("digit joining inverts splitting", () => {
  for (const text of ["B=12", "B=3+1", "A=1, B=12+A, B?", "C=99, D=3+C, D?"]) {
    assert.equal(joinDigits(splitDigits(text)), text);
  }
});

test("custom marker", () => {
  assert.equal(splitDigits("B=12", "##"), "B=##1 ##2");
  assert.equal(joinDigits("B=##1 ##2", "##"), "B=12");
});

test("first DSL token truncates model output", () => {
  assert.equal(firstDslToken("B=2+A"), "B");
  assert.equal(firstDslToken("12"), "1");
  assert.equal(firstDslToken("=rest"), "=");
  assert.equal(firstDslToken(""), null);
});

test("line-shape validation", () => {
  const { isDslLine } = require("../dsl");
  for (const good of ["A=1", "B=2+A", "AB=97+CD", "C=5+3"]) {
    assert.ok(isDslLine(good), good);
  }
  for (const bad of ["", "@@@@", "A=1, B=2", "=1", "A=", "A=123", "a=1", "A=1+2+3"]) {
    assert.ok(!isDslLine(bad), bad);
  }
});
