#!/usr/bin/env node
/**
 * adapter serve    --stub-gold instances.jsonl --chaining shortest
 * adapter serve    --checkpoint model.json [--max-len 400]
 * adapter finetune --train sft.jsonl --pretrain warmup.jsonl --out model.json
 *                  [--epochs 2000] [--pretrain-epochs 30] [--lr 1e-4 | --lr-search]
 *                  [--seed 1] [--dim 16] [--hidden 48] [--no-digit-split] [--marker @@]
 *
 * Training files are rendered supervision pairs (input_text/target_text
 * JSONL); serving speaks the stdio frame protocol.  Logs go to stderr so
 * stdout stays protocol-clean.
 */

import * as fs from "node:fs";

import { finetune, readPairs } from "./finetune";
import { ModelResponder } from "./generate";
import { CharSeq2Seq } from "./model";
import { serveStdio } from "./protocol";
import { Chaining, GoldReplayStub } from "./stub";

interface Flags {
  [key: string]: string | boolean;
}

function parseArgs(argv: string[]): { command: string; flags: Flags } {
  const [command, ...rest] = argv;
  const flags: Flags = {};
  for (let i = 0; i < rest.length; i += 1) {
    const arg = rest[i];
    if (!arg.startsWith("--")) throw new UsageError(`unexpected argument ${arg}`);
    const name = arg.slice(2);
    if (i + 1 < rest.length && !rest[i + 1].startsWith("--")) {
      flags[name] = rest[i + 1];
      i += 1;
    } else {
      flags[name] = true;
    }
  }
  return { command: command ?? "", flags };
}

class UsageError extends Error {}

function str(flags: Flags, name: string, fallback?: string): string {
  const v = flags[name];
  if (typeof v === "string") return v;
  if (fallback !== undefined) return fallback;
  throw new UsageError(`missing --${name}`);
}

function num(flags: Flags, name: string, fallback: number): number {
  const v = flags[name];
  if (v === undefined) return fallback;
  const parsed = Number(v);
  if (!Number.isFinite(parsed)) throw new UsageError(`--${name} needs a number`);
  return parsed;
}

async function cmdServe(flags: Flags): Promise<number> {
  if (typeof flags["stub-gold"] === "string") {
    const chaining = str(flags, "chaining", "shortest") as Chaining;
    if (!["shortest", "exhaustive", "backward", "none"].includes(chaining)) {
      throw new UsageError(`unknown chaining ${chaining}`);
    }
    const stub = new GoldReplayStub(flags["stub-gold"], chaining);
    await serveStdio(stub);
    return 0;
  }
  if (typeof flags.checkpoint === "string") {
    const model = CharSeq2Seq.load(fs.readFileSync(flags.checkpoint, "utf-8"));
    await serveStdio(new ModelResponder(model, num(flags, "max-len", 400)));
    return 0;
  }
  throw new UsageError("serve needs --stub-gold or --checkpoint");
}

function cmdFinetune(flags: Flags): number {
  const digitSplit = flags["no-digit-split"] !== true;
  const marker = str(flags, "marker", "@@");
  const log = (line: string) => process.stderr.write(line + "\n");
  const trainPairs = readPairs(str(flags, "train"), digitSplit, marker);
  const pretrainPairs = readPairs(str(flags, "pretrain"), digitSplit, marker);
  const lrFlag = flags.lr;
  const result = finetune(trainPairs, pretrainPairs, {
    pretrainEpochs: num(flags, "pretrain-epochs", 30),
    epochs: num(flags, "epochs", 2000),
    lr: flags["lr-search"] === true ? null : typeof lrFlag === "string" ? Number(lrFlag) : 1e-3,
    seed: num(flags, "seed", 1),
    dim: num(flags, "dim", 16),
    hidden: num(flags, "hidden", 48),
    digitSplit,
    marker,
    logEvery: num(flags, "log-every", 1),
    log,
  });
  fs.writeFileSync(str(flags, "out"), result.model.save());
  const last = result.trainStats[result.trainStats.length - 1];
  log(`done: lr ${result.lr}, final loss ${last.meanLoss.toFixed(4)}, checkpoint ${str(flags, "out")}`);
  return 0;
}

export async function main(argv: string[]): Promise<number> {
  const { command, flags } = parseArgs(argv);
  try {
    if (command === "serve") return await cmdServe(flags);
    if (command === "finetune") return cmdFinetune(flags);
    throw new UsageError(`unknown command ${JSON.stringify(command)}; use serve or finetune`);
  } catch (err) {
    if (err instanceof UsageError) {
      process.stderr.write(`usage error: ${err.message}\n`);
      return 1;
    }
    const message = err instanceof Error ? err.message : String(err);
    process.stderr.write(`error: ${message}\n`);
    return 2;
  }
}

if (require.main === module) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
