/**
 * Two-stage training: a warm-up pass over the single-depth set to teach the
 * primitives, then the main pass over the rendered training pairs.  The
 * learning-rate search tries 1e-3, 1e-4, 1e-5 and keeps the largest rate
 * whose loss still decreases.
 */

import * as fs from "node:fs";

import { splitDigits } from "./dsl";
import { CharSeq2Seq, EpochStats, ModelConfig, TrainPair } from "./model";

export interface FinetuneOptions {
  pretrainEpochs: number;
  epochs: number;
  lr: number | null; // null: search
  seed: number;
  dim: number;
  hidden: number;
  digitSplit: boolean;
  marker: string;
  logEvery: number;
  log: (line: string) => void;
}

export interface FinetuneResult {
  model: CharSeq2Seq;
  lr: number;
  pretrainStats: EpochStats[];
  trainStats: EpochStats[];
}

export const LR_CANDIDATES = [1e-3, 1e-4, 1e-5];

export function readPairs(path: string, digitSplit: boolean, marker: string): TrainPair[] {
  const pairs: TrainPair[] = [];
  const content = fs.readFileSync(path, "utf-8");
  for (const [lineno, raw] of content.split("\n").entries()) {
    const line = raw.trim();
    if (line === "") continue;
    let obj: Record<string, unknown>;
    try {
      obj = JSON.parse(line);
    } catch {
      throw new Error(`${path}:${lineno + 1}: not JSON`);
    }
    const input = obj.input_text;
    const target = obj.target_text;
    if (typeof input !== "string" || typeof target !== "string") {
      throw new Error(`${path}:${lineno + 1}: needs input_text and target_text strings`);
    }
    pairs.push(
      digitSplit
        ? { input: splitDigits(input, marker), target: splitDigits(target, marker) }
        : { input, target },
    );
  }
  if (pairs.length === 0) throw new Error(`${path}: no training pairs`);
  return pairs;
}

export function searchLearningRate(
  pairs: TrainPair[],
  cfg: ModelConfig,
  seed: number,
  log: (line: string) => void,
): number {
  const slice = pairs.slice(0, Math.min(pairs.length, 200));
  for (const lr of LR_CANDIDATES) {
    const probe = CharSeq2Seq.fromTexts(
      slice.flatMap((p) => [p.input, p.target]),
      cfg,
      seed,
    );
    const stats = probe.trainEpoch(slice, lr, seed + 17);
    const decreasing = stats.secondHalfLoss < stats.firstHalfLoss;
    log(
      `lr-search ${lr}: first-half ${stats.firstHalfLoss.toFixed(4)} ` +
        `second-half ${stats.secondHalfLoss.toFixed(4)} ${decreasing ? "(converging)" : "(diverging)"}`,
    );
    if (decreasing) return lr;
  }
  return LR_CANDIDATES[LR_CANDIDATES.length - 1];
}

export function finetune(
  trainPairs: TrainPair[],
  pretrainPairs: TrainPair[],
  opts: FinetuneOptions,
): FinetuneResult {
  const cfg: ModelConfig = {
    dim: opts.dim,
    hidden: opts.hidden,
    prefixLeak: 0.7,
    digitSplit: opts.digitSplit,
    marker: opts.marker,
  };
  const lr = opts.lr ?? searchLearningRate(trainPairs.concat(pretrainPairs), cfg, opts.seed, opts.log);
  const texts = [...pretrainPairs, ...trainPairs].flatMap((p) => [p.input, p.target]);
  const model = CharSeq2Seq.fromTexts(texts, cfg, opts.seed);

  const pretrainStats: EpochStats[] = [];
  for (let epoch = 0; epoch < opts.pretrainEpochs; epoch += 1) {
    const stats = model.trainEpoch(pretrainPairs, lr, opts.seed + epoch);
    pretrainStats.push(stats);
    if (epoch % opts.logEvery === 0) {
      opts.log(`warm-up epoch ${epoch + 1}/${opts.pretrainEpochs}: loss ${stats.meanLoss.toFixed(4)}`);
    }
  }
  const trainStats: EpochStats[] = [];
  for (let epoch = 0; epoch < opts.epochs; epoch += 1) {
    const stats = model.trainEpoch(trainPairs, lr, opts.seed + 100000 + epoch);
    trainStats.push(stats);
    if (epoch % opts.logEvery === 0) {
      opts.log(`main epoch ${epoch + 1}/${opts.epochs}: loss ${stats.meanLoss.toFixed(4)}`);
    }
  }
  return { model, lr, pretrainStats, trainStats };
}
