/**
 * A deliberately small character-level seq2seq: mean-embedding encoder, a
 * leaky prefix accumulator for the decoder state, and a one-hidden-layer
 * softmax head, trained with plain SGD and truncated single-step backprop.
 *
 * This is a protocol-grade model, not a research-grade one: it exists so
 * the fine-tuning schedule, checkpoints, and per-mode generation have a
 * real trainable implementation behind them on a laptop CPU.
 */

export interface TrainPair {
  input: string;
  target: string;
}

export interface EpochStats {
  meanLoss: number;
  firstHalfLoss: number;
  secondHalfLoss: number;
}

export interface ModelConfig {
  dim: number;
  hidden: number;
  prefixLeak: number;
  digitSplit: boolean;
  marker: string;
}

const BOS = "<bos>";
const EOS = "<eos>";
const UNK = "<unk>";

/** Deterministic 32-bit generator (mulberry32). */
export function rng(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export class CharSeq2Seq {
  readonly vocab: string[];
  private index = new Map<string, number>();
  private embed: Float64Array; // V x d
  private w1: Float64Array; // h x 2d
  private b1: Float64Array; // h
  private w2: Float64Array; // V x h
  private b2: Float64Array; // V
  readonly cfg: ModelConfig;

  constructor(vocab: string[], cfg: ModelConfig, seed = 1) {
    this.vocab = vocab;
    vocab.forEach((ch, i) => this.index.set(ch, i));
    this.cfg = cfg;
    const rand = rng(seed);
    const init = (n: number, scale: number) => {
      const arr = new Float64Array(n);
      for (let i = 0; i < n; i += 1) arr[i] = (rand() * 2 - 1) * scale;
      return arr;
    };
    const { dim, hidden } = cfg;
    const v = vocab.length;
    this.embed = init(v * dim, 0.3);
    this.w1 = init(hidden * 2 * dim, 0.25);
    this.b1 = new Float64Array(hidden);
    this.w2 = init(v * hidden, 0.25);
    this.b2 = new Float64Array(v);
  }

  static fromTexts(texts: string[], cfg: ModelConfig, seed = 1): CharSeq2Seq {
    const chars = new Set<string>();
    for (const text of texts) for (const ch of text) chars.add(ch);
    const vocab = [BOS, EOS, UNK, ...[...chars].sort()];
    return new CharSeq2Seq(vocab, cfg, seed);
  }

  private id(ch: string): number {
    return this.index.get(ch) ?? this.index.get(UNK)!;
  }

  private encode(input: string): Float64Array {
    const { dim } = this.cfg;
    const out = new Float64Array(dim);
    const chars = input === "" ? [BOS] : [...input];
    for (const ch of chars) {
      const base = this.id(ch) * dim;
      for (let k = 0; k < dim; k += 1) out[k] += this.embed[base + k];
    }
    for (let k = 0; k < dim; k += 1) out[k] /= chars.length;
    return out;
  }

  private forward(encoded: Float64Array, prefix: Float64Array) {
    const { dim, hidden } = this.cfg;
    const v = this.vocab.length;
    const hiddenAct = new Float64Array(hidden);
    for (let j = 0; j < hidden; j += 1) {
      let z = this.b1[j];
      const row = j * 2 * dim;
      for (let k = 0; k < dim; k += 1) z += this.w1[row + k] * encoded[k];
      for (let k = 0; k < dim; k += 1) z += this.w1[row + dim + k] * prefix[k];
      hiddenAct[j] = Math.tanh(z);
    }
    const logits = new Float64Array(v);
    let max = -Infinity;
    for (let o = 0; o < v; o += 1) {
      let z = this.b2[o];
      const row = o * hidden;
      for (let j = 0; j < hidden; j += 1) z += this.w2[row + j] * hiddenAct[j];
      logits[o] = z;
      if (z > max) max = z;
    }
    let sum = 0;
    const probs = new Float64Array(v);
    for (let o = 0; o < v; o += 1) {
      probs[o] = Math.exp(logits[o] - max);
      sum += probs[o];
    }
    for (let o = 0; o < v; o += 1) probs[o] /= sum;
    return { hiddenAct, probs };
  }

  private stepPrefix(prefix: Float64Array, ch: string): Float64Array {
    const { dim, prefixLeak } = this.cfg;
    const next = new Float64Array(dim);
    const base = this.id(ch) * dim;
    for (let k = 0; k < dim; k += 1) {
      next[k] = prefixLeak * prefix[k] + (1 - prefixLeak) * this.embed[base + k];
    }
    return next;
  }

  private bosPrefix(): Float64Array {
    const { dim } = this.cfg;
    const base = this.id(BOS) * dim;
    return Float64Array.from({ length: dim }, (_, k) => this.embed[base + k]);
  }

  /** One teacher-forced pass over a pair; returns mean char loss. */
  trainPair(pair: TrainPair, lr: number): number {
    const { dim, hidden, prefixLeak } = this.cfg;
    const v = this.vocab.length;
    const encoded = this.encode(pair.input);
    const inputChars = pair.input === "" ? [BOS] : [...pair.input];
    let prefix = this.bosPrefix();
    let prevChar = BOS;
    const targets = [...pair.target, EOS];
    let total = 0;

    for (const targetChar of targets) {
      const { hiddenAct, probs } = this.forward(encoded, prefix);
      const want = this.id(targetChar);
      total += -Math.log(Math.max(probs[want], 1e-12));

      // dLogits = probs - onehot(want)
      const dHidden = new Float64Array(hidden);
      for (let o = 0; o < v; o += 1) {
        const g = probs[o] - (o === want ? 1 : 0);
        if (g === 0) continue;
        const row = o * hidden;
        for (let j = 0; j < hidden; j += 1) dHidden[j] += g * this.w2[row + j];
        for (let j = 0; j < hidden; j += 1) this.w2[row + j] -= lr * g * hiddenAct[j];
        this.b2[o] -= lr * g;
      }
      const dEnc = new Float64Array(dim);
      const dPrefix = new Float64Array(dim);
      for (let j = 0; j < hidden; j += 1) {
        const g = dHidden[j] * (1 - hiddenAct[j] * hiddenAct[j]);
        if (g === 0) continue;
        const row = j * 2 * dim;
        for (let k = 0; k < dim; k += 1) {
          dEnc[k] += g * this.w1[row + k];
          dPrefix[k] += g * this.w1[row + dim + k];
          this.w1[row + k] -= lr * g * encoded[k];
          this.w1[row + dim + k] -= lr * g * prefix[k];
        }
        this.b1[j] -= lr * g;
      }
      // Truncated backprop: prefix gradient reaches only the latest char's
      // embedding; encoder gradient spreads over the input mean.
      const prevBase = this.id(prevChar) * dim;
      for (let k = 0; k < dim; k += 1) {
        this.embed[prevBase + k] -= lr * dPrefix[k] * (1 - prefixLeak);
      }
      const encScale = lr / inputChars.length;
      for (const ch of inputChars) {
        const base = this.id(ch) * dim;
        for (let k = 0; k < dim; k += 1) this.embed[base + k] -= encScale * dEnc[k];
      }

      prefix = this.stepPrefix(prefix, targetChar);
      prevChar = targetChar;
    }
    return total / targets.length;
  }

  trainEpoch(pairs: TrainPair[], lr: number, shuffleSeed: number): EpochStats {
    const order = pairs.map((_, i) => i);
    const rand = rng(shuffleSeed);
    for (let i = order.length - 1; i > 0; i -= 1) {
      const j = Math.floor(rand() * (i + 1));
      [order[i], order[j]] = [order[j], order[i]];
    }
    const losses: number[] = [];
    for (const idx of order) losses.push(this.trainPair(pairs[idx], lr));
    const half = Math.max(1, Math.floor(losses.length / 2));
    const mean = (xs: number[]) => xs.reduce((a, b) => a + b, 0) / xs.length;
    return {
      meanLoss: mean(losses),
      firstHalfLoss: mean(losses.slice(0, half)),
      secondHalfLoss: mean(losses.slice(losses.length - half)),
    };
  }

  generate(input: string, maxLen: number): string {
    const encoded = this.encode(input);
    let prefix = this.bosPrefix();
    let out = "";
    for (let step = 0; step < maxLen; step += 1) {
      const { probs } = this.forward(encoded, prefix);
      let best = 0;
      for (let o = 1; o < probs.length; o += 1) if (probs[o] > probs[best]) best = o;
      const ch = this.vocab[best];
      if (ch === EOS) break;
      const emit = ch === BOS || ch === UNK ? " " : ch;
      out += emit;
      prefix = this.stepPrefix(prefix, ch);
    }
    return out;
  }

  save(): string {
    return JSON.stringify({
      kind: "symchain-adapter-checkpoint",
      version: 1,
      cfg: this.cfg,
      vocab: this.vocab,
      weights: {
        embed: [...this.embed],
        w1: [...this.w1],
        b1: [...this.b1],
        w2: [...this.w2],
        b2: [...this.b2],
      },
    });
  }

  static load(text: string): CharSeq2Seq {
    const obj = JSON.parse(text);
    if (obj?.kind !== "symchain-adapter-checkpoint") {
      throw new Error("not an adapter checkpoint");
    }
    const model = new CharSeq2Seq(obj.vocab, obj.cfg, 0);
    model.embed = Float64Array.from(obj.weights.embed);
    model.w1 = Float64Array.from(obj.weights.w1);
    model.b1 = Float64Array.from(obj.weights.b1);
    model.w2 = Float64Array.from(obj.weights.w2);
    model.b2 = Float64Array.from(obj.weights.b2);
    return model;
  }
}
