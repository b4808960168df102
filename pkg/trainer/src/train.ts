/**
 * Fine-tuning loop: AdamW on mean cross-entropy, per-epoch dev metrics,
 * best-dev-F1 checkpoint selection, metrics JSON at the end.
 */
import * as fs from "node:fs";
import * as path from "node:path";
import { AdamW } from "./adamw";
import { Example, loadAnnotations, splitExamples } from "./data";
import { computeMetrics, Metrics } from "./metrics";
import {
  Checkpoint,
  ModelConfig,
  TINY_PROFILE,
  DEFAULT_PROFILE,
  toCheckpoint,
  TransformerClassifier,
} from "./model";
import { Rng } from "./rng";
import { Tensor } from "./tensor";
import { buildVocab, encode, Vocab } from "./tokenizer";

export interface Hyperparams {
  learningRate: number;
  adamEpsilon: number;
  dropout: number;
  maxSequenceTokens: number;
  batchSize: number;
  epochs: number;
  seed: number;
  encoderProfile: "default" | "tiny";
}

/** Production defaults; the tiny encoder profile keeps desk-scale runs fast. */
export const DEFAULT_HYPERPARAMS: Hyperparams = {
  learningRate: 6e-6,
  adamEpsilon: 1e-8,
  dropout: 0.1,
  maxSequenceTokens: 128,
  batchSize: 16,
  epochs: 4,
  seed: 0,
  encoderProfile: "default",
};

export function validateHyperparams(hp: Hyperparams): void {
  const positive: Array<[string, number]> = [
    ["learningRate", hp.learningRate],
    ["adamEpsilon", hp.adamEpsilon],
    ["batchSize", hp.batchSize],
    ["epochs", hp.epochs],
  ];
  for (const [name, value] of positive) {
    if (!(value > 0)) throw new Error(`${name} must be positive, got ${value}`);
  }
  if (hp.dropout < 0 || hp.dropout >= 1) throw new Error(`dropout must be in [0, 1)`);
  if (hp.maxSequenceTokens < 8) throw new Error("maxSequenceTokens must be >= 8");
}

export interface EpochLog {
  epoch: number;
  trainLoss: number;
  trainAccuracy: number;
  devMetrics: Metrics | null;
}

export interface TrainResult {
  model: TransformerClassifier;
  vocab: Vocab;
  epochLogs: EpochLog[];
  bestEpoch: number;
  testMetrics: Metrics | null;
  neutralDropped: number;
  counts: { train: number; dev: number; test: number };
}

function evaluateSplit(
  model: TransformerClassifier,
  vocab: Vocab,
  examples: Example[]
): Metrics {
  const predicted = examples.map((ex) => (model.pPositive(vocab, ex.text) >= 0.5 ? 1 : 0));
  return computeMetrics(predicted, examples.map((ex) => ex.label));
}

export function trainModel(
  train: Example[],
  dev: Example[],
  hp: Hyperparams
): { model: TransformerClassifier; vocab: Vocab; epochLogs: EpochLog[]; bestEpoch: number } {
  validateHyperparams(hp);
  const profile = hp.encoderProfile === "tiny" ? TINY_PROFILE : DEFAULT_PROFILE;
  const vocab = buildVocab(train.map((e) => e.text));
  const config: ModelConfig = {
    vocabSize: vocab.tokens.length,
    maxSeq: hp.maxSequenceTokens,
    dropout: hp.dropout,
    ...profile,
  };
  const rng = new Rng(hp.seed);
  const model = new TransformerClassifier(config, rng);
  const optimizer = new AdamW(model.parameters().values(), {
    learningRate: hp.learningRate,
    epsilon: hp.adamEpsilon,
  });

  const encoded = train.map((ex) => ({
    ids: encode(vocab, ex.text, config.maxSeq),
    label: ex.label,
  }));
  const epochLogs: EpochLog[] = [];
  let best: { epoch: number; f1: number; params: Float64Array[] } | null = null;

  for (let epoch = 1; epoch <= hp.epochs; epoch++) {
    const order = rng.shuffle(encoded.map((_, i) => i));
    let lossSum = 0;
    let batches = 0;
    for (let start = 0; start < order.length; start += hp.batchSize) {
      const batch = order.slice(start, start + hp.batchSize);
      optimizer.zeroGrad();
      let batchLoss: Tensor | null = null;
      for (const idx of batch) {
        const { ids, label } = encoded[idx];
        const logits = model.forward(ids, true, rng);
        const loss = Tensor.softmaxCrossEntropy(logits, [label]).scale(1 / batch.length);
        batchLoss = batchLoss ? batchLoss.add(loss) : loss;
      }
      batchLoss!.backward();
      optimizer.step();
      lossSum += batchLoss!.data[0];
      batches += 1;
    }
    const trainMetrics = evaluateSplit(model, vocab, train);
    const devMetrics = dev.length ? evaluateSplit(model, vocab, dev) : null;
    epochLogs.push({
      epoch,
      trainLoss: lossSum / Math.max(1, batches),
      trainAccuracy: trainMetrics.accuracy,
      devMetrics,
    });
    const f1 = devMetrics ? devMetrics.f1 : trainMetrics.f1;
    if (!best || f1 > best.f1) {
      best = {
        epoch,
        f1,
        params: [...model.parameters().values()].map((t) => Float64Array.from(t.data)),
      };
    }
  }

  if (best) {
    const tensors = [...model.parameters().values()];
    tensors.forEach((t, i) => t.data.set(best!.params[i]));
  }
  return { model, vocab, epochLogs, bestEpoch: best?.epoch ?? hp.epochs };
}

/** Stable stringify: object keys emitted in sorted order at every level. */
export function stableStringify(value: unknown, indent = 0): string {
  const replacer = (v: unknown): unknown => {
    if (Array.isArray(v)) return (v as unknown[]).map(replacer);
    if (v && typeof v === "object") {
      const src = v as Record<string, unknown>;
      const out: Record<string, unknown> = {};
      for (const key of Object.keys(src).sort()) out[key] = replacer(src[key]);
      return out;
    }
    return v;
  };
  return JSON.stringify(replacer(value), null, indent || undefined);
}

export function finetune(
  annotationsPath: string,
  outDir: string,
  hp: Hyperparams
): TrainResult {
  const { examples, neutralDropped } = loadAnnotations(annotationsPath);
  const split = splitExamples(examples, hp.seed);
  const { model, vocab, epochLogs, bestEpoch } = trainModel(split.train, split.dev, hp);
  const testMetrics = split.test.length ? evaluateSplit(model, vocab, split.test) : null;

  fs.mkdirSync(outDir, { recursive: true });
  const checkpoint: Checkpoint = toCheckpoint(model, vocab);
  fs.writeFileSync(path.join(outDir, "model.json"), stableStringify(checkpoint));
  const metricsPayload = {
    accuracy: testMetrics?.accuracy ?? null,
    f1: testMetrics?.f1 ?? null,
    precision: testMetrics?.precision ?? null,
    recall: testMetrics?.recall ?? null,
    n_train: split.train.length,
    n_dev: split.dev.length,
    n_test: split.test.length,
    neutral_dropped: neutralDropped,
    best_epoch: bestEpoch,
    epoch_logs: epochLogs.map((log) => ({
      epoch: log.epoch,
      train_loss: log.trainLoss,
      train_accuracy: log.trainAccuracy,
      dev_accuracy: log.devMetrics?.accuracy ?? null,
      dev_f1: log.devMetrics?.f1 ?? null,
    })),
    hyperparams: {
      learning_rate: hp.learningRate,
      adam_epsilon: hp.adamEpsilon,
      dropout: hp.dropout,
      max_sequence_tokens: hp.maxSequenceTokens,
      batch_size: hp.batchSize,
      epochs: hp.epochs,
      seed: hp.seed,
      encoder_profile: hp.encoderProfile,
    },
  };
  fs.writeFileSync(path.join(outDir, "metrics.json"), stableStringify(metricsPayload, 2));
  return {
    model,
    vocab,
    epochLogs,
    bestEpoch,
    testMetrics,
    neutralDropped,
    counts: { train: split.train.length, dev: split.dev.length, test: split.test.length },
  };
}
