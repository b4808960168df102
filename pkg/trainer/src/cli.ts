/**
 * trainer CLI.
 *
 *   trainer train --annotations a.tsv --out dir [--profile tiny] [--lr 6e-6]
 *                 [--epochs 4] [--batch-size 16] [--dropout 0.1]
 *                 [--max-seq 128] [--seed 0]
 *   trainer serve --model dir [--stdio | --listen host:port]
 *   trainer score --model dir --input texts.jsonl [--output out.jsonl]
 */
import * as fs from "node:fs";
import { DEFAULT_HYPERPARAMS, finetune, Hyperparams, stableStringify } from "./train";
import { loadModelDir, serveStdio, serveTcp } from "./serve";

function parseFlags(argv: string[]): Map<string, string | boolean> {
  const flags = new Map<string, string | boolean>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) throw new Error(`unexpected argument: ${arg}`);
    const key = arg.slice(2);
    if (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
      flags.set(key, argv[++i]);
    } else {
      flags.set(key, true);
    }
  }
  return flags;
}

function requireString(flags: Map<string, string | boolean>, key: string): string {
  const value = flags.get(key);
  if (typeof value !== "string") throw new Error(`--${key} is required`);
  return value;
}

function numberFlag(
  flags: Map<string, string | boolean>,
  key: string,
  fallback: number
): number {
  const value = flags.get(key);
  if (value === undefined) return fallback;
  const parsed = Number(value);
  if (!Number.isFinite(parsed)) throw new Error(`--${key} must be a number`);
  return parsed;
}

function cmdTrain(flags: Map<string, string | boolean>): number {
  const hp: Hyperparams = {
    ...DEFAULT_HYPERPARAMS,
    learningRate: numberFlag(flags, "lr", DEFAULT_HYPERPARAMS.learningRate),
    adamEpsilon: numberFlag(flags, "adam-epsilon", DEFAULT_HYPERPARAMS.adamEpsilon),
    dropout: numberFlag(flags, "dropout", DEFAULT_HYPERPARAMS.dropout),
    maxSequenceTokens: numberFlag(flags, "max-seq", DEFAULT_HYPERPARAMS.maxSequenceTokens),
    batchSize: numberFlag(flags, "batch-size", DEFAULT_HYPERPARAMS.batchSize),
    epochs: numberFlag(flags, "epochs", DEFAULT_HYPERPARAMS.epochs),
    seed: numberFlag(flags, "seed", DEFAULT_HYPERPARAMS.seed),
    encoderProfile: flags.get("profile") === "tiny" ? "tiny" : "default",
  };
  const result = finetune(requireString(flags, "annotations"), requireString(flags, "out"), hp);
  for (const log of result.epochLogs) {
    const dev = log.devMetrics
      ? ` dev_acc=${log.devMetrics.accuracy.toFixed(4)} dev_f1=${log.devMetrics.f1.toFixed(4)}`
      : "";
    console.log(
      `epoch ${log.epoch}: loss=${log.trainLoss.toFixed(4)} ` +
        `train_acc=${log.trainAccuracy.toFixed(4)}${dev}`
    );
  }
  if (result.testMetrics) {
    console.log(
      `test accuracy=${result.testMetrics.accuracy.toFixed(4)} ` +
        `f1=${result.testMetrics.f1.toFixed(4)} (best epoch ${result.bestEpoch})`
    );
  }
  return 0;
}

function cmdServe(flags: Map<string, string | boolean>): number {
  const loaded = loadModelDir(requireString(flags, "model"));
  const listen = flags.get("listen");
  if (typeof listen === "string") {
    const [host, port] = listen.split(":");
    if (!host || !port) throw new Error("--listen needs host:port");
    serveTcp(loaded, host, Number(port));
    console.error(`listening on ${listen}`);
    return -1; // long-running
  }
  serveStdio(loaded);
  return -1;
}

function cmdScore(flags: Map<string, string | boolean>): number {
  const loaded = loadModelDir(requireString(flags, "model"));
  const lines = fs
    .readFileSync(requireString(flags, "input"), "utf-8")
    .split("\n")
    .filter((l) => l.trim());
  const out: string[] = [];
  for (const line of lines) {
    const item = JSON.parse(line) as { id: string; text: string };
    out.push(
      JSON.stringify({ id: item.id, p_positive: loaded.model.pPositive(loaded.vocab, item.text) })
    );
  }
  const target = flags.get("output");
  if (typeof target === "string") {
    fs.writeFileSync(target, out.join("\n") + "\n");
  } else {
    for (const line of out) console.log(line);
  }
  return 0;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    switch (command) {
      case "train":
        return cmdTrain(parseFlags(rest));
      case "serve":
        return cmdServe(parseFlags(rest));
      case "score":
        return cmdScore(parseFlags(rest));
      default:
        console.error("usage: trainer <train|serve|score> [--flags]");
        return 1;
    }
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

if (require.main === module) {
  const code = main(process.argv.slice(2));
  if (code >= 0) process.exit(code);
}
