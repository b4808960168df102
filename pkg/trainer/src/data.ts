/** Annotations TSV loading and the seeded train/dev/test split. */
import * as fs from "node:fs";
import { Rng } from "./rng";

export interface Example {
  text: string;
  label: 0 | 1; // 1 = positive
}

export interface LoadResult {
  examples: Example[];
  neutralDropped: number;
}

/** Parse text<TAB>label rows; neutral rows are dropped and counted. */
export function loadAnnotations(path: string): LoadResult {
  const raw = fs.readFileSync(path, "utf-8");
  const lines = raw.split("\n");
  if (!lines.length || !lines[0].trim()) {
    throw new Error(`${path}: empty annotations file`);
  }
  const header = lines[0].split("\t").map((c) => c.trim().toLowerCase());
  if (header[0] !== "text" || header[1] !== "label") {
    throw new Error(`${path}: header must be 'text<TAB>label'`);
  }
  const examples: Example[] = [];
  let neutralDropped = 0;
  for (let i = 1; i < lines.length; i++) {
    if (!lines[i].trim()) continue;
    const parts = lines[i].split("\t");
    if (parts.length < 2) throw new Error(`${path}:${i + 1}: expected text<TAB>label`);
    const label = parts[1].trim().toLowerCase();
    if (label === "neutral") {
      neutralDropped += 1;
      continue;
    }
    if (label !== "positive" && label !== "negative") {
      throw new Error(`${path}:${i + 1}: unknown label '${label}'`);
    }
    examples.push({ text: parts[0], label: label === "positive" ? 1 : 0 });
  }
  if (!examples.length) throw new Error(`${path}: no examples`);
  return { examples, neutralDropped };
}

export interface Split {
  train: Example[];
  dev: Example[];
  test: Example[];
}

/** floor(n*train) / floor(n*dev) / remainder, after a seeded shuffle. */
export function splitExamples(
  examples: Example[],
  seed: number,
  fractions: { train: number; dev: number; test: number } = { train: 0.8, dev: 0.1, test: 0.1 }
): Split {
  const sum = fractions.train + fractions.dev + fractions.test;
  if (Math.abs(sum - 1) > 1e-9 || fractions.train <= 0 || fractions.dev <= 0 || fractions.test <= 0) {
    throw new Error(`split fractions must be positive and sum to 1`);
  }
  if (examples.length < 10) {
    throw new Error(`need at least 10 examples to split, got ${examples.length}`);
  }
  const shuffled = new Rng(seed).shuffle([...examples]);
  const n = shuffled.length;
  const nTrain = Math.floor(n * fractions.train + 1e-9);
  const nDev = Math.floor(n * fractions.dev + 1e-9);
  return {
    train: shuffled.slice(0, nTrain),
    dev: shuffled.slice(nTrain, nTrain + nDev),
    test: shuffled.slice(nTrain + nDev),
  };
}
