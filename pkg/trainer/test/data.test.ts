import assert from "node:assert/strict";
import { test } from "node:test";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { loadAnnotations, splitExamples, Example } from "../src/data";
import { buildVocab, encode, wordTokens, CLS, UNK } from "../src/tokenizer";
import { computeMetrics } from "../src/metrics";

function tempTsv(rows: string[]): string {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "trainer-test-"));
  const file = path.join(dir, "annotations.tsv");
  fs.writeFileSync(file, ["text\tlabel", ...rows].join("\n") + "\n");
  return file;
}

test("loadAnnotations drops and counts neutral rows", () => {
  const file = tempTsv(["great solar\tpositive", "bad panel\tNegative", "meh\tNeutral"]);
  const { examples, neutralDropped } = loadAnnotations(file);
  assert.equal(examples.length, 2);
  assert.equal(neutralDropped, 1);
  assert.deepEqual(examples.map((e) => e.label), [1, 0]);
});

test("loadAnnotations rejects unknown labels with the line number", () => {
  const file = tempTsv(["ok\tpositive", "weird\tmixed"]);
  assert.throws(() => loadAnnotations(file), /:3: unknown label/);
});

test("loadAnnotations rejects empty files", () => {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "trainer-test-"));
  const file = path.join(dir, "empty.tsv");
  fs.writeFileSync(file, "");
  assert.throws(() => loadAnnotations(file), /empty/);
});

function fakeExamples(n: number): Example[] {
  return Array.from({ length: n }, (_, i) => ({
    text: `text ${i}`,
    label: (i % 2) as 0 | 1,
  }));
}

test("split sizes are floor/floor/remainder", () => {
  const s10 = splitExamples(fakeExamples(10), 1);
  assert.deepEqual(
    [s10.train.length, s10.dev.length, s10.test.length],
    [8, 1, 1]
  );
  const s5122 = splitExamples(fakeExamples(5122), 1);
  assert.deepEqual(
    [s5122.train.length, s5122.dev.length, s5122.test.length],
    [4097, 512, 513]
  );
});

test("split is deterministic, disjoint, and exhaustive", () => {
  const examples = fakeExamples(103);
  const a = splitExamples(examples, 42);
  const b = splitExamples(examples, 42);
  assert.deepEqual(a, b);
  const texts = [...a.train, ...a.dev, ...a.test].map((e) => e.text).sort();
  assert.deepEqual(texts, examples.map((e) => e.text).sort());
});

test("split rejects tiny inputs and bad fractions", () => {
  assert.throws(() => splitExamples(fakeExamples(9), 0), /at least 10/);
  assert.throws(
    () => splitExamples(fakeExamples(20), 0, { train: 0.5, dev: 0.2, test: 0.2 }),
    /sum to 1/
  );
});

test("tokenizer builds a sorted vocab with specials first", () => {
  const vocab = buildVocab(["solar wins", "solar fails"]);
  assert.equal(vocab.tokens[0], CLS);
  assert.equal(vocab.tokens[1], UNK);
  assert.deepEqual(vocab.tokens.slice(2), ["fails", "solar", "wins"]);
});

test("encode prepends CLS, maps unknowns, and truncates", () => {
  const vocab = buildVocab(["alpha beta"]);
  const ids = encode(vocab, "alpha gamma beta", 8);
  assert.equal(ids[0], vocab.index.get(CLS));
  assert.equal(ids[2], vocab.index.get(UNK));
  const long = encode(vocab, Array(100).fill("alpha").join(" "), 8);
  assert.equal(long.length, 8);
});

test("wordTokens lowercases and keeps apostrophes", () => {
  assert.deepEqual(wordTokens("Don't STOP #solar!"), ["don't", "stop", "solar"]);
});

test("metrics reproduce the hand-computed confusion", () => {
  // TP=2 FP=1 FN=1 TN=6
  const predicted = [1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
  const actual = [1, 1, 0, 1, 0, 0, 0, 0, 0, 0];
  const m = computeMetrics(predicted, actual);
  assert.ok(Math.abs(m.accuracy - 0.8) < 1e-12);
  assert.ok(Math.abs(m.precision - 2 / 3) < 1e-12);
  assert.ok(Math.abs(m.recall - 2 / 3) < 1e-12);
  assert.ok(Math.abs(m.f1 - 2 / 3) < 1e-12);
});
