import assert from "node:assert/strict";
import { test } from "node:test";
import { AdamW } from "../src/adamw";
import { Tensor } from "../src/tensor";

test("single AdamW step matches hand-computed update", () => {
  const p = Tensor.from(1, 1, [1.0]);
  p.requiresGrad = true;
  p.ensureGrad()[0] = 0.5;
  const opt = new AdamW([p], { learningRate: 0.1, epsilon: 1e-8, weightDecay: 0.0 });
  opt.step();
  // m=0.05, v=0.00025; mhat=0.5, vhat=0.25; step = 0.1*0.5/(0.5+1e-8)
  const expected = 1.0 - (0.1 * 0.5) / (0.5 + 1e-8);
  assert.ok(Math.abs(p.data[0] - expected) < 1e-15, `${p.data[0]} vs ${expected}`);
});

test("decoupled weight decay shrinks weights independently of gradient scaling", () => {
  const p = Tensor.from(1, 1, [1.0]);
  p.requiresGrad = true;
  p.ensureGrad()[0] = 0.5;
  const opt = new AdamW([p], { learningRate: 0.1, epsilon: 1e-8, weightDecay: 0.01 });
  opt.step();
  const expected = 1.0 - (0.1 * 0.5) / (0.5 + 1e-8) - 0.1 * 0.01 * 1.0;
  assert.ok(Math.abs(p.data[0] - expected) < 1e-15);
});

test("bias correction makes first steps near the learning rate", () => {
  const p = Tensor.from(1, 1, [0.0]);
  p.requiresGrad = true;
  const opt = new AdamW([p], { learningRate: 0.01, weightDecay: 0 });
  for (let t = 0; t < 3; t++) {
    p.ensureGrad()[0] = 1.0; // constant gradient
    opt.step();
  }
  // with constant gradients, each bias-corrected step is ~lr
  assert.ok(Math.abs(p.data[0] + 3 * 0.01) < 1e-6);
});

test("zeroGrad clears accumulated gradients", () => {
  const p = Tensor.from(1, 2, [1.0, 2.0]);
  p.requiresGrad = true;
  p.ensureGrad().set([3.0, 4.0]);
  const opt = new AdamW([p], { learningRate: 0.1 });
  opt.zeroGrad();
  assert.deepEqual([...p.grad!], [0, 0]);
});
