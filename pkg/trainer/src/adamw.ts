/** AdamW: Adam moments with decoupled weight decay. */
import { Tensor } from "./tensor";

export interface AdamWOptions {
  learningRate: number;
  epsilon?: number;
  beta1?: number;
  beta2?: number;
  weightDecay?: number;
}

export class AdamW {
  private params: Tensor[];
  private m: Float64Array[];
  private v: Float64Array[];
  private t = 0;
  readonly learningRate: number;
  readonly epsilon: number;
  readonly beta1: number;
  readonly beta2: number;
  readonly weightDecay: number;

  constructor(params: Iterable<Tensor>, opts: AdamWOptions) {
    this.params = [...params];
    this.learningRate = opts.learningRate;
    this.epsilon = opts.epsilon ?? 1e-8;
    this.beta1 = opts.beta1 ?? 0.9;
    this.beta2 = opts.beta2 ?? 0.999;
    this.weightDecay = opts.weightDecay ?? 0.01;
    this.m = this.params.map((p) => new Float64Array(p.data.length));
    this.v = this.params.map((p) => new Float64Array(p.data.length));
  }

  zeroGrad(): void {
    for (const p of this.params) {
      if (p.grad) p.grad.fill(0);
    }
  }

  step(): void {
    this.t += 1;
    const bc1 = 1 - Math.pow(this.beta1, this.t);
    const bc2 = 1 - Math.pow(this.beta2, this.t);
    for (let i = 0; i < this.params.length; i++) {
      const p = this.params[i];
      if (!p.grad) continue;
      const m = this.m[i];
      const v = this.v[i];
      for (let j = 0; j < p.data.length; j++) {
        const g = p.grad[j];
        m[j] = this.beta1 * m[j] + (1 - this.beta1) * g;
        v[j] = this.beta2 * v[j] + (1 - this.beta2) * g * g;
        const mhat = m[j] / bc1;
        const vhat = v[j] / bc2;
        // decoupled decay: applied directly to the weight, not the gradient
        p.data[j] -=
          this.learningRate * (mhat / (Math.sqrt(vhat) + this.epsilon) +
          this.weightDecay * p.data[j]);
      }
    }
  }
}
