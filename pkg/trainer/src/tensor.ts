/**
 * Minimal reverse-mode autograd over dense 2-D matrices.
 *
 * Tensors are row-major Float64Arrays with a [rows, cols] shape. Ops build
 * a tape of backward closures; `backward()` on a scalar loss walks the tape
 * in reverse topological order. Sized for toy encoders, not throughput.
 */

export class Tensor {
  data: Float64Array;
  grad: Float64Array | null;
  readonly rows: number;
  readonly cols: number;
  requiresGrad: boolean;
  private parents: Tensor[];
  private backwardFn: (() => void) | null;

  constructor(rows: number, cols: number, data?: Float64Array, requiresGrad = false) {
    this.rows = rows;
    this.cols = cols;
    this.data = data ?? new Float64Array(rows * cols);
    if (this.data.length !== rows * cols) {
      throw new Error(`data length ${this.data.length} != ${rows}x${cols}`);
    }
    this.grad = null;
    this.requiresGrad = requiresGrad;
    this.parents = [];
    this.backwardFn = null;
  }

  static from(rows: number, cols: number, values: number[]): Tensor {
    return new Tensor(rows, cols, Float64Array.from(values));
  }

  static param(rows: number, cols: number, init: () => number): Tensor {
    const t = new Tensor(rows, cols, undefined, true);
    for (let i = 0; i < t.data.length; i++) t.data[i] = init();
    return t;
  }

  at(r: number, c: number): number {
    return this.data[r * this.cols + c];
  }

  ensureGrad(): Float64Array {
    if (!this.grad) this.grad = new Float64Array(this.rows * this.cols);
    return this.grad;
  }

  protected static derive(
    rows: number,
    cols: number,
    parents: Tensor[],
    backwardFn: (out: Tensor) => () => void
  ): Tensor {
    const out = new Tensor(rows, cols, undefined, parents.some((p) => p.requiresGrad));
    out.parents = parents;
    if (out.requiresGrad) out.backwardFn = backwardFn(out);
    return out;
  }

  /** Reverse-mode pass from this scalar (1x1) tensor. */
  backward(): void {
    if (this.rows !== 1 || this.cols !== 1) throw new Error("backward() needs a scalar");
    const order: Tensor[] = [];
    const seen = new Set<Tensor>();
    const visit = (t: Tensor) => {
      if (seen.has(t) || !t.requiresGrad) return;
      seen.add(t);
      for (const p of t.parents) visit(p);
      order.push(t);
    };
    visit(this);
    this.ensureGrad()[0] = 1.0;
    for (let i = order.length - 1; i >= 0; i--) {
      order[i].backwardFn?.();
    }
  }

  // ---- ops -----------------------------------------------------------------

  /** Matrix product this[m,k] @ other[k,n]. */
  matmul(other: Tensor): Tensor {
    if (this.cols !== other.rows) {
      throw new Error(`matmul shape mismatch ${this.cols} vs ${other.rows}`);
    }
    const [m, k, n] = [this.rows, this.cols, other.cols];
    const a = this;
    const out = Tensor.derive(m, n, [this, other], (o) => () => {
      const og = o.grad!;
      if (a.requiresGrad) {
        const ag = a.ensureGrad();
        for (let i = 0; i < m; i++)
          for (let j = 0; j < k; j++) {
            let s = 0;
            for (let c = 0; c < n; c++) s += og[i * n + c] * other.data[j * n + c];
            ag[i * k + j] += s;
          }
      }
      if (other.requiresGrad) {
        const bg = other.ensureGrad();
        for (let j = 0; j < k; j++)
          for (let c = 0; c < n; c++) {
            let s = 0;
            for (let i = 0; i < m; i++) s += a.data[i * k + j] * og[i * n + c];
            bg[j * n + c] += s;
          }
      }
    });
    for (let i = 0; i < m; i++)
      for (let c = 0; c < n; c++) {
        let s = 0;
        for (let j = 0; j < k; j++) s += a.data[i * k + j] * other.data[j * n + c];
        out.data[i * n + c] = s;
      }
    return out;
  }

  /** Elementwise sum of two same-shape tensors. */
  add(other: Tensor): Tensor {
    if (this.rows !== other.rows || this.cols !== other.cols) {
      throw new Error("add shape mismatch");
    }
    const a = this;
    const out = Tensor.derive(this.rows, this.cols, [this, other], (o) => () => {
      const og = o.grad!;
      if (a.requiresGrad) {
        const g = a.ensureGrad();
        for (let i = 0; i < g.length; i++) g[i] += og[i];
      }
      if (other.requiresGrad) {
        const g = other.ensureGrad();
        for (let i = 0; i < g.length; i++) g[i] += og[i];
      }
    });
    for (let i = 0; i < out.data.length; i++) out.data[i] = a.data[i] + other.data[i];
    return out;
  }

  /** Add a [1,cols] row vector to every row. */
  addRow(row: Tensor): Tensor {
    if (row.rows !== 1 || row.cols !== this.cols) throw new Error("addRow shape mismatch");
    const a = this;
    const out = Tensor.derive(this.rows, this.cols, [this, row], (o) => () => {
      const og = o.grad!;
      if (a.requiresGrad) {
        const g = a.ensureGrad();
        for (let i = 0; i < g.length; i++) g[i] += og[i];
      }
      if (row.requiresGrad) {
        const g = row.ensureGrad();
        for (let i = 0; i < a.rows; i++)
          for (let j = 0; j < a.cols; j++) g[j] += og[i * a.cols + j];
      }
    });
    for (let i = 0; i < a.rows; i++)
      for (let j = 0; j < a.cols; j++)
        out.data[i * a.cols + j] = a.data[i * a.cols + j] + row.data[j];
    return out;
  }

  scale(factor: number): Tensor {
    const a = this;
    const out = Tensor.derive(this.rows, this.cols, [this], (o) => () => {
      if (a.requiresGrad) {
        const g = a.ensureGrad();
        const og = o.grad!;
        for (let i = 0; i < g.length; i++) g[i] += factor * og[i];
      }
    });
    for (let i = 0; i < out.data.length; i++) out.data[i] = factor * a.data[i];
    return out;
  }

  /** Gaussian error linear unit (tanh approximation). */
  gelu(): Tensor {
    const a = this;
    const C = Math.sqrt(2 / Math.PI);
    const out = Tensor.derive(this.rows, this.cols, [this], (o) => () => {
      if (!a.requiresGrad) return;
      const g = a.ensureGrad();
      const og = o.grad!;
      for (let i = 0; i < g.length; i++) {
        const x = a.data[i];
        const inner = C * (x + 0.044715 * x * x * x);
        const t = Math.tanh(inner);
        const dinner = C * (1 + 3 * 0.044715 * x * x);
        g[i] += og[i] * (0.5 * (1 + t) + 0.5 * x * (1 - t * t) * dinner);
      }
    });
    for (let i = 0; i < out.data.length; i++) {
      const x = a.data[i];
      out.data[i] = 0.5 * x * (1 + Math.tanh(C * (x + 0.044715 * x * x * x)));
    }
    return out;
  }

  /** Row-wise layer normalization with learned gain and bias. */
  layerNorm(gamma: Tensor, beta: Tensor, eps = 1e-5): Tensor {
    const a = this;
    const d = this.cols;
    const means = new Float64Array(this.rows);
    const invstd = new Float64Array(this.rows);
    const xhat = new Float64Array(this.rows * d);
    const out = Tensor.derive(this.rows, d, [this, gamma, beta], (o) => () => {
      const og = o.grad!;
      if (beta.requiresGrad) {
        const g = beta.ensureGrad();
        for (let i = 0; i < a.rows; i++)
          for (let j = 0; j < d; j++) g[j] += og[i * d + j];
      }
      if (gamma.requiresGrad) {
        const g = gamma.ensureGrad();
        for (let i = 0; i < a.rows; i++)
          for (let j = 0; j < d; j++) g[j] += og[i * d + j] * xhat[i * d + j];
      }
      if (a.requiresGrad) {
        const g = a.ensureGrad();
        for (let i = 0; i < a.rows; i++) {
          let sumDy = 0;
          let sumDyXhat = 0;
          for (let j = 0; j < d; j++) {
            const dy = og[i * d + j] * gamma.data[j];
            sumDy += dy;
            sumDyXhat += dy * xhat[i * d + j];
          }
          for (let j = 0; j < d; j++) {
            const dy = og[i * d + j] * gamma.data[j];
            g[i * d + j] +=
              (invstd[i] / d) * (d * dy - sumDy - xhat[i * d + j] * sumDyXhat);
          }
        }
      }
    });
    for (let i = 0; i < this.rows; i++) {
      let mean = 0;
      for (let j = 0; j < d; j++) mean += a.data[i * d + j];
      mean /= d;
      let variance = 0;
      for (let j = 0; j < d; j++) {
        const v = a.data[i * d + j] - mean;
        variance += v * v;
      }
      variance /= d;
      means[i] = mean;
      invstd[i] = 1 / Math.sqrt(variance + eps);
      for (let j = 0; j < d; j++) {
        const h = (a.data[i * d + j] - mean) * invstd[i];
        xhat[i * d + j] = h;
        out.data[i * d + j] = h * gamma.data[j] + beta.data[j];
      }
    }
    return out;
  }

  /** Row-wise softmax (used for attention weights). */
  softmaxRows(): Tensor {
    const a = this;
    const out = Tensor.derive(this.rows, this.cols, [this], (o) => () => {
      if (!a.requiresGrad) return;
      const g = a.ensureGrad();
      const og = o.grad!;
      for (let i = 0; i < a.rows; i++) {
        let dot = 0;
        for (let j = 0; j < a.cols; j++)
          dot += og[i * a.cols + j] * o.data[i * a.cols + j];
        for (let j = 0; j < a.cols; j++) {
          const s = o.data[i * a.cols + j];
          g[i * a.cols + j] += s * (og[i * a.cols + j] - dot);
        }
      }
    });
    for (let i = 0; i < this.rows; i++) {
      let max = -Infinity;
      for (let j = 0; j < this.cols; j++) max = Math.max(max, a.data[i * this.cols + j]);
      let sum = 0;
      for (let j = 0; j < this.cols; j++) {
        const e = Math.exp(a.data[i * this.cols + j] - max);
        out.data[i * this.cols + j] = e;
        sum += e;
      }
      for (let j = 0; j < this.cols; j++) out.data[i * this.cols + j] /= sum;
    }
    return out;
  }

  /** Slice rows [start, end) as a view-copy that routes gradients back. */
  sliceRows(start: number, end: number): Tensor {
    const a = this;
    const rows = end - start;
    const out = Tensor.derive(rows, this.cols, [this], (o) => () => {
      if (!a.requiresGrad) return;
      const g = a.ensureGrad();
      const og = o.grad!;
      for (let i = 0; i < rows * a.cols; i++) g[start * a.cols + i] += og[i];
    });
    out.data.set(this.data.subarray(start * this.cols, end * this.cols));
    return out;
  }

  /** Slice columns [start, end). */
  sliceCols(start: number, end: number): Tensor {
    const a = this;
    const cols = end - start;
    const out = Tensor.derive(this.rows, cols, [this], (o) => () => {
      if (!a.requiresGrad) return;
      const g = a.ensureGrad();
      const og = o.grad!;
      for (let i = 0; i < a.rows; i++)
        for (let j = 0; j < cols; j++) g[i * a.cols + start + j] += og[i * cols + j];
    });
    for (let i = 0; i < this.rows; i++)
      for (let j = 0; j < cols; j++)
        out.data[i * cols + j] = this.data[i * this.cols + start + j];
    return out;
  }

  transpose(): Tensor {
    const a = this;
    const out = Tensor.derive(this.cols, this.rows, [this], (o) => () => {
      if (!a.requiresGrad) return;
      const g = a.ensureGrad();
      const og = o.grad!;
      for (let i = 0; i < a.rows; i++)
        for (let j = 0; j < a.cols; j++) g[i * a.cols + j] += og[j * a.rows + i];
    });
    for (let i = 0; i < this.rows; i++)
      for (let j = 0; j < this.cols; j++)
        out.data[j * this.rows + i] = this.data[i * this.cols + j];
    return out;
  }

  /** Concatenate along columns: [m,a] ++ [m,b] -> [m,a+b]. */
  static concatCols(parts: Tensor[]): Tensor {
    const rows = parts[0].rows;
    const cols = parts.reduce((s, p) => s + p.cols, 0);
    const out = Tensor.derive(rows, cols, parts, (o) => () => {
      const og = o.grad!;
      let offset = 0;
      for (const p of parts) {
        if (p.requiresGrad) {
          const g = p.ensureGrad();
          for (let i = 0; i < rows; i++)
            for (let j = 0; j < p.cols; j++) g[i * p.cols + j] += og[i * cols + offset + j];
        }
        offset += p.cols;
      }
    });
    let offset = 0;
    for (const p of parts) {
      for (let i = 0; i < rows; i++)
        for (let j = 0; j < p.cols; j++) out.data[i * cols + offset + j] = p.at(i, j);
      offset += p.cols;
    }
    return out;
  }

  /** Gather embedding rows by token index: table[V,d] -> [ids.length, d]. */
  static gatherRows(table: Tensor, ids: number[]): Tensor {
    const d = table.cols;
    const out = Tensor.derive(ids.length, d, [table], (o) => () => {
      if (!table.requiresGrad) return;
      const g = table.ensureGrad();
      const og = o.grad!;
      for (let i = 0; i < ids.length; i++)
        for (let j = 0; j < d; j++) g[ids[i] * d + j] += og[i * d + j];
    });
    for (let i = 0; i < ids.length; i++)
      for (let j = 0; j < d; j++) out.data[i * d + j] = table.data[ids[i] * d + j];
    return out;
  }

  /** Inverted dropout with a fixed mask (no-op when rate = 0). */
  dropout(rate: number, rng: { next(): number }): Tensor {
    if (rate <= 0) return this;
    const a = this;
    const keep = 1 - rate;
    const mask = new Float64Array(this.data.length);
    for (let i = 0; i < mask.length; i++) mask[i] = rng.next() < keep ? 1 / keep : 0;
    const out = Tensor.derive(this.rows, this.cols, [this], (o) => () => {
      if (!a.requiresGrad) return;
      const g = a.ensureGrad();
      const og = o.grad!;
      for (let i = 0; i < g.length; i++) g[i] += og[i] * mask[i];
    });
    for (let i = 0; i < out.data.length; i++) out.data[i] = a.data[i] * mask[i];
    return out;
  }

  /** Mean softmax cross-entropy of logits [m,C] against integer labels. */
  static softmaxCrossEntropy(logits: Tensor, labels: number[]): Tensor {
    const [m, c] = [logits.rows, logits.cols];
    if (labels.length !== m) throw new Error("labels length mismatch");
    const probs = new Float64Array(m * c);
    const out = Tensor.derive(1, 1, [logits], (o) => () => {
      if (!logits.requiresGrad) return;
      const g = logits.ensureGrad();
      const scale = o.grad![0] / m;
      for (let i = 0; i < m; i++)
        for (let j = 0; j < c; j++)
          g[i * c + j] += scale * (probs[i * c + j] - (labels[i] === j ? 1 : 0));
    });
    let loss = 0;
    for (let i = 0; i < m; i++) {
      let max = -Infinity;
      for (let j = 0; j < c; j++) max = Math.max(max, logits.at(i, j));
      let sum = 0;
      for (let j = 0; j < c; j++) {
        const e = Math.exp(logits.at(i, j) - max);
        probs[i * c + j] = e;
        sum += e;
      }
      for (let j = 0; j < c; j++) probs[i * c + j] /= sum;
      loss -= Math.log(Math.max(probs[i * c + labels[i]], 1e-300));
    }
    out.data[0] = loss / m;
    return out;
  }
}

/** Softmax over a plain number row (inference-side probabilities). */
export function softmax(row: number[]): number[] {
  const max = Math.max(...row);
  const exps = row.map((v) => Math.exp(v - max));
  const sum = exps.reduce((a, b) => a + b, 0);
  return exps.map((v) => v / sum);
}
