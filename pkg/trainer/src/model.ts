/**
 * Small bidirectional transformer encoder with a 2-class head.
 *
 * Pre-LN blocks: x + MHA(LN(x)), then x + FFN(LN(x)); the first (CLS)
 * position's final hidden state feeds the classification head. The
 * default profile mirrors a 12-layer/12-head encoder; the tiny profile
 * keeps CI fast.
 */
import { Rng } from "./rng";
import { softmax, Tensor } from "./tensor";
import { encode, Vocab } from "./tokenizer";

export interface ModelConfig {
  vocabSize: number;
  dModel: number;
  nHeads: number;
  nLayers: number;
  ffDim: number;
  maxSeq: number;
  dropout: number;
}

export const DEFAULT_PROFILE = { dModel: 768, nHeads: 12, nLayers: 12, ffDim: 3072 };
export const TINY_PROFILE = { dModel: 32, nHeads: 2, nLayers: 1, ffDim: 64 };

interface Block {
  lnAttnGamma: Tensor;
  lnAttnBeta: Tensor;
  wq: Tensor;
  wk: Tensor;
  wv: Tensor;
  wo: Tensor;
  lnFfGamma: Tensor;
  lnFfBeta: Tensor;
  ff1: Tensor;
  ff1Bias: Tensor;
  ff2: Tensor;
  ff2Bias: Tensor;
}

export class TransformerClassifier {
  readonly config: ModelConfig;
  tokenEmb: Tensor;
  posEmb: Tensor;
  blocks: Block[];
  lnOutGamma: Tensor;
  lnOutBeta: Tensor;
  head: Tensor;
  headBias: Tensor;

  constructor(config: ModelConfig, rng: Rng) {
    if (config.dModel % config.nHeads !== 0) {
      throw new Error("dModel must be divisible by nHeads");
    }
    this.config = config;
    const scale = 0.02;
    const init = () => rng.gauss() * scale;
    const d = config.dModel;
    this.tokenEmb = Tensor.param(config.vocabSize, d, init);
    this.posEmb = Tensor.param(config.maxSeq, d, init);
    this.blocks = [];
    for (let i = 0; i < config.nLayers; i++) {
      this.blocks.push({
        lnAttnGamma: Tensor.param(1, d, () => 1),
        lnAttnBeta: Tensor.param(1, d, () => 0),
        wq: Tensor.param(d, d, init),
        wk: Tensor.param(d, d, init),
        wv: Tensor.param(d, d, init),
        wo: Tensor.param(d, d, init),
        lnFfGamma: Tensor.param(1, d, () => 1),
        lnFfBeta: Tensor.param(1, d, () => 0),
        ff1: Tensor.param(d, config.ffDim, init),
        ff1Bias: Tensor.param(1, config.ffDim, () => 0),
        ff2: Tensor.param(config.ffDim, d, init),
        ff2Bias: Tensor.param(1, d, () => 0),
      });
    }
    this.lnOutGamma = Tensor.param(1, d, () => 1);
    this.lnOutBeta = Tensor.param(1, d, () => 0);
    this.head = Tensor.param(d, 2, init);
    this.headBias = Tensor.param(1, 2, () => 0);
  }

  /** Named parameter registry, stable order (used by optimizer + saving). */
  parameters(): Map<string, Tensor> {
    const params = new Map<string, Tensor>();
    params.set("tokenEmb", this.tokenEmb);
    params.set("posEmb", this.posEmb);
    this.blocks.forEach((b, i) => {
      for (const [k, v] of Object.entries(b)) params.set(`block${i}.${k}`, v as Tensor);
    });
    params.set("lnOutGamma", this.lnOutGamma);
    params.set("lnOutBeta", this.lnOutBeta);
    params.set("head", this.head);
    params.set("headBias", this.headBias);
    return params;
  }

  /** Logits [1,2] for one encoded token-id sequence. */
  forward(ids: number[], train = false, rng?: Rng): Tensor {
    const cfg = this.config;
    const drop = train ? cfg.dropout : 0;
    const dh = cfg.dModel / cfg.nHeads;
    const posIds = ids.map((_, i) => i);
    let x = Tensor.gatherRows(this.tokenEmb, ids).add(
      Tensor.gatherRows(this.posEmb, posIds)
    );
    if (drop > 0 && rng) x = x.dropout(drop, rng);

    for (const block of this.blocks) {
      const normed = x.layerNorm(block.lnAttnGamma, block.lnAttnBeta);
      const q = normed.matmul(block.wq);
      const k = normed.matmul(block.wk);
      const v = normed.matmul(block.wv);
      const heads: Tensor[] = [];
      for (let h = 0; h < cfg.nHeads; h++) {
        const qh = q.sliceCols(h * dh, (h + 1) * dh);
        const kh = k.sliceCols(h * dh, (h + 1) * dh);
        const vh = v.sliceCols(h * dh, (h + 1) * dh);
        let weights = qh.matmul(kh.transpose()).scale(1 / Math.sqrt(dh)).softmaxRows();
        if (drop > 0 && rng) weights = weights.dropout(drop, rng);
        heads.push(weights.matmul(vh));
      }
      let attn = Tensor.concatCols(heads).matmul(block.wo);
      if (drop > 0 && rng) attn = attn.dropout(drop, rng);
      x = x.add(attn);

      const ffNormed = x.layerNorm(block.lnFfGamma, block.lnFfBeta);
      let ff = ffNormed
        .matmul(block.ff1)
        .addRow(block.ff1Bias)
        .gelu()
        .matmul(block.ff2)
        .addRow(block.ff2Bias);
      if (drop > 0 && rng) ff = ff.dropout(drop, rng);
      x = x.add(ff);
    }

    const final = x.layerNorm(this.lnOutGamma, this.lnOutBeta);
    const cls = final.sliceRows(0, 1);
    return cls.matmul(this.head).addRow(this.headBias);
  }

  /** Positive-class probability for raw text (inference path). */
  pPositive(vocab: Vocab, text: string): number {
    const ids = encode(vocab, text, this.config.maxSeq);
    const logits = this.forward(ids, false);
    return softmax([logits.at(0, 0), logits.at(0, 1)])[1];
  }
}

export interface Checkpoint {
  format: string;
  config: ModelConfig;
  vocab: string[];
  params: Record<string, number[]>;
}

export const CHECKPOINT_FORMAT = "solsent-trainer/1";

export function toCheckpoint(model: TransformerClassifier, vocab: Vocab): Checkpoint {
  const params: Record<string, number[]> = {};
  for (const [name, tensor] of model.parameters()) {
    params[name] = Array.from(tensor.data);
  }
  return { format: CHECKPOINT_FORMAT, config: model.config, vocab: vocab.tokens, params };
}

export function fromCheckpoint(checkpoint: Checkpoint): {
  model: TransformerClassifier;
  vocab: Vocab;
} {
  if (checkpoint.format !== CHECKPOINT_FORMAT) {
    throw new Error(`unsupported checkpoint format: ${checkpoint.format}`);
  }
  const model = new TransformerClassifier(checkpoint.config, new Rng(0));
  for (const [name, tensor] of model.parameters()) {
    const values = checkpoint.params[name];
    if (!values || values.length !== tensor.data.length) {
      throw new Error(`checkpoint parameter ${name} missing or wrong size`);
    }
    tensor.data.set(values);
  }
  const vocab = {
    tokens: checkpoint.vocab,
    index: new Map(checkpoint.vocab.map((t, i) => [t, i])),
  };
  return { model, vocab };
}
