/**
 * Residual network over syndrome images.
 *
 * Three stages of n building blocks (16, 32, 64 filters), 3x3 kernels,
 * stride 1, no downsampling anywhere; every convolution is preceded by
 * one ring of twisted periodic padding so feature maps stay 2d x 2d on
 * the torus.  Batch normalization follows each convolution.  Stage
 * transitions replace the identity shortcut with a 1x1 convolution.
 * The stage output is flattened into a dense softmax over the 16
 * logical classes.  Depth (weighted layers, transitions excluded) is
 * 6n + 2.
 */

import * as tf from "@tensorflow/tfjs";
import { PeriodicPad } from "./padding";

export interface ResNetConfig {
  blocksPerStage: number;
  seed?: number;
}

export const STAGE_FILTERS = [16, 32, 64];

export function depth(blocksPerStage: number): number {
  return 6 * blocksPerStage + 2;
}

interface TorusConvArgs {
  filters: number;
  kernelSize: number;
  seed: number;
  name?: string;
}

/**
 * Bias-free stride-1 VALID convolution on plain tf.conv2d.  The stock
 * convolution layer routes through the fused op, whose gradient needs
 * backprop kernels the WASM backend does not ship; the plain op uses
 * the composite gradient registered by the backend module.
 */
export class TorusConv2D extends tf.layers.Layer {
  static className = "TorusConv2D";
  private kernel!: tf.LayerVariable;
  private readonly filters: number;
  private readonly kernelSize: number;
  private readonly seed: number;

  constructor(args: TorusConvArgs) {
    super({ name: args.name });
    this.filters = args.filters;
    this.kernelSize = args.kernelSize;
    this.seed = args.seed;
  }

  override build(inputShape: tf.Shape | tf.Shape[]): void {
    const shape = inputShape as number[];
    const inChannels = shape[shape.length - 1] as number;
    this.kernel = this.addWeight(
      "kernel",
      [this.kernelSize, this.kernelSize, inChannels, this.filters],
      "float32",
      tf.initializers.heNormal({ seed: this.seed }),
    );
    this.built = true;
  }

  override computeOutputShape(inputShape: tf.Shape): tf.Shape {
    const [batch, h, w] = inputShape as (number | null)[];
    const k = this.kernelSize;
    return [batch, h == null ? null : h - k + 1,
      w == null ? null : w - k + 1, this.filters];
  }

  override call(inputs: tf.Tensor | tf.Tensor[]): tf.Tensor {
    const x = (Array.isArray(inputs) ? inputs[0] : inputs) as tf.Tensor4D;
    return tf.conv2d(x, this.kernel.read() as tf.Tensor4D, 1, "valid");
  }

  override getClassName(): string {
    return "TorusConv2D";
  }

  override getConfig(): tf.serialization.ConfigDict {
    return {
      ...super.getConfig(),
      filters: this.filters,
      kernelSize: this.kernelSize,
      seed: this.seed,
    };
  }

  static override fromConfig<T extends tf.serialization.Serializable>(
    cls: tf.serialization.SerializableConstructor<T>,
    config: tf.serialization.ConfigDict,
  ): T {
    return new cls({
      filters: config["filters"],
      kernelSize: config["kernelSize"],
      seed: config["seed"],
      name: config["name"],
    } as unknown as TorusConvArgs);
  }
}

tf.serialization.registerClass(TorusConv2D);

let nameCounter = 0;

function conv(
  x: tf.SymbolicTensor,
  filters: number,
  kernel: number,
  seed: number,
): tf.SymbolicTensor {
  const id = nameCounter++;
  let y = x;
  if (kernel === 3) {
    y = new PeriodicPad({ w: 1, name: `pad_${id}` })
      .apply(y) as tf.SymbolicTensor;
  }
  y = new TorusConv2D({
    name: `conv_${id}`,
    filters,
    kernelSize: kernel,
    seed,
  }).apply(y) as tf.SymbolicTensor;
  return tf.layers
    .batchNormalization({ name: `bn_${id}` })
    .apply(y) as tf.SymbolicTensor;
}

function block(
  x: tf.SymbolicTensor,
  filters: number,
  transition: boolean,
  seed: number,
): tf.SymbolicTensor {
  let y = conv(x, filters, 3, seed);
  y = tf.layers.reLU().apply(y) as tf.SymbolicTensor;
  y = conv(y, filters, 3, seed + 1);
  const shortcut = transition ? conv(x, filters, 1, seed + 2) : x;
  const added = tf.layers.add().apply([y, shortcut]) as tf.SymbolicTensor;
  return tf.layers.reLU().apply(added) as tf.SymbolicTensor;
}

/** Build the classifier for a distance-d code (input 2d x 2d x 1). */
export function buildModel(config: ResNetConfig, d: number): tf.LayersModel {
  const n = config.blocksPerStage;
  if (!Number.isInteger(n) || n < 1) {
    throw new Error(`blocks per stage must be a positive integer, got ${n}`);
  }
  nameCounter = 0;
  const seed = config.seed ?? 0;
  const input = tf.input({ shape: [2 * d, 2 * d, 1] });
  let x = conv(input, STAGE_FILTERS[0], 3, seed);
  x = tf.layers.reLU().apply(x) as tf.SymbolicTensor;
  let seedOffset = 10;
  for (let stage = 0; stage < STAGE_FILTERS.length; stage++) {
    for (let b = 0; b < n; b++) {
      const transition = stage > 0 && b === 0;
      x = block(x, STAGE_FILTERS[stage], transition, seed + seedOffset);
      seedOffset += 10;
    }
  }
  x = tf.layers.flatten().apply(x) as tf.SymbolicTensor;
  const output = tf.layers
    .dense({
      units: 16,
      activation: "softmax",
      kernelInitializer: tf.initializers.heNormal({ seed: seed + 1 }),
      name: "logical_head",
    })
    .apply(x) as tf.SymbolicTensor;
  return tf.model({ inputs: input, outputs: output });
}

/** Weighted depth: 3x3 convolutions plus the dense head. */
export function countedDepth(model: tf.LayersModel): number {
  let convs = 0;
  let dense = 0;
  for (const layer of model.layers) {
    const cls = layer.getClassName();
    if (cls === "TorusConv2D") {
      const kernel = (layer.getConfig() as { kernelSize?: number })
        .kernelSize;
      if (kernel === 3) {
        convs += 1;
      }
    } else if (cls === "Dense") {
      dense += 1;
    }
  }
  return convs + dense;
}

/** Convolution layers in trunk order (for transfer/freezing). */
export function convLayers(model: tf.LayersModel): tf.layers.Layer[] {
  return model.layers.filter((l) => l.getClassName() === "TorusConv2D");
}
