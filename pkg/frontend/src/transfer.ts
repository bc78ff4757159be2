/**
 * Transfer learning across code distances.
 *
 * The convolutional trunk is fully convolutional and therefore
 * distance-agnostic; only the dense head depends on the image size.
 * Warm starts copy every convolution and batch-norm weight from a
 * source model into a freshly built target and optionally freeze the
 * first k convolution layers (with their batch norms).
 */

import * as tf from "@tensorflow/tfjs";
import { initBackend } from "./backend";
import { buildModel, convLayers, ResNetConfig } from "./resnet";
import { loadModel, saveModel, parseArgs } from "./train";

/** Copy trunk weights from source into a new model for distance d. */
export function transferModel(
  source: tf.LayersModel,
  config: ResNetConfig,
  d: number,
  freezeConvs = 0,
): tf.LayersModel {
  const target = buildModel(config, d);
  const srcConv = convLayers(source);
  const dstConv = convLayers(target);
  if (srcConv.length !== dstConv.length) {
    throw new Error(
      `trunk mismatch: ${srcConv.length} vs ${dstConv.length} convolutions`);
  }
  for (let i = 0; i < srcConv.length; i++) {
    const src = srcConv[i].getWeights();
    const dst = dstConv[i].getWeights();
    if (src.length !== dst.length ||
      src.some((w, k) => w.shape.join() !== dst[k].shape.join())) {
      throw new Error(`convolution ${i} weight shape mismatch`);
    }
    dstConv[i].setWeights(src);
  }
  const srcBn = source.layers.filter(
    (l) => l.getClassName() === "BatchNormalization");
  const dstBn = target.layers.filter(
    (l) => l.getClassName() === "BatchNormalization");
  for (let i = 0; i < Math.min(srcBn.length, dstBn.length); i++) {
    dstBn[i].setWeights(srcBn[i].getWeights());
  }
  for (let i = 0; i < Math.min(freezeConvs, dstConv.length); i++) {
    dstConv[i].trainable = false;
  }
  return target;
}

async function main(): Promise<void> {
  await initBackend();
  const args = parseArgs(process.argv.slice(2));
  const srcDir = args["source"];
  const outDir = args["out"];
  const d = parseInt(args["d"] ?? "", 10);
  if (!srcDir || !outDir || !Number.isInteger(d)) {
    console.error(
      "usage: transfer --source dir --out dir --d 7 [--n-blocks 2] " +
      "[--freeze 0] [--seed 0]");
    process.exit(3);
  }
  const source = await loadModel(srcDir);
  const target = transferModel(source, {
    blocksPerStage: parseInt(args["n-blocks"] ?? "2", 10),
    seed: parseInt(args["seed"] ?? "0", 10),
  }, d, parseInt(args["freeze"] ?? "0", 10));
  await saveModel(target, outDir);
  console.log(`transferred trunk into distance-${d} model at ${outDir}`);
}

if (require.main === module) {
  main().catch((err) => {
    console.error(err);
    process.exit(1);
  });
}
