/**
 * Training loop for the convolutional decoder.
 *
 * Adam on categorical cross entropy, fixed batch size, single pass
 * over the dataset records in file order.  When the validation loss
 * plateaus (no improvement beyond 1e-4 for `patience` evaluations) the
 * learning rate is multiplied by 0.3; after three reductions in a row
 * without improvement, training stops.
 */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";
import { initBackend } from "./backend";
import { SemdDataset } from "./semd";
import { buildModel } from "./resnet";

export interface TrainOptions {
  batchSize: number;
  epochs: number;
  maxSteps: number;
  learningRate: number;
  valRecords: number;
  evalEvery: number;
  patience: number;
  minDelta: number;
  maxReductions: number;
  log?: (line: string) => void;
}

export const DEFAULTS: TrainOptions = {
  batchSize: 1000,
  epochs: 1,
  maxSteps: 0, // 0 = epochs * (one pass over the dataset)
  learningRate: 1e-3,
  valRecords: 2000,
  evalEvery: 25,
  patience: 5,
  minDelta: 1e-4,
  maxReductions: 3,
  log: undefined,
};

export interface HistoryPoint {
  step: number;
  loss: number;
  valLoss: number;
  valAccuracy: number;
  learningRate: number;
}

function toTensors(
  data: { grids: Float32Array; labels: Int32Array },
  imageSize: number,
): { xs: tf.Tensor4D; ys: tf.Tensor2D } {
  const n = data.labels.length;
  const xs = tf.tensor4d(data.grids, [n, imageSize, imageSize, 1]);
  const ys = tf.oneHot(tf.tensor1d(data.labels, "int32"), 16) as tf.Tensor2D;
  return { xs, ys: ys.toFloat() as tf.Tensor2D };
}

export async function trainOnDataset(
  model: tf.LayersModel,
  dataset: SemdDataset,
  options: Partial<TrainOptions> = {},
): Promise<HistoryPoint[]> {
  const opt = { ...DEFAULTS, ...options };
  const log = opt.log ?? (() => undefined);
  const valCount = Math.min(opt.valRecords, Math.floor(dataset.count / 5));
  const trainCount = dataset.count - valCount;
  const val = toTensors(
    dataset.readRange(trainCount, dataset.count), dataset.imageSize);

  let lr = opt.learningRate;
  let optimizer = tf.train.adam(lr);
  model.compile({
    optimizer,
    loss: "categoricalCrossentropy",
    metrics: ["accuracy"],
  });

  const history: HistoryPoint[] = [];
  let best = Number.POSITIVE_INFINITY;
  let sinceImprovement = 0;
  let reductionsWithoutGain = 0;
  let stop = false;
  const perEpoch = Math.floor(trainCount / opt.batchSize);
  const totalSteps = perEpoch * Math.max(1, opt.epochs);
  const steps = opt.maxSteps > 0
    ? Math.min(opt.maxSteps, totalSteps) : totalSteps;

  for (let step = 0; step < steps && !stop; step++) {
    const start = (step % perEpoch) * opt.batchSize;
    const batch = toTensors(
      dataset.readRange(start, start + opt.batchSize), dataset.imageSize);
    const result = await model.trainOnBatch(batch.xs, batch.ys);
    const loss = Array.isArray(result) ? (result[0] as number)
      : (result as number);
    batch.xs.dispose();
    batch.ys.dispose();

    if ((step + 1) % opt.evalEvery === 0 || step === steps - 1) {
      const evalOut = model.evaluate(val.xs, val.ys, {
        batchSize: opt.batchSize,
      }) as tf.Scalar[];
      const valLoss = (await evalOut[0].data())[0];
      const valAcc = (await evalOut[1].data())[0];
      evalOut.forEach((t) => t.dispose());
      history.push({
        step: step + 1, loss, valLoss, valAccuracy: valAcc,
        learningRate: lr,
      });
      log(`step ${step + 1}/${steps} loss ${loss.toFixed(4)} ` +
        `val_loss ${valLoss.toFixed(4)} val_acc ${valAcc.toFixed(4)} ` +
        `lr ${lr.toExponential(1)}`);
      if (valLoss < best - opt.minDelta) {
        best = valLoss;
        sinceImprovement = 0;
        reductionsWithoutGain = 0;
      } else {
        sinceImprovement += 1;
        if (sinceImprovement >= opt.patience) {
          reductionsWithoutGain += 1;
          if (reductionsWithoutGain > opt.maxReductions) {
            log("learning-rate reductions stopped helping; ending training");
            stop = true;
            continue;
          }
          lr *= 0.3;
          optimizer.dispose();
          optimizer = tf.train.adam(lr);
          model.compile({
            optimizer,
            loss: "categoricalCrossentropy",
            metrics: ["accuracy"],
          });
          sinceImprovement = 0;
          log(`plateau: reducing learning rate to ${lr.toExponential(2)}`);
        }
      }
    }
  }
  val.xs.dispose();
  val.ys.dispose();
  return history;
}

// -- checkpoint I/O (plain-file handler; keeps the trainer dependency-light) --

export async function saveModel(model: tf.LayersModel, dir: string):
  Promise<void> {
  fs.mkdirSync(dir, { recursive: true });
  await model.save(tf.io.withSaveHandler(async (artifacts) => {
    fs.writeFileSync(path.join(dir, "topology.json"), JSON.stringify({
      modelTopology: artifacts.modelTopology,
      weightSpecs: artifacts.weightSpecs,
    }));
    const data = artifacts.weightData as ArrayBuffer;
    fs.writeFileSync(path.join(dir, "weights.bin"), Buffer.from(data));
    return { modelArtifactsInfo: { dateSaved: new Date(),
      modelTopologyType: "JSON" } };
  }));
}

export async function loadModel(dir: string): Promise<tf.LayersModel> {
  const meta = JSON.parse(
    fs.readFileSync(path.join(dir, "topology.json"), "utf-8"));
  const weights = fs.readFileSync(path.join(dir, "weights.bin"));
  return tf.loadLayersModel(tf.io.fromMemory({
    modelTopology: meta.modelTopology,
    weightSpecs: meta.weightSpecs,
    weightData: weights.buffer.slice(
      weights.byteOffset, weights.byteOffset + weights.byteLength),
  }));
}

// -- command line ---------------------------------------------------------------

interface Args {
  [key: string]: string;
}

export function parseArgs(argv: string[]): Args {
  const out: Args = {};
  for (let i = 0; i < argv.length; i += 2) {
    if (!argv[i].startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`bad argument ${argv[i]}`);
    }
    out[argv[i].slice(2)] = argv[i + 1];
  }
  return out;
}

async function main(): Promise<void> {
  console.log(`backend: ${await initBackend()}`);
  const args = parseArgs(process.argv.slice(2));
  const dataPath = args["data"];
  const outDir = args["out"];
  if (!dataPath || !outDir) {
    console.error(
      "usage: train --data file.semd --out dir [--n-blocks 2] " +
      "[--batch 1000] [--epochs 1] [--seed 0] [--max-steps 0] [--lr 1e-3]");
    process.exit(3);
  }
  const dataset = new SemdDataset(dataPath);
  const model = buildModel({
    blocksPerStage: parseInt(args["n-blocks"] ?? "2", 10),
    seed: parseInt(args["seed"] ?? "0", 10),
  }, dataset.header.distance);
  console.log(`records: ${dataset.count}, d=${dataset.header.distance}, ` +
    `parameters: ${model.countParams()}`);
  const history = await trainOnDataset(model, dataset, {
    batchSize: parseInt(args["batch"] ?? "1000", 10),
    epochs: parseInt(args["epochs"] ?? "1", 10),
    maxSteps: parseInt(args["max-steps"] ?? "0", 10),
    learningRate: parseFloat(args["lr"] ?? "1e-3"),
    log: (line) => console.log(line),
  });
  await saveModel(model, outDir);
  fs.writeFileSync(path.join(outDir, "history.json"),
    JSON.stringify(history, null, 2));
  console.log(`saved model to ${outDir}`);
  dataset.close();
}

if (require.main === module) {
  main().catch((err) => {
    console.error(err);
    process.exit(1);
  });
}
