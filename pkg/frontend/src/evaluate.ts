/**
 * Evaluation: accuracy, residual logical error rate, and the 16-way
 * confusion matrix on a held-out SEMD file.  A record counts as a
 * residual error exactly when the predicted class differs from the
 * labeled class.
 */

import * as fs from "fs";
import * as tf from "@tensorflow/tfjs";
import { initBackend } from "./backend";
import { SemdDataset } from "./semd";
import { loadModel, parseArgs } from "./train";

export interface EvalResult {
  n: number;
  accuracy: number;
  pBar: number;
  confusion: number[][];
}

export async function evaluateModel(
  model: tf.LayersModel,
  dataset: SemdDataset,
  batchSize = 500,
  limit = 0,
): Promise<EvalResult> {
  const confusion: number[][] = Array.from(
    { length: 16 }, () => new Array(16).fill(0));
  let correct = 0;
  const total = limit > 0 ? Math.min(limit, dataset.count) : dataset.count;
  for (let start = 0; start < total; start += batchSize) {
    const stop = Math.min(start + batchSize, total);
    const { grids, labels } = dataset.readRange(start, stop);
    const xs = tf.tensor4d(
      grids, [stop - start, dataset.imageSize, dataset.imageSize, 1]);
    const probs = model.predict(xs, { batchSize }) as tf.Tensor2D;
    const pred = await probs.argMax(-1).data();
    xs.dispose();
    probs.dispose();
    for (let i = 0; i < labels.length; i++) {
      confusion[labels[i]][pred[i]] += 1;
      if (labels[i] === pred[i]) {
        correct += 1;
      }
    }
  }
  return {
    n: total,
    accuracy: correct / total,
    pBar: 1 - correct / total,
    confusion,
  };
}

export function confusionCsv(result: EvalResult): string {
  const lines = [
    ["label", ...Array.from({ length: 16 }, (_, k) => `pred_${k}`)].join(","),
  ];
  result.confusion.forEach((row, label) => {
    lines.push([label, ...row].join(","));
  });
  return lines.join("\n") + "\n";
}

async function main(): Promise<void> {
  await initBackend();
  const args = parseArgs(process.argv.slice(2));
  const modelDir = args["model"];
  const dataPath = args["data"];
  if (!modelDir || !dataPath) {
    console.error("usage: evaluate --model dir --data file.semd " +
      "[--out confusion.csv] [--limit 0]");
    process.exit(3);
  }
  const model = await loadModel(modelDir);
  const dataset = new SemdDataset(dataPath);
  const result = await evaluateModel(
    model, dataset, 500, parseInt(args["limit"] ?? "0", 10));
  console.log(`n=${result.n} accuracy=${result.accuracy.toFixed(4)} ` +
    `p_bar=${result.pBar.toFixed(4)}`);
  if (args["out"]) {
    fs.writeFileSync(args["out"], confusionCsv(result));
    console.log(`confusion matrix: ${args["out"]}`);
  }
  dataset.close();
}

if (require.main === module) {
  main().catch((err) => {
    console.error(err);
    process.exit(1);
  });
}
