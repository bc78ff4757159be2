import * as tf from "@tensorflow/tfjs";
import { beforeAll, describe, expect, it } from "vitest";
import { initBackend } from "../src/backend";
import { buildModel, countedDepth, convLayers, depth } from "../src/resnet";

beforeAll(async () => {
  await initBackend();
});

describe("residual network structure", () => {
  it("depth formula gives 14 and 50", () => {
    expect(depth(2)).toBe(14);
    expect(depth(8)).toBe(50);
  });

  it("built models realize the counted depth", () => {
    const m2 = buildModel({ blocksPerStage: 2 }, 5);
    expect(countedDepth(m2)).toBe(14);
    const m8 = buildModel({ blocksPerStage: 8 }, 5);
    expect(countedDepth(m8)).toBe(50);
  });

  it("parameter count for n=8 sits at the expected order", () => {
    const model = buildModel({ blocksPerStage: 8 }, 5);
    const params = model.countParams();
    expect(params).toBeGreaterThan(5e5);
    expect(params).toBeLessThan(2e6);
  });

  it("keeps feature maps at 2d x 2d (no downsampling)", () => {
    const d = 5;
    const model = buildModel({ blocksPerStage: 2 }, d);
    const flatten = model.layers.find(
      (l) => l.getClassName() === "Flatten")!;
    const before = flatten.inputSpec ? flatten.input : null;
    const shape = (flatten.input as tf.SymbolicTensor).shape;
    expect(shape.slice(1)).toEqual([2 * d, 2 * d, 64]);
    expect(model.outputs[0].shape.slice(1)).toEqual([16]);
  });

  it("rejects invalid block counts", () => {
    expect(() => buildModel({ blocksPerStage: 0 }, 4)).toThrow();
  });

  it("is deterministic for a fixed seed", async () => {
    const a = buildModel({ blocksPerStage: 1, seed: 9 }, 2);
    const b = buildModel({ blocksPerStage: 1, seed: 9 }, 2);
    const x = tf.randomUniform([3, 4, 4, 1], 0, 1, "float32", 5);
    const ya = await (a.predict(x) as tf.Tensor).data();
    const yb = await (b.predict(x) as tf.Tensor).data();
    expect(Array.from(ya)).toEqual(Array.from(yb));
  });

  it("trunk is exactly equivariant to horizontal torus shifts", async () => {
    const d = 3;
    const model = buildModel({ blocksPerStage: 1, seed: 4 }, d);
    const flatten = model.layers.find(
      (l) => l.getClassName() === "Flatten")!;
    const trunk = tf.model({
      inputs: model.inputs,
      outputs: flatten.input as tf.SymbolicTensor,
    });
    const x = tf.randomUniform([1, 2 * d, 2 * d, 1], 0, 1, "float32", 7)
      .round() as tf.Tensor4D;
    // shift by one hexagon column (2 cells) around the torus
    const shifted = tf.concat([
      tf.slice(x, [0, 0, 2 * d - 2, 0], [-1, -1, 2, -1]),
      tf.slice(x, [0, 0, 0, 0], [-1, -1, 2 * d - 2, -1]),
    ], 2) as tf.Tensor4D;
    const f = trunk.predict(x) as tf.Tensor4D;
    const fShifted = trunk.predict(shifted) as tf.Tensor4D;
    const fRolled = tf.concat([
      tf.slice(f, [0, 0, 2 * d - 2, 0], [-1, -1, 2, -1]),
      tf.slice(f, [0, 0, 0, 0], [-1, -1, 2 * d - 2, -1]),
    ], 2) as tf.Tensor4D;
    const diff = tf.max(tf.abs(tf.sub(fShifted, fRolled)));
    expect((await diff.data())[0]).toBeLessThan(1e-4);
  });

  it("exposes the convolution trunk in order", () => {
    const model = buildModel({ blocksPerStage: 2 }, 4);
    const convs = convLayers(model);
    // initial conv + 2 per block (3 stages x 2 blocks) + 2 transitions
    expect(convs.length).toBe(1 + 12 + 2);
  });
});
