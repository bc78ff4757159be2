import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";
import { describe, expect, it } from "vitest";
import { PeriodicPad, padGrid, padTensor } from "../src/padding";

interface GoldenCase {
  d: number;
  w: number;
  grid: number[][];
  padded: number[][];
}

const GOLDEN: GoldenCase[] = JSON.parse(fs.readFileSync(
  path.join(__dirname, "fixtures", "padding_golden.json"), "utf-8"));

describe("twisted periodic padding", () => {
  it("matches the simulator's golden tensors on plain arrays", () => {
    for (const c of GOLDEN) {
      expect(padGrid(c.grid, c.w)).toEqual(c.padded);
    }
  });

  it("matches the golden tensors through the tensor path", async () => {
    for (const c of GOLDEN.slice(0, 40)) {
      const size = 2 * c.d;
      const x = tf.tensor4d(
        c.grid.flat(), [1, size, size, 1], "float32");
      const padded = padTensor(x, c.w);
      const flat = await padded.data();
      const want = c.padded.flat();
      expect(Array.from(flat)).toEqual(want);
      x.dispose();
      padded.dispose();
    }
  });

  it("pads through the layer with the right output shape", async () => {
    const layer = new PeriodicPad({ w: 1 });
    const x = tf.tensor4d(
      GOLDEN[0].grid.flat(),
      [1, 2 * GOLDEN[0].d, 2 * GOLDEN[0].d, 1]);
    const y = layer.apply(x) as tf.Tensor4D;
    expect(y.shape).toEqual(
      [1, 2 * GOLDEN[0].d + 2, 2 * GOLDEN[0].d + 2, 1]);
    const direct = padTensor(x, 1);
    expect(Array.from(await y.data()))
      .toEqual(Array.from(await direct.data()));
  });

  it("pad(2) restricted to its inner band is pad(1)", () => {
    const grid = GOLDEN.find((c) => c.d === 4)!.grid;
    const p1 = padGrid(grid, 1);
    const p2 = padGrid(grid, 2);
    const inner = p2.slice(1, -1).map((row) => row.slice(1, -1));
    expect(inner).toEqual(p1);
    expect(padGrid(grid, 0)).toEqual(grid);
  });

  it("rejects non-square and negative pads", () => {
    expect(() => padGrid([[0, 1], [1, 0], [0, 0]], 1)).toThrow();
    expect(() => padGrid([[0, 1], [1, 0]], -1)).toThrow();
  });
});
