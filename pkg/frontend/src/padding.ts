/**
 * Twisted periodic padding for syndrome images.
 *
 * The syndrome grid lives on a torus whose vertical identification
 * carries a d-column horizontal shift (successive hexagon rows are
 * offset half a cell); the horizontal identification is plain.  Rows
 * are stored bottom-to-top: row 0 is image row 1.
 */

import * as tf from "@tensorflow/tfjs";

function roll2d(rows: number[][], shift: number): number[][] {
  const n = rows[0].length;
  const s = ((shift % n) + n) % n;
  return rows.map((row) => row.map((_, j) => row[(j - s + n) % n]));
}

/** Reference implementation on plain arrays (matches the dataset side). */
export function padGrid(grid: number[][], w: number): number[][] {
  const size = grid.length;
  if (size % 2 !== 0 || grid.some((row) => row.length !== size)) {
    throw new Error("expected a square 2d x 2d grid");
  }
  if (w < 0) {
    throw new Error("pad width must be nonnegative");
  }
  const d = size / 2;
  const out: number[][] = [];
  for (let ii = 0; ii < size + 2 * w; ii++) {
    const bigI = ii - w;
    const wraps = Math.floor(bigI / size);
    const srcI = bigI - wraps * size;
    const shift = ((d * wraps) % size + size) % size;
    const row: number[] = [];
    for (let jj = 0; jj < size + 2 * w; jj++) {
      const bigJ = jj - w;
      const srcJ = (((bigJ - shift) % size) + size) % size;
      row.push(grid[srcI][srcJ]);
    }
    out.push(row);
  }
  return out;
}

function rollW(x: tf.Tensor4D, shift: number): tf.Tensor4D {
  const n = x.shape[2];
  const s = ((shift % n) + n) % n;
  if (s === 0) {
    return x;
  }
  const head = tf.slice(x, [0, 0, n - s, 0], [-1, -1, s, -1]);
  const tail = tf.slice(x, [0, 0, 0, 0], [-1, -1, n - s, -1]);
  return tf.concat([head, tail], 2) as tf.Tensor4D;
}

/** Pad an NHWC batch of 2d x 2d torus grids by w cells. */
export function padTensor(x: tf.Tensor4D, w: number): tf.Tensor4D {
  return tf.tidy(() => {
    const size = x.shape[1];
    if (x.shape[2] !== size || size % 2 !== 0) {
      throw new Error("expected square 2d x 2d feature maps");
    }
    const d = size / 2;
    if (w === 0) {
      return x.clone();
    }
    if (w > size) {
      throw new Error("pad width beyond one full wrap is not supported");
    }
    // rows below the grid wrap from the top rows, columns rolled -d;
    // rows above wrap from the bottom rows, columns rolled +d
    const below = rollW(
      tf.slice(x, [0, size - w, 0, 0], [-1, w, -1, -1]) as tf.Tensor4D, -d);
    const above = rollW(
      tf.slice(x, [0, 0, 0, 0], [-1, w, -1, -1]) as tf.Tensor4D, d);
    const rows = tf.concat([below, x, above], 1) as tf.Tensor4D;
    const left = tf.slice(rows, [0, 0, size - w, 0], [-1, -1, w, -1]);
    const right = tf.slice(rows, [0, 0, 0, 0], [-1, -1, w, -1]);
    return tf.concat([left, rows, right], 2) as tf.Tensor4D;
  });
}

export interface PeriodicPadArgs {
  w?: number;
  name?: string;
}

export class PeriodicPad extends tf.layers.Layer {
  static className = "PeriodicPad";
  private readonly w: number;

  constructor(args: PeriodicPadArgs = {}) {
    super({ name: args.name });
    this.w = args.w ?? 1;
  }

  override computeOutputShape(inputShape: tf.Shape): tf.Shape {
    const [batch, h, width, c] = inputShape as (number | null)[];
    return [batch, h == null ? null : h + 2 * this.w,
      width == null ? null : width + 2 * this.w, c];
  }

  override call(inputs: tf.Tensor | tf.Tensor[]): tf.Tensor {
    const x = (Array.isArray(inputs) ? inputs[0] : inputs) as tf.Tensor4D;
    return padTensor(x, this.w);
  }

  override getConfig(): tf.serialization.ConfigDict {
    return { ...super.getConfig(), w: this.w };
  }
}

tf.serialization.registerClass(PeriodicPad);
