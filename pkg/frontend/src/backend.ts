/**
 * Backend selection: prefer the WASM backend (XNNPACK) and fall back
 * to the plain JS CPU backend when it is unavailable.
 */

import * as path from "path";
import * as tf from "@tensorflow/tfjs";

let ready: Promise<string> | null = null;

/**
 * The WASM backend ships no Conv2DBackprop kernels, so stride-1 VALID
 * convolution gradients are re-expressed as compositions of supported
 * forward ops (pad/reverse/transpose/conv2d).  This also happens to be
 * much faster than the naive JS backprop loops of the CPU backend.
 */
function registerCompositeConvGradient(): void {
  tf.unregisterGradient("Conv2D");
  tf.registerGradient({
    kernelName: "Conv2D",
    inputsToSave: ["x", "filter"],
    gradFunc: (dy, saved, attrs) => {
      const [x, filter] = saved as [tf.Tensor4D, tf.Tensor4D];
      const grad = dy as tf.Tensor4D;
      const { strides, pad, dataFormat, dilations } =
        attrs as unknown as {
          strides: number | [number, number];
          pad: string | number;
          dataFormat: string;
          dilations: number | [number, number];
        };
      const strideOk = strides === 1 ||
        (Array.isArray(strides) && strides[0] === 1 && strides[1] === 1);
      const dilationOk = dilations == null || dilations === 1 ||
        (Array.isArray(dilations) && dilations[0] === 1 &&
          dilations[1] === 1);
      if (!strideOk || !dilationOk || pad !== "valid" ||
        dataFormat !== "NHWC") {
        throw new Error(
          "composite conv gradient supports stride 1 VALID NHWC only");
      }
      const kh = filter.shape[0];
      const kw = filter.shape[1];
      return {
        x: () => tf.tidy(() => {
          const padded = tf.pad(grad, [
            [0, 0], [kh - 1, kh - 1], [kw - 1, kw - 1], [0, 0]]);
          const flipped = tf.transpose(
            tf.reverse(filter, [0, 1]), [0, 1, 3, 2]) as tf.Tensor4D;
          return tf.conv2d(padded as tf.Tensor4D, flipped, 1, "valid");
        }),
        filter: () => tf.tidy(() => {
          const xT = tf.transpose(x, [3, 1, 2, 0]) as tf.Tensor4D;
          const dyT = tf.transpose(grad, [1, 2, 0, 3]) as tf.Tensor4D;
          const out = tf.conv2d(xT, dyT, 1, "valid");
          return tf.transpose(out, [1, 2, 0, 3]);
        }),
      };
    },
  });
}

export function initBackend(): Promise<string> {
  if (!ready) {
    ready = (async () => {
      registerCompositeConvGradient();
      try {
        // eslint-disable-next-line @typescript-eslint/no-var-requires
        const wasm = require("@tensorflow/tfjs-backend-wasm");
        const dist = path.join(path.dirname(require.resolve(
          "@tensorflow/tfjs-backend-wasm/package.json")), "dist") + path.sep;
        wasm.setWasmPaths(dist);
        if (await tf.setBackend("wasm")) {
          return "wasm";
        }
      } catch {
        // fall through to the JS backend
      }
      await tf.setBackend("cpu");
      return "cpu";
    })();
  }
  return ready;
}
