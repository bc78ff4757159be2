/**
 * SEMD dataset reader.
 *
 * Layout: 23-byte little-endian header ("SEMD", version u8, distance u8,
 * noise kind u8, p_eff f64, record count u64) followed by fixed-size
 * records of 4d^2 grid bytes (rows bottom-to-top, columns left-to-right)
 * plus one label byte in [0, 16).
 */

import * as fs from "fs";

export const MAGIC = "SEMD";
export const VERSION = 1;
export const HEADER_SIZE = 23;

export class BadMagicError extends Error {}
export class BadVersionError extends Error {}
export class TruncatedFileError extends Error {
  constructor(public readonly offset: number, message: string) {
    super(`${message} (file truncated at byte ${offset})`);
  }
}
export class LabelOutOfRangeError extends Error {}

export interface SemdHeader {
  distance: number;
  noiseKind: number;
  pEff: number;
  count: number;
}

export function parseHeader(buf: Buffer): SemdHeader {
  if (buf.length < HEADER_SIZE) {
    throw new TruncatedFileError(buf.length, "header incomplete");
  }
  if (buf.toString("latin1", 0, 4) !== MAGIC) {
    throw new BadMagicError(`bad magic ${buf.toString("latin1", 0, 4)}`);
  }
  const version = buf.readUInt8(4);
  if (version !== VERSION) {
    throw new BadVersionError(`unsupported version ${version}`);
  }
  const count = buf.readBigUInt64LE(15);
  if (count > BigInt(Number.MAX_SAFE_INTEGER)) {
    throw new RangeError("record count too large");
  }
  return {
    distance: buf.readUInt8(5),
    noiseKind: buf.readUInt8(6),
    pEff: buf.readDoubleLE(7),
    count: Number(count),
  };
}

/** Random-access SEMD file; records are read on demand. */
export class SemdDataset {
  readonly header: SemdHeader;
  readonly gridCells: number;
  readonly recordSize: number;
  readonly imageSize: number;
  private readonly fd: number;

  constructor(readonly path: string) {
    this.fd = fs.openSync(path, "r");
    const head = Buffer.alloc(HEADER_SIZE);
    const got = fs.readSync(this.fd, head, 0, HEADER_SIZE, 0);
    this.header = parseHeader(head.subarray(0, got));
    const d = this.header.distance;
    this.gridCells = 4 * d * d;
    this.imageSize = 2 * d;
    this.recordSize = this.gridCells + 1;
    const size = fs.fstatSync(this.fd).size;
    const expected = HEADER_SIZE + this.header.count * this.recordSize;
    if (size !== expected) {
      throw new TruncatedFileError(size, `expected ${expected} bytes`);
    }
  }

  get count(): number {
    return this.header.count;
  }

  /** Read records [start, stop) into flat grids plus labels. */
  readRange(start: number, stop: number): { grids: Float32Array; labels: Int32Array } {
    if (start < 0 || stop > this.count || stop < start) {
      throw new RangeError(`record range [${start}, ${stop}) out of bounds`);
    }
    const n = stop - start;
    const raw = Buffer.alloc(n * this.recordSize);
    fs.readSync(this.fd, raw, 0, raw.length,
    HEADER_SIZE + start * this.recordSize);
    const grids = new Float32Array(n * this.gridCells);
    const labels = new Int32Array(n);
    for (let r = 0; r < n; r++) {
      const base = r * this.recordSize;
      for (let c = 0; c < this.gridCells; c++) {
        const value = raw[base + c];
        if (value > 1) {
          throw new RangeError(`grid byte ${value} at record ${start + r}`);
        }
        grids[r * this.gridCells + c] = value;
      }
      const label = raw[base + this.gridCells];
      if (label > 15) {
        throw new LabelOutOfRangeError(
          `label ${label} at record ${start + r}`);
      }
      labels[r] = label;
    }
    return { grids, labels };
  }

  close(): void {
    fs.closeSync(this.fd);
  }
}
