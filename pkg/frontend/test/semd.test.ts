import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import { describe, expect, it } from "vitest";
import {
  BadMagicError,
  BadVersionError,
  HEADER_SIZE,
  LabelOutOfRangeError,
  SemdDataset,
  TruncatedFileError,
  parseHeader,
} from "../src/semd";

const FIXTURES = path.join(__dirname, "fixtures");
const GOLDEN = path.join(FIXTURES, "golden_d2.semd");
const EXPECTED = JSON.parse(
  fs.readFileSync(path.join(FIXTURES, "golden_d2.json"), "utf-8"));

function tmpFile(bytes: Buffer): string {
  const file = path.join(
    fs.mkdtempSync(path.join(os.tmpdir(), "semd-")), "data.semd");
  fs.writeFileSync(file, bytes);
  return file;
}

describe("SEMD reader", () => {
  it("parses the golden header", () => {
    const ds = new SemdDataset(GOLDEN);
    expect(ds.header.distance).toBe(EXPECTED.distance);
    expect(ds.header.noiseKind).toBe(EXPECTED.noiseKind);
    expect(ds.header.pEff).toBeCloseTo(EXPECTED.pEff, 12);
    expect(ds.count).toBe(EXPECTED.count);
    expect(ds.recordSize).toBe(4 * 2 * 2 + 1);
    ds.close();
  });

  it("reads every golden record bit-exactly", () => {
    const ds = new SemdDataset(GOLDEN);
    const { grids, labels } = ds.readRange(0, ds.count);
    for (let r = 0; r < ds.count; r++) {
      const want = EXPECTED.grids[r] as number[];
      for (let c = 0; c < ds.gridCells; c++) {
        expect(grids[r * ds.gridCells + c]).toBe(want[c]);
      }
      expect(labels[r]).toBe(EXPECTED.labels[r]);
    }
    ds.close();
  });

  it("rejects bad magic and version", () => {
    const raw = fs.readFileSync(GOLDEN);
    const magic = Buffer.from(raw);
    magic.write("NOPE", 0, "latin1");
    expect(() => new SemdDataset(tmpFile(magic))).toThrow(BadMagicError);
    const version = Buffer.from(raw);
    version.writeUInt8(9, 4);
    expect(() => new SemdDataset(tmpFile(version))).toThrow(BadVersionError);
    expect(() => parseHeader(raw.subarray(0, 10)))
      .toThrow(TruncatedFileError);
  });

  it("reports truncation with the byte offset", () => {
    const raw = fs.readFileSync(GOLDEN);
    const file = tmpFile(raw.subarray(0, raw.length - 5));
    try {
      new SemdDataset(file);
      expect.unreachable("should have thrown");
    } catch (err) {
      expect(err).toBeInstanceOf(TruncatedFileError);
      expect((err as TruncatedFileError).offset).toBe(raw.length - 5);
    }
  });

  it("rejects out-of-range labels and grid bytes", () => {
    const raw = Buffer.from(fs.readFileSync(GOLDEN));
    raw.writeUInt8(99, raw.length - 1); // last record's label
    const ds = new SemdDataset(tmpFile(raw));
    expect(() => ds.readRange(ds.count - 1, ds.count))
      .toThrow(LabelOutOfRangeError);
    ds.close();
    const raw2 = Buffer.from(fs.readFileSync(GOLDEN));
    raw2.writeUInt8(7, HEADER_SIZE); // first grid byte
    const ds2 = new SemdDataset(tmpFile(raw2));
    expect(() => ds2.readRange(0, 1)).toThrow(RangeError);
    ds2.close();
  });

  it("validates record ranges", () => {
    const ds = new SemdDataset(GOLDEN);
    expect(() => ds.readRange(-1, 2)).toThrow(RangeError);
    expect(() => ds.readRange(0, ds.count + 1)).toThrow(RangeError);
    ds.close();
  });
});
