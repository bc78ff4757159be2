"""Syndrome image layout and the SEMD dataset file format.

A distance-d syndrome (2d^2 vertex bits + d^2 plaquette bits) maps onto
a 2d x 2d image: vertices on odd rows, plaquettes on even rows, and d^2
structural filler cells that are always zero.  Row 1 is the bottom row.

Because successive hexagon rows are offset half a cell, the torus'
vertical identification carries a d-column horizontal shift; periodic
padding reproduces exactly that twisted wrap (the horizontal wrap is
plain).

The SEMD container stores one row-major uint8 grid plus a label byte
per record after a fixed little-endian header; it is the cross-language
contract consumed by the convolutional trainer.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

from semionsim.lattice import CodeLattice

MAGIC = b"SEMD"
VERSION = 1
HEADER_FORMAT = "<4sBBB d Q".replace(" ", "")
HEADER_SIZE = struct.calcsize(HEADER_FORMAT)  # 23 bytes
NOISE_KINDS = {"independent": 0, "depolarizing": 1}
NOISE_NAMES = {v: k for k, v in NOISE_KINDS.items()}


class BadMagic(Exception):
    pass


class BadVersion(Exception):
    pass


class TruncatedFile(Exception):
    def __init__(self, offset: int, message: str):
        super().__init__(f"{message} (file truncated at byte {offset})")
        self.offset = offset


class LabelOutOfRange(Exception):
    pass


@dataclass(frozen=True)
class DatasetHeader:
    distance: int
    noise_kind: int  # 0 = independent, 1 = depolarizing
    p_eff: float
    count: int = 0

    @property
    def record_size(self) -> int:
        return 4 * self.distance * self.distance + 1


def vertex_cell(d: int, v: int) -> tuple[int, int]:
    """Image cell (i, j), 1-based, of vertex v (1-based)."""
    row = (v - 1) // (2 * d)
    i = 2 * row + 1
    j = (v - 1 + (1 - 2 * d) * row) % (2 * d) + 1
    return i, j


def plaquette_cell(d: int, p: int) -> tuple[int, int]:
    """Image cell (i, j), 1-based, of plaquette p (1-based)."""
    row = (p - 1) // d
    i = 2 * row + 2
    j = (2 * p + (1 - 4 * d) * row) % (2 * d) + 1
    return i, j


def syndrome_to_image(d: int, vertex_bits: int, plaquette_bits: int
                      ) -> np.ndarray:
    """(2d, 2d) uint8 grid; grid[i-1, j-1] is image element (i, j)."""
    grid = np.zeros((2 * d, 2 * d), dtype=np.uint8)
    for v in range(1, 2 * d * d + 1):
        if (vertex_bits >> (v - 1)) & 1:
            i, j = vertex_cell(d, v)
            grid[i - 1, j - 1] = 1
    for p in range(1, d * d + 1):
        if (plaquette_bits >> (p - 1)) & 1:
            i, j = plaquette_cell(d, p)
            grid[i - 1, j - 1] = 1
    return grid


def image_to_syndrome(d: int, grid: np.ndarray) -> tuple[int, int]:
    """Invert the placement; filler cells must be zero."""
    if grid.shape != (2 * d, 2 * d):
        raise ValueError(f"grid shape {grid.shape} != {(2 * d, 2 * d)}")
    vertex_bits = 0
    plaquette_bits = 0
    used = np.zeros_like(grid, dtype=bool)
    for v in range(1, 2 * d * d + 1):
        i, j = vertex_cell(d, v)
        used[i - 1, j - 1] = True
        if grid[i - 1, j - 1]:
            vertex_bits |= 1 << (v - 1)
    for p in range(1, d * d + 1):
        i, j = plaquette_cell(d, p)
        used[i - 1, j - 1] = True
        if grid[i - 1, j - 1]:
            plaquette_bits |= 1 << (p - 1)
    if grid[~used].any():
        raise ValueError("nonzero filler cell in syndrome image")
    return vertex_bits, plaquette_bits


def syndrome_bits(lat: CodeLattice, vertex_bits: int, plaquette_bits: int
                  ) -> np.ndarray:
    """Flat {0,1} vector of all 3d^2 stabilizers: vertices then plaquettes."""
    out = np.zeros(3 * lat.d * lat.d, dtype=np.uint8)
    for v in range(lat.n_vertices):
        out[v] = (vertex_bits >> v) & 1
    for p in range(lat.n_plaquettes):
        out[lat.n_vertices + p] = (plaquette_bits >> p) & 1
    return out


def periodic_pad(grid: np.ndarray, w: int) -> np.ndarray:
    """Pad a 2d x 2d torus grid by w cells of twisted periodic wrap.

    padded[I, J] = grid[mod(I-1, 2d)+1, mod(J-1 - d*floor((I-1)/2d), 2d)+1]
    in 1-based coordinates: vertical wrap shifts columns by d per turn,
    horizontal wrap is plain.
    """
    if w < 0:
        raise ValueError("pad width must be nonnegative")
    size = grid.shape[0]
    if grid.shape != (size, size) or size % 2:
        raise ValueError("expected a square 2d x 2d grid")
    d = size // 2
    if w == 0:
        return grid.copy()
    out = np.empty((size + 2 * w, size + 2 * w), dtype=grid.dtype)
    cols = np.arange(-w, size + w)
    for ii in range(size + 2 * w):
        big_i = ii - w  # 0-based unpadded row index
        wraps = big_i // size
        src_i = big_i - wraps * size
        shift = (d * wraps) % size
        out[ii] = grid[src_i, (cols - shift) % size]
    return out


# -- SEMD container -----------------------------------------------------------


def pack_header(header: DatasetHeader) -> bytes:
    return struct.pack(HEADER_FORMAT, MAGIC, VERSION, header.distance,
                       header.noise_kind, header.p_eff, header.count)


def write_dataset(path, header: DatasetHeader, records) -> DatasetHeader:
    """Write records of (grid, label); returns the header with the count.

    The grid may be a (2d, 2d) array or an already-flattened 4d^2 byte
    vector; rows are stored bottom-to-top, columns left-to-right.
    """
    n_cells = 4 * header.distance * header.distance
    count = 0
    with open(path, "wb") as fh:
        fh.write(pack_header(header))
        for grid, label in records:
            arr = np.asarray(grid, dtype=np.uint8).reshape(-1)
            if arr.size != n_cells:
                raise ValueError(
                    f"grid has {arr.size} cells, expected {n_cells}")
            if arr.max(initial=0) > 1:
                raise ValueError("grid cells must be 0 or 1")
            if not 0 <= int(label) < 16:
                raise LabelOutOfRange(f"label {label} out of range")
            fh.write(arr.tobytes())
            fh.write(bytes([int(label)]))
            count += 1
        final = DatasetHeader(header.distance, header.noise_kind,
                              header.p_eff, count)
        fh.seek(0)
        fh.write(pack_header(final))
    return final


def read_dataset(path) -> tuple[DatasetHeader, np.ndarray]:
    """Validate and memory-map a dataset: (header, (count, 4d^2+1) bytes).

    records[:, :-1] are the grid cells (row-major), records[:, -1] the
    labels.
    """
    with open(path, "rb") as fh:
        raw = fh.read(HEADER_SIZE)
    if len(raw) < HEADER_SIZE:
        raise TruncatedFile(len(raw), "header incomplete")
    magic, version, distance, noise_kind, p_eff, count = struct.unpack(
        HEADER_FORMAT, raw)
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    if version != VERSION:
        raise BadVersion(f"unsupported version {version}")
    header = DatasetHeader(distance, noise_kind, p_eff, count)
    import os
    size = os.path.getsize(path)
    expected = HEADER_SIZE + count * header.record_size
    if size != expected:
        raise TruncatedFile(size, f"expected {expected} bytes")
    if count == 0:
        records = np.empty((0, header.record_size), dtype=np.uint8)
    else:
        records = np.memmap(path, dtype=np.uint8, mode="r",
                            offset=HEADER_SIZE,
                            shape=(count, header.record_size))
        labels = records[:, -1]
        if int(labels.max(initial=0)) > 15:
            raise LabelOutOfRange("label byte > 15 in dataset")
        if int(records[:, :-1].max(initial=0)) > 1:
            raise ValueError("grid byte > 1 in dataset")
    return header, records


def export_csv(records, path) -> int:
    """One row per record: flattened grid cells then the label."""
    n = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        first = True
        for grid, label in records:
            arr = np.asarray(grid, dtype=np.uint8).reshape(-1)
            if first:
                writer.writerow(
                    [f"c{k}" for k in range(arr.size)] + ["label"])
                first = False
            writer.writerow(arr.tolist() + [int(label)])
            n += 1
        if first:
            writer.writerow(["label"])
    return n
