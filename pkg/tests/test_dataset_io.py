"""Syndrome image layout, periodic padding, and the SEMD container."""

import csv

import numpy as np
import pytest

from semionsim import build_lattice
from semionsim.dataset_io import (
    HEADER_SIZE,
    BadMagic,
    BadVersion,
    DatasetHeader,
    LabelOutOfRange,
    TruncatedFile,
    export_csv,
    image_to_syndrome,
    periodic_pad,
    plaquette_cell,
    read_dataset,
    syndrome_bits,
    syndrome_to_image,
    vertex_cell,
    write_dataset,
)

# published d=4 mapping with one ring of periodic padding, top row first
PUBLISHED_PADDED_D4 = [
    "v4 v5 v6 v7 v8 v1 v2 v3 v4 v5",
    "p14 x p15 x p16 x p13 x p14 x",
    "v29 v30 v31 v32 v25 v26 v27 v28 v29 v30",
    "x p11 x p12 x p9 x p10 x p11",
    "v22 v23 v24 v17 v18 v19 v20 v21 v22 v23",
    "p7 x p8 x p5 x p6 x p7 x",
    "v15 v16 v9 v10 v11 v12 v13 v14 v15 v16",
    "x p4 x p1 x p2 x p3 x p4",
    "v8 v1 v2 v3 v4 v5 v6 v7 v8 v1",
    "p16 x p13 x p14 x p15 x p16 x",
]


def id_image(d):
    grid = np.zeros((2 * d, 2 * d), dtype=np.int32)
    for v in range(1, 2 * d * d + 1):
        i, j = vertex_cell(d, v)
        grid[i - 1, j - 1] = 1000 + v
    for p in range(1, d * d + 1):
        i, j = plaquette_cell(d, p)
        grid[i - 1, j - 1] = 2000 + p
    return grid


def cell_name(x):
    if x == 0:
        return "x"
    return f"v{x - 1000}" if x < 2000 else f"p{x - 2000}"


def test_specific_cells():
    assert vertex_cell(4, 1) == (1, 1)
    assert vertex_cell(4, 9) == (3, 2)
    assert plaquette_cell(4, 1) == (2, 3)
    assert plaquette_cell(4, 5) == (4, 4)


def test_d4_padded_table_matches_published_mapping():
    padded = periodic_pad(id_image(4), 1)
    for r, row in enumerate(PUBLISHED_PADDED_D4):
        got = [cell_name(padded[9 - r, c]) for c in range(10)]
        assert got == row.split(), f"padded row {r} mismatch"


@pytest.mark.parametrize("d", list(range(2, 14)))
def test_mapping_injective_with_filler_complement(d):
    grid = id_image(d)
    assert (grid == 0).sum() == d * d
    nonzero = grid[grid != 0]
    assert len(np.unique(nonzero)) == 3 * d * d


def test_image_roundtrip():
    lat = build_lattice(4)
    rng = np.random.default_rng(2)
    for _ in range(30):
        vbits = int(rng.integers(0, 1 << 32))
        pbits = int(rng.integers(0, 1 << 16))
        img = syndrome_to_image(4, vbits, pbits)
        assert img.shape == (8, 8)
        assert image_to_syndrome(4, img) == (vbits, pbits)
    assert not syndrome_to_image(4, 0, 0).any()
    flat = syndrome_bits(lat, 0b101, 0b11)
    assert flat[:3].tolist() == [1, 0, 1]
    assert flat[32:34].tolist() == [1, 1]
    assert flat.size == 48


def test_image_to_syndrome_rejects_bad_filler():
    img = syndrome_to_image(4, 0, 0)
    # cell (2,2) is a filler for d=4 (row 2 holds plaquettes on odd columns)
    img[1, 1] = 1
    with pytest.raises(ValueError, match="filler"):
        image_to_syndrome(4, img)


def test_periodic_pad_properties():
    rng = np.random.default_rng(5)
    for d in (2, 3, 4, 5):
        grid = rng.integers(0, 2, size=(2 * d, 2 * d)).astype(np.uint8)
        assert np.array_equal(periodic_pad(grid, 0), grid)
        p1 = periodic_pad(grid, 1)
        p2 = periodic_pad(grid, 2)
        # pad-then-crop consistency: the inner band of pad(2) is pad(1)
        assert np.array_equal(p2[1:-1, 1:-1], p1)
        # interior is the grid itself
        assert np.array_equal(p1[1:-1, 1:-1], grid)
        # horizontal wrap is plain
        assert np.array_equal(p1[1:-1, 0], grid[:, -1])
        assert np.array_equal(p1[1:-1, -1], grid[:, 0])
        # vertical wrap carries the d-column twist
        assert np.array_equal(p1[0, 1:-1], np.roll(grid[-1], -d))
        assert np.array_equal(p1[-1, 1:-1], np.roll(grid[0], d))
    with pytest.raises(ValueError):
        periodic_pad(np.zeros((4, 4), dtype=np.uint8), -1)
    with pytest.raises(ValueError):
        periodic_pad(np.zeros((3, 4), dtype=np.uint8), 1)


def test_semd_roundtrip(tmp_path):
    d = 4
    rng = np.random.default_rng(3)
    grids = rng.integers(0, 2, size=(500, 2 * d, 2 * d)).astype(np.uint8)
    labels = rng.integers(0, 16, size=500)
    path = tmp_path / "data.semd"
    header = write_dataset(
        path, DatasetHeader(d, 0, 0.09), zip(grids, labels.tolist()))
    assert header.count == 500
    assert path.stat().st_size == HEADER_SIZE + 500 * (4 * d * d + 1)
    back, records = read_dataset(path)
    assert back == DatasetHeader(d, 0, 0.09, 500)
    assert np.array_equal(
        np.asarray(records[:, :-1]).reshape(500, 2 * d, 2 * d), grids)
    assert np.array_equal(np.asarray(records[:, -1]), labels)


def test_semd_empty_and_sizes(tmp_path):
    path = tmp_path / "empty.semd"
    header = write_dataset(path, DatasetHeader(4, 1, 0.05), iter(()))
    assert header.count == 0
    assert path.stat().st_size == HEADER_SIZE  # 23-byte header
    back, records = read_dataset(path)
    assert back.count == 0 and len(records) == 0
    # two d=4 records: 23 + 2 * 65 bytes
    path2 = tmp_path / "two.semd"
    grid = np.zeros((8, 8), dtype=np.uint8)
    write_dataset(path2, DatasetHeader(4, 0, 0.01), [(grid, 0), (grid, 15)])
    assert path2.stat().st_size == 23 + 2 * 65


def test_semd_errors(tmp_path):
    d = 4
    path = tmp_path / "data.semd"
    grid = np.zeros((8, 8), dtype=np.uint8)
    write_dataset(path, DatasetHeader(d, 0, 0.09), [(grid, 3)] * 4)
    raw = path.read_bytes()

    bad = tmp_path / "magic.semd"
    bad.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(BadMagic):
        read_dataset(bad)

    vers = tmp_path / "vers.semd"
    vers.write_bytes(raw[:4] + bytes([7]) + raw[5:])
    with pytest.raises(BadVersion):
        read_dataset(vers)

    trunc = tmp_path / "trunc.semd"
    trunc.write_bytes(raw[:-10])
    with pytest.raises(TruncatedFile) as info:
        read_dataset(trunc)
    assert info.value.offset == len(raw) - 10

    label = tmp_path / "label.semd"
    mutated = bytearray(raw)
    mutated[-1] = 99
    label.write_bytes(bytes(mutated))
    with pytest.raises(LabelOutOfRange):
        read_dataset(label)

    with pytest.raises(LabelOutOfRange):
        write_dataset(tmp_path / "w.semd", DatasetHeader(d, 0, 0.09),
                      [(grid, 16)])
    with pytest.raises(ValueError):
        write_dataset(tmp_path / "w2.semd", DatasetHeader(d, 0, 0.09),
                      [(np.zeros((4, 4), dtype=np.uint8), 0)])


def test_export_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    grids = rng.integers(0, 2, size=(50, 4, 4)).astype(np.uint8)
    labels = rng.integers(0, 16, size=50)
    path = tmp_path / "out.csv"
    n = export_csv(zip(grids, labels.tolist()), path)
    assert n == 50
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0][-1] == "label"
    assert len(rows) == 51
    for row, grid, label in zip(rows[1:], grids, labels):
        assert [int(v) for v in row[:-1]] == grid.reshape(-1).tolist()
        assert int(row[-1]) == label
        assert int(row[-1]) < 16
    empty = tmp_path / "empty.csv"
    assert export_csv(iter(()), empty) == 0
    assert open(empty).read().strip() == "label"
