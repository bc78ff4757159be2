"""Noise models and syndrome sampling."""

import math

import numpy as np
import pytest

from semionsim import algebra, build_lattice, noise
from semionsim.lattice import bits, mask_of
from semionsim.noise import (
    ClusterSampler,
    NoiseModel,
    PauliFrame,
    kitaev_hex_syndrome,
    sample_error,
    sample_plaquette_syndrome,
    sample_rng,
    sample_syndrome,
    split_into_paths,
    vertex_syndrome,
    x_components,
    z_plaquette_flips,
)


def test_noise_model_derivations():
    m = NoiseModel.independent(p0=0.045)
    assert abs(m.p_eff - 0.087975) < 1e-15
    assert abs(m.p_x - (0.045 - 0.045 ** 2)) < 1e-15
    assert abs(m.p_z - m.p_x) < 1e-15
    assert abs(m.p_y - 0.045 ** 2) < 1e-15
    assert abs(m.p - m.p_eff) < 1e-15
    m2 = NoiseModel.independent(p_eff=0.09)
    assert abs(2 * m2.p0 - m2.p0 ** 2 - 0.09) < 1e-12
    d = NoiseModel.depolarizing(0.09)
    assert abs(d.p_x - 0.03) < 1e-15 and abs(d.p_y - 0.03) < 1e-15
    with pytest.raises(ValueError):
        NoiseModel.independent()
    with pytest.raises(ValueError):
        NoiseModel.independent(p0=0.1, p_eff=0.1)
    with pytest.raises(ValueError):
        NoiseModel.depolarizing(1.2)


def test_sample_error_zero_rate():
    lat = build_lattice(3)
    m = NoiseModel.depolarizing(0.0)
    for i in range(20):
        frame = sample_error(m, lat, sample_rng(1, i))
        assert frame.x_mask == 0 and frame.z_mask == 0


def test_sample_error_frequencies():
    lat = build_lattice(4)
    m = NoiseModel.depolarizing(0.09)
    n = 5000
    x_only = y = z_only = 0
    for i in range(n):
        frame = sample_error(m, lat, sample_rng(2, i))
        y += (frame.x_mask & frame.z_mask).bit_count()
        x_only += (frame.x_mask & ~frame.z_mask).bit_count()
        z_only += (frame.z_mask & ~frame.x_mask).bit_count()
    draws = n * lat.n_edges
    sigma = math.sqrt(0.03 * 0.97 / draws)
    for count in (x_only, y, z_only):
        assert abs(count / draws - 0.03) < 5 * sigma


def test_vertex_syndrome():
    lat = build_lattice(4)
    e = 7
    s = vertex_syndrome(lat, 1 << e)
    assert s == lat.edge_vertex_mask[e]
    assert s.bit_count() == 2
    assert vertex_syndrome(lat, PauliFrame(0, 1 << e).x_mask) == 0
    assert vertex_syndrome(lat, lat.hex_mask[3]) == 0


def test_z_plaquette_flips():
    lat = build_lattice(4)
    e = 11
    flips = z_plaquette_flips(lat, 1 << e)
    assert flips.bit_count() == 2
    for p in bits(flips):
        assert e in lat.plaq_hexagon[p]
    assert z_plaquette_flips(lat, lat.cut_dual_h_mask) == 0
    assert z_plaquette_flips(lat, lat.star_mask[9]) == 0


def test_empty_plaquette_syndrome():
    lat = build_lattice(4)
    flips, residual, fb, wr = sample_plaquette_syndrome(
        lat, 0, sample_rng(0, 0), ClusterSampler(lat))
    assert flips == 0 and residual == 0 and not fb and not wr


def test_single_flip_frequencies():
    """Sampled single-X pattern frequencies track the exact sectors."""
    lat = build_lattice(4)
    sampler = ClusterSampler(lat)
    e = 0  # orientation A
    surround = [int(p) for p in lat.edge_surround[e]]
    n = 20000
    none_count = 0
    for i in range(n):
        flips, residual, _, _ = sample_plaquette_syndrome(
            lat, 1 << e, sample_rng(3, i), sampler)
        assert z_plaquette_flips(lat, residual) == flips
        if flips == 0:
            none_count += 1
        else:
            assert all(p in surround for p in bits(flips))
    sigma = math.sqrt((9 / 16) * (7 / 16) / n)
    assert abs(none_count / n - 9 / 16) < 5 * sigma


def test_disjoint_clusters_sample_independently():
    lat = build_lattice(7)
    sampler = ClusterSampler(lat)
    e1, e2 = 0, 80
    assert not (set(algebra.connected_support(lat, [e1]))
                & set(algebra.connected_support(lat, [e2])))
    n = 4000
    joint = 0
    for i in range(n):
        flips, _, _, _ = sample_plaquette_syndrome(
            lat, (1 << e1) | (1 << e2), sample_rng(4, i), sampler)
        if flips == 0:
            joint += 1
    want = (9 / 16) ** 2
    sigma = math.sqrt(want * (1 - want) / n)
    assert abs(joint / n - want) < 5 * sigma


def test_sampled_syndrome_parity_and_determinism():
    lat = build_lattice(5)
    m = NoiseModel.independent(p_eff=0.1)
    sampler = ClusterSampler(lat)
    for i in range(400):
        rng = sample_rng(5, i)
        frame = sample_error(m, lat, rng)
        synd = sample_syndrome(lat, frame, rng, sampler, 5, i)
        assert synd.vertex_bits.bit_count() % 2 == 0
        assert synd.plaquette_bits.bit_count() % 2 == 0
    # replay with a fresh sampler gives identical samples
    fresh = ClusterSampler(lat)
    for i in (3, 77, 211):
        rng = sample_rng(5, i)
        frame = sample_error(m, lat, rng)
        a = sample_syndrome(lat, frame, rng, fresh, 5, i)
        rng2 = sample_rng(5, i)
        frame2 = sample_error(m, lat, rng2)
        b = sample_syndrome(lat, frame2, rng2, ClusterSampler(lat), 5, i)
        assert frame.x_mask == frame2.x_mask
        assert a == b


def test_pure_z_frame_is_deterministic():
    lat = build_lattice(4)
    frame = PauliFrame(0, mask_of([1, 9, 30]))
    a = sample_syndrome(lat, frame, sample_rng(6, 0), ClusterSampler(lat))
    assert a.vertex_bits == 0
    assert a.plaquette_bits == z_plaquette_flips(lat, frame.z_mask)
    assert a.residual_zq == 0


def test_x_components():
    lat = build_lattice(5)
    comps = x_components(lat, mask_of([0, 1, 40]))
    assert sorted(len(c) for c in comps) == [1, 2]
    assert x_components(lat, 0) == []


def test_split_into_paths_partitions():
    lat = build_lattice(7)
    rng = np.random.default_rng(8)
    for _ in range(20):
        e0 = int(rng.integers(lat.n_edges))
        cluster = {e0}
        while len(cluster) < 12:
            e = sorted(cluster)[int(rng.integers(len(cluster)))]
            v = int(lat.edge_endpoints[e][int(rng.integers(2))])
            cluster.add(int(lat.vertex_edges[v][int(rng.integers(3))]))
        comp = x_components(lat, mask_of(cluster))[0]
        pieces = split_into_paths(lat, comp, cap=12)
        seen = [e for piece in pieces for e in piece]
        assert sorted(seen) == sorted(comp)
        for piece in pieces:
            assert len(algebra.connected_support(lat, piece)) <= 12
            assert len(x_components(lat, mask_of(piece))) == 1


def test_fallback_flag_and_consistency():
    lat = build_lattice(7)
    sampler = ClusterSampler(lat, cap=8)
    # a straight 5-edge path exceeds the tiny cap
    path = [lat.slant_id(0, x) for x in range(5)]
    flips, residual, fb, _ = sample_plaquette_syndrome(
        lat, mask_of(path), sample_rng(9, 1), sampler)
    assert fb
    assert z_plaquette_flips(lat, residual) == flips


def test_kitaev_mode():
    lat = build_lattice(4)
    x_frame = PauliFrame(1 << 5, 0)
    k = kitaev_hex_syndrome(lat, x_frame)
    assert k.vertex_bits.bit_count() == 2
    assert k.plaquette_bits == 0 and k.residual_zq == 0
    z_frame = PauliFrame(0, 1 << 5)
    k2 = kitaev_hex_syndrome(lat, z_frame)
    assert k2.plaquette_bits.bit_count() == 2
    # same Q_v stabilizers as the semion code
    m = NoiseModel.depolarizing(0.1)
    for i in range(50):
        rng = sample_rng(10, i)
        frame = sample_error(m, lat, rng)
        assert (kitaev_hex_syndrome(lat, frame).vertex_bits
                == vertex_syndrome(lat, frame.x_mask))


def test_wrapped_component_flag_via_sampler():
    lat = build_lattice(4)
    sampler = ClusterSampler(lat)
    loop = list(lat.cut_primal_h)
    _, _, _, wrapped = sampler.sample(sorted(loop), sample_rng(11, 0))
    assert wrapped
