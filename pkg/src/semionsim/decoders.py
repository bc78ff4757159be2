"""Syndrome decoders and the 16-way logical classification.

The simple decoder drags every excitation to site 1 along shortest
paths; the MWPM decoder pairs excitations by exact minimum-weight
perfect matching on toroidal graph distances.  The logical class of the
net (error x recovery) frame is the quadruple of homology parities
against the four lattice cuts, encoded as a 4-bit label.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from semionsim import noise
from semionsim.lattice import CodeLattice, bits
from semionsim.matching import min_weight_perfect_matching
from semionsim.noise import (
    NoiseModel,
    PauliFrame,
    SyndromeSample,
    sample_error,
    sample_rng,
    sample_syndrome,
    kitaev_hex_syndrome,
    vertex_syndrome,
    z_plaquette_flips,
)

PAULI_NAMES = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}


class OddParityError(Exception):
    """Syndrome with an odd excitation count cannot be decoded."""


class UncorrectedSyndromeError(Exception):
    """Net frame after recovery is not a closed cycle."""


@dataclass
class Recovery:
    frame: PauliFrame


@dataclass(frozen=True)
class ClassLabel:
    """Homology parities (hX_H, hX_V, hZ_Hbar, hZ_Vbar) of the net frame."""

    hx_h: int
    hx_v: int
    hz_hbar: int
    hz_vbar: int

    @property
    def label(self) -> int:
        return (self.hx_h + 2 * self.hx_v + 4 * self.hz_hbar
                + 8 * self.hz_vbar)

    def pauli_names(self) -> tuple[str, str]:
        """(P1, P2) names under the logical-operator dictionary.

        The first logical qubit's X operator is the negative-chirality
        horizontal string, which wraps both an X-cycle and a Z-cycle, so
        its Z-wrap bit is folded out of hz_hbar.
        """
        a1, c1 = self.hx_h, self.hz_vbar
        a2, c2 = self.hx_v, self.hz_hbar ^ self.hx_h
        return PAULI_NAMES[(a1, c1)], PAULI_NAMES[(a2, c2)]


def _parity(mask: int) -> int:
    return mask.bit_count() & 1


def simple_decode(lat: CodeLattice, syndrome: SyndromeSample) -> Recovery:
    """Drag all excitations to vertex 1 / plaquette 1 by shortest paths."""
    if _parity(syndrome.vertex_bits) or _parity(syndrome.plaquette_bits):
        raise OddParityError("odd excitation count")
    rec_x = 0
    for v in bits(syndrome.vertex_bits):
        rec_x ^= lat.path_mask("primal", v, 0)
    rec_z = 0
    for p in bits(syndrome.plaquette_bits):
        rec_z ^= lat.path_mask("dual", p, 0)
    rec = Recovery(PauliFrame(rec_x, rec_z))
    _check_recovery(lat, syndrome, rec)
    return rec


def mwpm_decode(lat: CodeLattice, syndrome: SyndromeSample) -> Recovery:
    """Pair excitations by exact minimum-weight perfect matching."""
    if _parity(syndrome.vertex_bits) or _parity(syndrome.plaquette_bits):
        raise OddParityError("odd excitation count")
    rec_x = _match_and_join(lat, "primal", bits(syndrome.vertex_bits))
    rec_z = _match_and_join(lat, "dual", bits(syndrome.plaquette_bits))
    rec = Recovery(PauliFrame(rec_x, rec_z))
    _check_recovery(lat, syndrome, rec)
    return rec


def _match_and_join(lat: CodeLattice, kind: str, nodes: list[int]) -> int:
    if not nodes:
        return 0
    dist = lat.primal_dist if kind == "primal" else lat.dual_dist
    sub = dist[nodes][:, nodes].astype(np.int64)
    mask = 0
    for i, j in min_weight_perfect_matching(sub):
        mask ^= lat.path_mask(kind, nodes[i], nodes[j])
    return mask


def _check_recovery(lat: CodeLattice, syndrome: SyndromeSample,
                    rec: Recovery) -> None:
    if vertex_syndrome(lat, rec.frame.x_mask) != syndrome.vertex_bits:
        raise RuntimeError("recovery does not cancel the vertex syndrome")
    if z_plaquette_flips(lat, rec.frame.z_mask) != syndrome.plaquette_bits:
        raise RuntimeError("recovery does not cancel the plaquette syndrome")


def logical_class(lat: CodeLattice, error: PauliFrame, residual_zq: int,
                  recovery: Recovery) -> ClassLabel:
    """Homology class of the net frame (well-defined only for cycles)."""
    net_x = error.x_mask ^ recovery.frame.x_mask
    net_z = error.z_mask ^ residual_zq ^ recovery.frame.z_mask
    if vertex_syndrome(lat, net_x) != 0:
        raise UncorrectedSyndromeError("net X frame is not a cycle")
    if z_plaquette_flips(lat, net_z) != 0:
        raise UncorrectedSyndromeError("net Z frame is not a dual cycle")
    return ClassLabel(
        hx_h=_parity(net_x & lat.cut_dual_v_mask),
        hx_v=_parity(net_x & lat.cut_dual_h_mask),
        hz_hbar=_parity(net_z & lat.cut_primal_v_mask),
        hz_vbar=_parity(net_z & lat.cut_primal_h_mask),
    )


DECODERS = {"simple": simple_decode, "mwpm": mwpm_decode}


def decode_and_label(
    lat: CodeLattice,
    model: NoiseModel,
    master_seed: int,
    sample_index: int,
    decoder: str = "simple",
    code: str = "semion",
    sampler: noise.ClusterSampler | None = None,
) -> tuple[SyndromeSample, ClassLabel]:
    """One end-to-end record: sample, measure, decode, classify."""
    rng = sample_rng(master_seed, sample_index)
    frame = sample_error(model, lat, rng)
    if code == "semion":
        syndrome = sample_syndrome(lat, frame, rng, sampler,
                                   master_seed, sample_index)
    elif code == "ktc":
        syndrome = kitaev_hex_syndrome(lat, frame, master_seed, sample_index)
    else:
        raise ValueError(f"unknown code {code!r}")
    rec = DECODERS[decoder](lat, syndrome)
    label = logical_class(lat, frame, syndrome.residual_zq, rec)
    return syndrome, label
