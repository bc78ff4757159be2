"""Dense signed-permutation oracle.

Materializes operators over an explicit joint edge support as a
permutation array plus a Z4 exponent per basis state, then checks
operator identities (products, Hermiticity, squaring, commutators) by
brute force.  Used by the verification suite and the tests as an
independent cross-check of the structured algebra; joint supports up to
about 2^20 basis states stay cheap.
"""

from __future__ import annotations

import numpy as np

from semionsim.algebra import SignedPermutationOp


class DenseOp:
    """perm[j] = image basis state, exps[j] = Z4 exponent of the phase."""

    def __init__(self, support: list[int], perm: np.ndarray, exps: np.ndarray):
        self.support = support
        self.perm = perm
        self.exps = exps

    @classmethod
    def identity(cls, support: list[int]) -> "DenseOp":
        size = 1 << len(support)
        return cls(support, np.arange(size, dtype=np.int64),
                   np.zeros(size, dtype=np.int8))

    @classmethod
    def embed(cls, op: SignedPermutationOp, support: list[int]) -> "DenseOp":
        """Lift op onto a larger joint support (must contain op.support)."""
        op_pos = {e: k for k, e in enumerate(op.support)}
        if any(e not in support for e in op.support):
            raise ValueError("joint support must contain the op support")
        local = np.zeros(1 << len(support), dtype=np.int64)
        xmask = 0
        for i, e in enumerate(support):
            half = 1 << i
            k = op_pos.get(e)
            local[half:2 * half] = local[:half] + (0 if k is None else 1 << k)
            if k is not None and (op.x_mask >> k) & 1:
                xmask |= 1 << i
        size = 1 << len(support)
        perm = np.arange(size, dtype=np.int64) ^ xmask
        return cls(list(support), perm, op.phase.exps[local].copy())

    def then(self, other: "DenseOp") -> "DenseOp":
        """other applied after self (i.e. the operator product other*self)."""
        perm = other.perm[self.perm]
        exps = (self.exps + other.exps[self.perm]) % 4
        return DenseOp(self.support, perm, exps)

    def dagger(self) -> "DenseOp":
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(len(self.perm), dtype=np.int64)
        return DenseOp(self.support, inv, (-self.exps[inv]) % 4)

    def equals(self, other: "DenseOp") -> bool:
        return (np.array_equal(self.perm, other.perm)
                and np.array_equal(self.exps % 4, other.exps % 4))

    def is_identity(self) -> bool:
        return (np.array_equal(self.perm, np.arange(len(self.perm)))
                and not (self.exps % 4).any())


def joint_support(*ops: SignedPermutationOp) -> list[int]:
    edges = sorted({e for op in ops for e in op.support})
    return edges


def commute(a: SignedPermutationOp, b: SignedPermutationOp) -> bool:
    sup = joint_support(a, b)
    da = DenseOp.embed(a, sup)
    db = DenseOp.embed(b, sup)
    return da.then(db).equals(db.then(da))


def anticommute(a: SignedPermutationOp, b: SignedPermutationOp) -> bool:
    sup = joint_support(a, b)
    da = DenseOp.embed(a, sup)
    db = DenseOp.embed(b, sup)
    ab = da.then(db)
    ba = db.then(da)
    return (np.array_equal(ab.perm, ba.perm)
            and bool(((ab.exps - ba.exps) % 4 == 2).all()))


def is_hermitian(a: SignedPermutationOp) -> bool:
    sup = list(a.support)
    da = DenseOp.embed(a, sup)
    return da.equals(da.dagger())


def squares_to_identity(a: SignedPermutationOp) -> bool:
    da = DenseOp.embed(a, list(a.support))
    return da.then(da).is_identity()
