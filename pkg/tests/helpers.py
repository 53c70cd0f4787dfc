"""Deterministic corpora and constructions shared across test modules."""
from __future__ import annotations

import random

from gmpy2 import mpq

from tracepoly import (
    DenseMatrix,
    HermitianMatrix,
    random_gaussian_matrix,
    random_psd,
)

CORPUS_BASE_SEED = 1000


def corpus_pairs(count: int = 100, magnitude: int = 3):
    """The shared random hermitian PSD corpus: n cycles 2, 3, 4."""
    pairs = []
    for i in range(count):
        n = (2, 3, 4)[i % 3]
        s = CORPUS_BASE_SEED + i
        a = random_psd(n, 2 * s, magnitude)
        b = random_psd(n, 2 * s + 1, magnitude)
        pairs.append((i, n, a, b))
    return pairs


def random_invertible(n: int, seed: int, magnitude: int = 2) -> DenseMatrix:
    s = seed
    while True:
        g = random_gaussian_matrix(n, s, magnitude)
        if g.determinant():
            return g
        s += 7919


def embed_block(block: DenseMatrix, n: int, offset: int) -> DenseMatrix:
    """n-by-n matrix holding `block` at diagonal position `offset`."""
    entries = [[mpq(0)] * n for _ in range(n)]
    for i in range(block.n):
        for j in range(block.n):
            entries[offset + i][offset + j] = block.entry(i, j)
    return DenseMatrix(entries)


def zero_overlap_pair(n: int, r: int, seed: int, magnitude: int = 2):
    """PSD pair with AB = 0 exactly.

    Complementary-support diagonal blocks are pushed through the
    congruences A -> G A G*, B -> (G*)^-1 B G^-1, which preserve PSD
    and keep the product G (A0 B0) G^-1 = 0.
    """
    assert 0 < r < n

    def nonzero_psd(size: int, s: int) -> HermitianMatrix:
        # tiny Gram blocks can degenerate to zero; skip those seeds
        while True:
            m = random_psd(size, s, magnitude)
            if not m.is_zero():
                return m
            s += 7919

    a0 = embed_block(nonzero_psd(r, 3 * seed + 1), n, 0)
    b0 = embed_block(nonzero_psd(n - r, 3 * seed + 2), n, r)
    g = random_invertible(n, 3 * seed + 3, magnitude)
    gi = g.inverse()
    a = g @ a0 @ g.conj_transpose()
    b = gi.conj_transpose() @ b0 @ gi
    return HermitianMatrix.wrap(a), HermitianMatrix.wrap(b)


def diagonal_gap_pair(index: int, magnitude: int = 3):
    """Seeded diagonal-A pair with strictly decreasing positive diagonal."""
    rng = random.Random(5000 + index)
    n = (2, 3, 4)[index % 3]
    diag = sorted(rng.sample(range(1, 10), n), reverse=True)
    b = random_psd(n, 9000 + 2 * index + 1, magnitude)
    return tuple(mpq(d) for d in diag), b
