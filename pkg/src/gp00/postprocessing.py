"""Information reconciliation and privacy amplification with exact leak counts.

Reconciliation is an interactive block-parity binary search (cascade style):
doubling block sizes, shuffled passes after the first, and back-correction
of earlier blocks whenever a bit is flipped.  Every parity disclosed is
counted and, when a channel callback is given, logged for the transcript.
Privacy amplification compresses with a seeded binary Toeplitz hash.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .numerics import binary_entropy

INITIAL_BLOCK_FACTOR = 0.73  # initial block size ~ 0.73/eps_hat
CONFIRM_ROUNDS = 12  # residual-error escape probability 2^-12
DIGEST_BITS = 64


class KeyExhaustedError(RuntimeError):
    """Privacy amplification has no positive output length left."""


@dataclass(frozen=True)
class ReconciliationReport:
    corrected: bool
    parity_bits_leaked: int
    passes: int


@dataclass(frozen=True)
class AmplificationParams:
    """Compression bookkeeping: output k = floor(n*(1-2h(eps))) - leaked - margin.

    ``leaked`` is the disclosure to charge against the rate term on top of
    what 1-2h(eps) already budgets; the output length is clamped to [0, n].
    """

    input_length: int
    leaked: int
    eps_hat: float
    safety_margin: int = 32

    def __post_init__(self) -> None:
        if self.input_length < 1:
            raise ValueError(f"input_length must be >= 1, got {self.input_length}")
        if self.leaked < 0:
            raise ValueError(f"leaked must be >= 0, got {self.leaked}")
        if not 0.0 <= self.eps_hat <= 0.5:
            raise ValueError(f"eps_hat must be in [0, 0.5], got {self.eps_hat}")

    @property
    def output_length(self) -> int:
        rate_bits = math.floor(self.input_length * (1.0 - 2.0 * binary_entropy(self.eps_hat)))
        k = rate_bits - self.leaked - self.safety_margin
        return max(0, min(self.input_length, k))


def _as_bits(key) -> np.ndarray:
    bits = np.asarray(key, dtype=np.uint8)
    if bits.ndim != 1:
        raise ValueError("key must be a 1-D bit array")
    if ((bits != 0) & (bits != 1)).any():
        raise ValueError("key must contain only bits")
    return bits


def initial_block_size(n: int, eps_hat: float) -> int:
    if eps_hat <= 0.0:
        return n
    return max(2, min(n, math.ceil(INITIAL_BLOCK_FACTOR / eps_hat)))


def reconcile(
    key_a,
    key_b,
    eps_hat: float,
    rng: np.random.Generator,
    channel: Callable[[dict], None] | None = None,
    max_passes: int = 16,
) -> tuple[np.ndarray, ReconciliationReport]:
    """Correct key_b toward key_a, disclosing block parities interactively.

    Block passes use doubling sizes starting near 0.73/eps_hat; the first
    pass is in natural order, later ones shuffled with ``rng`` (standing in
    for a jointly announced permutation seed).  A parity mismatch triggers a
    binary search costing ceil(log2(block)) extra parities, and each
    corrected bit re-checks the blocks of earlier passes that contain it.
    Once a pass finds nothing, a confirmation stage discloses parities of
    uniformly random subsets: any residual error trips each round with
    probability 1/2, so after CONFIRM_ROUNDS clean rounds the escape
    probability is 2^-CONFIRM_ROUNDS.  Residual mismatches beyond that are
    left to the verification digest, never silent.

    Returns the corrected copy of key_b and a report whose
    ``parity_bits_leaked`` counts every disclosed parity.
    """
    a = _as_bits(key_a)
    b = _as_bits(key_b).copy()
    if a.shape != b.shape:
        raise ValueError(f"key length mismatch: {a.shape} vs {b.shape}")
    n = a.size
    leak = 0
    block_size = initial_block_size(n, eps_hat)

    # blocks from every completed pass, for back-correction
    history: list[list[np.ndarray]] = []
    membership: list[np.ndarray] = []  # per pass: bit index -> block number

    def parity(key: np.ndarray, idx: np.ndarray) -> int:
        return int(np.bitwise_xor.reduce(key[idx])) if idx.size else 0

    def binary_search(idx: np.ndarray, log: list[int]) -> int:
        nonlocal leak
        while idx.size > 1:
            left = idx[: idx.size // 2]
            p_left = parity(a, left)
            leak += 1
            log.append(p_left)
            idx = left if p_left != parity(b, left) else idx[idx.size // 2 :]
        return int(idx[0])

    def cascade_fix(flip: int, exclude: int, search_log: list[int]) -> int:
        """Flip a located bit, then chase parity breaks through past blocks."""
        b[flip] ^= 1
        fixed = 1
        queue = [
            (pi, int(membership[pi][flip]))
            for pi in range(len(history))
            if pi != exclude
        ]
        while queue:
            pi, bi = queue.pop()
            blk = history[pi][bi]
            if parity(a, blk) == parity(b, blk):
                continue  # already fixed by an earlier cascade correction
            inner = binary_search(blk, search_log)
            b[inner] ^= 1
            fixed += 1
            for other in range(len(history)):
                if other == pi:
                    continue
                queue.append((other, int(membership[other][inner])))
        return fixed

    passes = 0
    while passes < max_passes:
        size = min(n, block_size * (1 << passes))
        order = np.arange(n) if passes == 0 else rng.permutation(n)
        blocks = [order[s : s + size] for s in range(0, n, size)]
        member = np.empty(n, dtype=np.int64)
        for bi, blk in enumerate(blocks):
            member[blk] = bi
        history.append(blocks)
        membership.append(member)
        passes += 1

        block_parities: list[int] = []
        search_parities: list[int] = []
        mismatched = []
        for bi, blk in enumerate(blocks):
            p = parity(a, blk)
            leak += 1
            block_parities.append(p)
            if p != parity(b, blk):
                mismatched.append((passes - 1, bi))

        corrections = 0
        for pi, bi in mismatched:
            blk = history[pi][bi]
            if parity(a, blk) == parity(b, blk):
                continue
            flip = binary_search(blk, search_parities)
            corrections += cascade_fix(flip, pi, search_parities)

        if channel is not None:
            channel(
                {
                    "stage": "block",
                    "pass": passes,
                    "block_size": int(size),
                    "block_parities": block_parities,
                    "search_parities": search_parities,
                }
            )
        if corrections == 0 and passes >= 2:
            break

    # confirmation: random-subset parities until CONFIRM_ROUNDS in a row agree
    confirm_parities: list[int] = []
    confirm_searches: list[int] = []
    clean = 0
    while clean < CONFIRM_ROUNDS:
        subset = np.flatnonzero(rng.integers(0, 2, n, dtype=np.uint8))
        if subset.size == 0:
            continue
        p = parity(a, subset)
        leak += 1
        confirm_parities.append(p)
        if p != parity(b, subset):
            flip = binary_search(subset, confirm_searches)
            cascade_fix(flip, -1, confirm_searches)
            clean = 0
        else:
            clean += 1
    if channel is not None:
        channel(
            {
                "stage": "confirm",
                "block_parities": confirm_parities,
                "search_parities": confirm_searches,
            }
        )

    corrected = bool(np.array_equal(a, b))
    return b, ReconciliationReport(corrected=corrected, parity_bits_leaked=leak, passes=passes)


def _toeplitz_hash(bits: np.ndarray, rng: np.random.Generator, out_len: int) -> np.ndarray:
    """out = T @ bits mod 2 for a Toeplitz T drawn from rng, via convolution."""
    diagonals = rng.integers(0, 2, size=bits.size + out_len - 1, dtype=np.int64)
    return (np.convolve(bits.astype(np.int64), diagonals, mode="valid") % 2).astype(np.uint8)


def universal_digest(key, seed: int, bits: int = DIGEST_BITS) -> int:
    """Seeded Toeplitz digest of the key, as an integer of ``bits`` bits."""
    arr = _as_bits(key)
    digest_bits = _toeplitz_hash(arr, np.random.default_rng(seed), bits)
    value = 0
    for bit in digest_bits.tolist():
        value = (value << 1) | bit
    return value


def verify(key_a, key_b, seed: int) -> bool:
    """Compare seeded universal-hash digests; collision probability ~ 2^-64."""
    return universal_digest(key_a, seed) == universal_digest(key_b, seed)


def privacy_amplify(key, params: AmplificationParams, seed: int) -> np.ndarray:
    """Compress the reconciled key to params.output_length bits via Toeplitz hashing.

    Identical seeds and inputs give identical outputs on both sides; raises
    KeyExhaustedError when no positive output length remains.
    """
    arr = _as_bits(key)
    if arr.size != params.input_length:
        raise ValueError(f"key length {arr.size} != params.input_length {params.input_length}")
    k = params.output_length
    if k < 1:
        raise KeyExhaustedError(
            "no extractable key: the rate term does not cover leak and margin"
        )
    return _toeplitz_hash(arr, np.random.default_rng(seed), k)
