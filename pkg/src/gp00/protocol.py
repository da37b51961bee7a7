"""Executable key-exchange session: Alice, Bob, a lossless quantum channel
with an adversary hook, and an authenticated classical channel with a full
transcript.

One session: Alice prepares ~4n states (random basis, value from her
continuous or staircase distribution), each state passes through the
adversary, Bob measures in a random basis, bases are announced and sifted,
Alice announces positions and lattice phases for n check + n key bits, check
bits are compared, and on a tolerable error rate reconciliation,
verification and privacy amplification produce the final key.  Everything
is deterministic given (config, adversary, seed).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import postprocessing, states
from .encoding import EncodingParams, decode, encode, phi
from .numerics import binary_entropy
from .states import Basis, SqueezedStateSpec, measure, prepare

TRANSCRIPT_SCHEMA_VERSION = 1

# classical message tags
BASIS_LIST_ALICE = "BasisListAlice"
BASIS_LIST_BOB = "BasisListBob"
RECEIPT_CONFIRMATION = "ReceiptConfirmation"
POSITION_SELECTION = "PositionSelection"
PHI_LIST = "PhiList"
CHECK_BITS_BOB = "CheckBitsBob"
CHECK_BITS_ALICE = "CheckBitsAlice"
PARITY_ROUND = "ParityRound"
HASH_SEED = "HashSeed"
VERIFICATION_DIGEST = "VerificationDigest"
ABORT_NOTICE = "AbortNotice"

# abort reasons
INSUFFICIENT_SIFTED = "InsufficientSifted"
ERROR_RATE_EXCEEDED = "ErrorRateExceeded"
VERIFICATION_FAILED = "VerificationFailed"
KEY_EXHAUSTED = "KeyExhausted"


@dataclass(frozen=True)
class ClassicalMessage:
    sender: str
    tag: str
    payload: dict


class Transcript:
    """Append-only ordered log of classical messages: the adversary's view."""

    def __init__(self) -> None:
        self._records: list[ClassicalMessage] = []

    def append(self, sender: str, tag: str, payload: dict) -> ClassicalMessage:
        msg = ClassicalMessage(sender=sender, tag=tag, payload=payload)
        self._records.append(msg)
        return msg

    @property
    def records(self) -> tuple[ClassicalMessage, ...]:
        return tuple(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[ClassicalMessage]:
        return iter(self._records)

    def to_jsonl(self) -> str:
        lines = []
        for seq, msg in enumerate(self._records):
            lines.append(
                json.dumps(
                    {
                        "v": TRANSCRIPT_SCHEMA_VERSION,
                        "seq": seq,
                        "sender": msg.sender,
                        "tag": msg.tag,
                        "payload": msg.payload,
                    },
                    sort_keys=True,
                )
            )
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_jsonl(cls, text: str) -> "Transcript":
        transcript = cls()
        for line in text.splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            if record.get("v") != TRANSCRIPT_SCHEMA_VERSION:
                raise ValueError(f"unsupported transcript schema version: {record.get('v')}")
            transcript.append(record["sender"], record["tag"], record["payload"])
        return transcript


class Adversary:
    """Base adversary: forwards every state untouched and only watches.

    ``on_quantum`` is called once per state in transmission order and must
    return the handle delivered to Bob; measuring consumes the handle, so a
    resending adversary constructs a fresh state.  ``on_classical`` sees
    every authenticated message in transcript order but cannot alter it.
    """

    def attach(self, rng: np.random.Generator) -> None:
        self.rng = rng

    def on_quantum(self, state: SqueezedStateSpec) -> SqueezedStateSpec:
        return state

    def on_classical(self, message: ClassicalMessage) -> None:
        pass


class InterceptResendAdversary(Adversary):
    """Measure each state in a random basis and resend a fresh state
    centered at the measured value, with the same squeezing."""

    def __init__(self, fraction: float = 1.0) -> None:
        if not 0.0 <= fraction <= 1.0:
            raise ValueError(f"fraction must be in [0, 1], got {fraction}")
        self.fraction = fraction

    def on_quantum(self, state: SqueezedStateSpec) -> SqueezedStateSpec:
        if self.fraction < 1.0 and self.rng.random() >= self.fraction:
            return state
        basis = Basis(int(self.rng.integers(0, 2)))
        value = measure(state, basis, self.rng)
        return SqueezedStateSpec(
            basis=basis,
            mean_squeezed=value,
            mean_conjugate=0.0,
            r_hat=state.r_hat,
            sigma2_squeezed=state.sigma2_squeezed,
            sigma2_anti=state.sigma2_anti,
        )


class ClassicalEavesdropper(Adversary):
    """Records the classical view, touches nothing quantum."""

    def __init__(self) -> None:
        self.seen: list[ClassicalMessage] = []

    def on_classical(self, message: ClassicalMessage) -> None:
        self.seen.append(message)


def default_prepared_count(n: int) -> int:
    """~4n states with a ~6-sigma sifting margin so a 2n yield is near-certain."""
    return 4 * n + max(16, math.ceil(12.0 * math.sqrt(n)))


@dataclass(frozen=True)
class SessionConfig:
    n: int
    r_hat: float
    bits_per_state: int = 1
    abort_threshold: float = 0.11
    seed: int = 0
    sampling: str = "continuous"
    prepared_count: int | None = None

    def __post_init__(self) -> None:
        if self.n < 16:
            raise ValueError(f"n must be >= 16, got {self.n}")
        if self.r_hat <= 0.0:
            raise ValueError(f"r_hat must be > 0, got {self.r_hat}")
        if not 0.0 < self.abort_threshold < 0.5:
            raise ValueError(f"abort_threshold must be in (0, 0.5), got {self.abort_threshold}")
        if self.sampling not in ("continuous", "discrete"):
            raise ValueError(f"sampling must be continuous or discrete, got {self.sampling}")
        if self.bits_per_state < 1:
            raise ValueError(f"bits_per_state must be >= 1, got {self.bits_per_state}")

    @property
    def total_states(self) -> int:
        return self.prepared_count if self.prepared_count is not None else default_prepared_count(self.n)


@dataclass(frozen=True)
class SessionResult:
    sifted_count: int
    observed_eps: float | None
    aborted: bool
    abort_reason: str | None
    key_alice: np.ndarray | None
    key_bob: np.ndarray | None
    leak_bits: int
    final_key: np.ndarray | None
    transcript: Transcript = field(compare=False)


def sift(basis_a, basis_b) -> list[int]:
    """Indices where both parties used the same basis, order preserved."""
    if len(basis_a) != len(basis_b):
        raise ValueError(f"basis list length mismatch: {len(basis_a)} vs {len(basis_b)}")
    return [i for i, (x, y) in enumerate(zip(basis_a, basis_b)) if x == y]


def estimate_error(check_a, check_b) -> float:
    """Hamming distance over length of the disclosed check strings."""
    a = np.asarray(check_a)
    b = np.asarray(check_b)
    if a.shape != b.shape or a.size == 0:
        raise ValueError(f"check strings must be nonempty and equal length: {a.shape} vs {b.shape}")
    return float(np.mean(a != b))


def _symbols_to_bits(symbols: np.ndarray, bits_per_state: int) -> np.ndarray:
    """MSB-first bit expansion of message symbols."""
    shifts = np.arange(bits_per_state - 1, -1, -1)
    return ((symbols[:, None] >> shifts) & 1).astype(np.uint8).ravel()


def run_session(config: SessionConfig, adversary: Adversary | None = None) -> SessionResult:
    """Run one full session; never raises on protocol aborts, returns them."""
    if adversary is None:
        adversary = Adversary()
    root = np.random.SeedSequence(config.seed)
    alice_ss, bob_ss, eve_ss, post_ss = root.spawn(4)
    rng_alice = np.random.default_rng(alice_ss)
    rng_bob = np.random.default_rng(bob_ss)
    rng_post = np.random.default_rng(post_ss)
    adversary.attach(np.random.default_rng(eve_ss))

    transcript = Transcript()

    def say(sender: str, tag: str, payload: dict) -> None:
        adversary.on_classical(transcript.append(sender, tag, payload))

    params = EncodingParams(config.bits_per_state)
    n = config.n
    total = config.total_states

    # --- preparation and transmission -------------------------------------
    if config.sampling == "discrete":
        sampler = states.build_discrete_sampler(config.r_hat, config.bits_per_state)
        a_values = states.sample_alice_discrete(sampler, rng_alice, size=total)
    else:
        a_values = states.sample_alice(config.r_hat, rng_alice, size=total)
    bases_alice = rng_alice.integers(0, 2, size=total)
    messages_alice = np.array(
        [encode(float(a), params) for a in a_values], dtype=np.int64
    )

    bases_bob = rng_bob.integers(0, 2, size=total)
    values_bob = np.empty(total, dtype=np.float64)
    for i in range(total):
        state = prepare(float(a_values[i]), Basis(int(bases_alice[i])), config.r_hat)
        delivered = adversary.on_quantum(state)
        values_bob[i] = measure(delivered, Basis(int(bases_bob[i])), rng_bob)

    # --- receipt, basis announcement, sifting ------------------------------
    say("bob", RECEIPT_CONFIRMATION, {"count": total})
    say("alice", BASIS_LIST_ALICE, {"bases": bases_alice.tolist()})
    say("bob", BASIS_LIST_BOB, {"bases": bases_bob.tolist()})

    matched = sift(bases_alice.tolist(), bases_bob.tolist())
    if len(matched) < 2 * n:
        say("alice", ABORT_NOTICE, {"reason": INSUFFICIENT_SIFTED, "sifted": len(matched)})
        return SessionResult(
            sifted_count=len(matched),
            observed_eps=None,
            aborted=True,
            abort_reason=INSUFFICIENT_SIFTED,
            key_alice=None,
            key_bob=None,
            leak_bits=0,
            final_key=None,
            transcript=transcript,
        )

    # --- position selection and phase announcement -------------------------
    selection = rng_alice.permutation(np.array(matched, dtype=np.int64))[: 2 * n]
    check_idx = np.sort(selection[:n])
    key_idx = np.sort(selection[n:])
    say(
        "alice",
        POSITION_SELECTION,
        {"check": check_idx.tolist(), "key": key_idx.tolist()},
    )
    announced = np.concatenate([check_idx, key_idx])
    phis = {int(i): phi(float(a_values[i])) for i in announced}
    say(
        "alice",
        PHI_LIST,
        {"positions": announced.tolist(), "phi": [phis[int(i)] for i in announced]},
    )

    decoded_bob = {
        int(i): decode(float(values_bob[i]), phis[int(i)], params) for i in announced
    }

    # --- check-bit comparison and abort rule --------------------------------
    check_alice = messages_alice[check_idx]
    check_bob = np.array([decoded_bob[int(i)] for i in check_idx], dtype=np.int64)
    say("bob", CHECK_BITS_BOB, {"bits": check_bob.tolist()})
    say("alice", CHECK_BITS_ALICE, {"bits": check_alice.tolist()})
    observed_eps = estimate_error(check_alice, check_bob)

    key_alice = _symbols_to_bits(messages_alice[key_idx], config.bits_per_state)
    key_bob = _symbols_to_bits(
        np.array([decoded_bob[int(i)] for i in key_idx], dtype=np.int64),
        config.bits_per_state,
    )

    def aborted(reason: str, leak: int) -> SessionResult:
        say("alice", ABORT_NOTICE, {"reason": reason, "observed_eps": observed_eps})
        return SessionResult(
            sifted_count=len(matched),
            observed_eps=observed_eps,
            aborted=True,
            abort_reason=reason,
            key_alice=key_alice,
            key_bob=key_bob,
            leak_bits=leak,
            final_key=None,
            transcript=transcript,
        )

    if observed_eps > config.abort_threshold:
        return aborted(ERROR_RATE_EXCEEDED, 0)

    # --- reconciliation ------------------------------------------------------
    eps_bits = estimate_error(
        _symbols_to_bits(check_alice, config.bits_per_state),
        _symbols_to_bits(check_bob, config.bits_per_state),
    )

    def parity_channel(record: dict) -> None:
        say("alice", PARITY_ROUND, record)

    key_bob_corrected, recon = postprocessing.reconcile(
        key_alice, key_bob, eps_bits, rng=rng_post, channel=parity_channel
    )

    # --- verification ----------------------------------------------------------
    # Bob discloses his digest; Alice compares against her own locally.
    verify_seed = int(rng_post.integers(0, 2**63))
    say("alice", HASH_SEED, {"purpose": "verify", "seed": verify_seed})
    digest_bob = postprocessing.universal_digest(key_bob_corrected, verify_seed)
    say("bob", VERIFICATION_DIGEST, {"digest": f"{digest_bob:016x}"})
    digest_bits = postprocessing.DIGEST_BITS
    leak_total = recon.parity_bits_leaked + digest_bits

    if postprocessing.universal_digest(key_alice, verify_seed) != digest_bob:
        return aborted(VERIFICATION_FAILED, leak_total)

    # --- privacy amplification ---------------------------------------------------
    # 1-2h(eps) already budgets ~n*h(eps) for ideal reconciliation, so only
    # disclosure beyond that budget (plus the digest) is charged again.
    budget = math.ceil(key_alice.size * binary_entropy(eps_bits))
    pa_leaked = max(0, recon.parity_bits_leaked - budget) + digest_bits
    pa_params = postprocessing.AmplificationParams(
        input_length=key_alice.size, leaked=pa_leaked, eps_hat=eps_bits
    )
    if pa_params.output_length < 1:
        return aborted(KEY_EXHAUSTED, leak_total)
    pa_seed = int(rng_post.integers(0, 2**63))
    say("alice", HASH_SEED, {"purpose": "amplify", "seed": pa_seed})
    final_alice = postprocessing.privacy_amplify(key_alice, pa_params, pa_seed)
    final_bob = postprocessing.privacy_amplify(key_bob_corrected, pa_params, pa_seed)
    assert np.array_equal(final_alice, final_bob)

    return SessionResult(
        sifted_count=len(matched),
        observed_eps=observed_eps,
        aborted=False,
        abort_reason=None,
        key_alice=key_alice,
        key_bob=key_bob_corrected,
        leak_bits=leak_total,
        final_key=final_alice,
        transcript=transcript,
    )
