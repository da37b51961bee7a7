"""Message encoding/decoding geometry on the sqrt(pi) lattice.

Alice's real value a sits in cell n = floor(a/sqrt(pi)); her message is
n mod 2^m.  She announces phi = a mod sqrt(pi), Bob rounds (b - phi) to the
nearest lattice multiple and reduces mod 2^m.  The encoding cells and the
wrap-around decoding cells are periodic interval families on the real line.

All lattice arithmetic is done in units of sqrt(pi) and converted at the
API boundary, so no irrational-constant error accumulates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class IntervalFamily:
    """Periodic union of half-open cells on the real line.

    Cells are [offset + k*period - half_width, offset + k*period + half_width)
    for every integer k: closed on the left, open on the right.
    """

    offset: float
    period: float
    half_width: float

    def __post_init__(self) -> None:
        if not (0.0 < 2.0 * self.half_width <= self.period):
            raise ValueError(
                f"need 0 < 2*half_width <= period, got half_width={self.half_width}, "
                f"period={self.period}"
            )

    def contains(self, x: float) -> bool:
        t = (x - self.offset) % self.period
        if t >= self.period:  # float wrap of values just below a cell boundary
            t = 0.0
        return t < self.half_width or t >= self.period - self.half_width

    def cell(self, k: int) -> tuple[float, float]:
        """Bounds [lo, hi) of cell k."""
        center = self.offset + k * self.period
        return center - self.half_width, center + self.half_width

    def __contains__(self, x: float) -> bool:
        return self.contains(x)


@dataclass(frozen=True)
class EncodingParams:
    """Lattice parameters for packing ``bits_per_state`` bits into one state."""

    bits_per_state: int = 1

    def __post_init__(self) -> None:
        if self.bits_per_state < 1:
            raise ValueError(f"bits_per_state must be >= 1, got {self.bits_per_state}")

    @property
    def n_messages(self) -> int:
        return 1 << self.bits_per_state

    @property
    def cell_width(self) -> float:
        return SQRT_PI

    @property
    def period(self) -> float:
        return self.n_messages * SQRT_PI


ONE_BIT = EncodingParams(1)


def encode(a: float, params: EncodingParams = ONE_BIT) -> int:
    """Message floor(a/sqrt(pi)) mod 2^m extracted from Alice's value a."""
    return int(math.floor(a / SQRT_PI)) % params.n_messages


def phi(a: float) -> float:
    """Public announcement a mod sqrt(pi), guaranteed in [0, sqrt(pi))."""
    r = a - SQRT_PI * math.floor(a / SQRT_PI)
    if r < 0.0:
        r = 0.0
    elif r >= SQRT_PI:  # float wrap for a just below a lattice point
        r = math.nextafter(SQRT_PI, 0.0)
    return r


def decode(b: float, announcement: float, params: EncodingParams = ONE_BIT) -> int:
    """Message round((b - announcement)/sqrt(pi)) mod 2^m, ties rounded half-up."""
    return int(math.floor((b - announcement) / SQRT_PI + 0.5)) % params.n_messages


def decoding_family(params: EncodingParams = ONE_BIT, shift: int = 0) -> IntervalFamily:
    """Cells of differences b - a that shift the decoded message by ``shift``.

    delta lands in this family iff round(delta/sqrt(pi)) = shift (mod 2^m);
    shift 0 is the correct-decoding family.
    """
    if not 0 <= shift < params.n_messages:
        raise ValueError(f"shift must be in [0, {params.n_messages}), got {shift}")
    return IntervalFamily(offset=shift * SQRT_PI, period=params.period, half_width=SQRT_PI / 2.0)


def encoding_family(params: EncodingParams = ONE_BIT, message: int = 0) -> IntervalFamily:
    """Cells [(2^m*n + j)*sqrt(pi), (2^m*n + j + 1)*sqrt(pi)) encoding message j."""
    if not 0 <= message < params.n_messages:
        raise ValueError(f"message must be in [0, {params.n_messages}), got {message}")
    return IntervalFamily(
        offset=(message + 0.5) * SQRT_PI, period=params.period, half_width=SQRT_PI / 2.0
    )
