"""Classical bookkeeping for squeezed-state preparation and measurement.

A transmitted state is represented by the means and variances of its two
quadratures: the squeezed quadrature has variance exp(-2*r_hat)/2, the
conjugate one exp(+2*r_hat)/2, saturating sigma_x * sigma_p = 1/2.  Alice's
sampling distribution (continuous Gaussian or its lattice-cell staircase
approximation) and the dealer-based equivalence identities live here too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .encoding import SQRT_PI
from .numerics import gaussian_cdf, gaussian_pdf


class Basis(Enum):
    X = 0
    P = 1


class StateConsumedError(RuntimeError):
    """A state handle was measured twice."""


def alice_sigma(r_hat: float) -> float:
    """Standard deviation of Alice's sampling Gaussian, sqrt(exp(2*r_hat)/2)."""
    if r_hat <= 0.0:
        raise ValueError(f"r_hat must be > 0, got {r_hat}")
    return math.sqrt(0.5 * math.exp(2.0 * r_hat))


@dataclass
class SqueezedStateSpec:
    """One prepared state: which quadrature is squeezed, its mean, and variances.

    A handle is consumed by its first measurement; resending adversaries must
    construct a fresh spec rather than reuse a measured one.
    """

    basis: Basis
    mean_squeezed: float
    mean_conjugate: float
    r_hat: float
    sigma2_squeezed: float
    sigma2_anti: float
    consumed: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        if self.r_hat <= 0.0:
            raise ValueError(f"r_hat must be > 0, got {self.r_hat}")
        product = self.sigma2_squeezed * self.sigma2_anti
        if abs(product - 0.25) > 1e-9:
            raise ValueError(
                f"variances must saturate the uncertainty product 1/4, got {product}"
            )


def prepare(a: float, basis: Basis, r_hat: float) -> SqueezedStateSpec:
    """State squeezed in ``basis`` encoding a, with damped mean a*sqrt(1-exp(-4*r_hat))."""
    if r_hat <= 0.0:
        raise ValueError(f"r_hat must be > 0, got {r_hat}")
    return SqueezedStateSpec(
        basis=basis,
        mean_squeezed=a * math.sqrt(1.0 - math.exp(-4.0 * r_hat)),
        mean_conjugate=0.0,
        r_hat=r_hat,
        sigma2_squeezed=0.5 * math.exp(-2.0 * r_hat),
        sigma2_anti=0.5 * math.exp(2.0 * r_hat),
    )


def measure(state: SqueezedStateSpec, basis: Basis, rng: np.random.Generator) -> float:
    """Draw one quadrature measurement outcome and consume the state handle."""
    if state.consumed:
        raise StateConsumedError("state handle was already measured")
    state.consumed = True
    if basis == state.basis:
        return rng.normal(state.mean_squeezed, math.sqrt(state.sigma2_squeezed))
    return rng.normal(state.mean_conjugate, math.sqrt(state.sigma2_anti))


def sample_alice(r_hat: float, rng: np.random.Generator, size: int | None = None):
    """Draw from Alice's Gaussian: mean 0, variance exp(2*r_hat)/2."""
    return rng.normal(0.0, alice_sigma(r_hat), size)


@dataclass(frozen=True)
class DiscreteSampler:
    """Staircase approximation of Alice's Gaussian on the sqrt(pi) cells.

    ``cell_weights`` maps cell index n to the probability of drawing a value
    uniformly from [n*sqrt(pi), (n+1)*sqrt(pi)).  Weights are the Gaussian
    cell integrals rescaled so every residue class mod 2^m carries exactly
    2^-m, which makes the announcement exactly uniform and all messages
    exactly equiprobable.
    """

    r_hat: float
    bits_per_state: int
    cell_weights: dict[int, float]
    support_truncation: int
    _cells: np.ndarray = field(init=False, repr=False, compare=False)
    _masses: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        cells = np.array(sorted(self.cell_weights), dtype=np.int64)
        masses = np.array([self.cell_weights[int(n)] for n in cells])
        total = float(masses.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"cell weights must sum to 1, got {total}")
        if (masses < 0.0).any():
            raise ValueError("cell weights must be non-negative")
        object.__setattr__(self, "_cells", cells)
        object.__setattr__(self, "_masses", masses / total)


def build_discrete_sampler(r_hat: float, bits_per_state: int = 1) -> DiscreteSampler:
    """Integrate Alice's Gaussian over each cell, then rebalance residue classes."""
    if r_hat <= 0.0:
        raise ValueError(f"r_hat must be > 0, got {r_hat}")
    if bits_per_state < 1:
        raise ValueError(f"bits_per_state must be >= 1, got {bits_per_state}")
    sigma = alice_sigma(r_hat)
    trunc = int(math.ceil(10.0 * sigma / SQRT_PI))
    n_messages = 1 << bits_per_state
    raw = {
        n: gaussian_cdf((n + 1) * SQRT_PI, 0.0, sigma) - gaussian_cdf(n * SQRT_PI, 0.0, sigma)
        for n in range(-trunc, trunc)
    }
    class_mass = [0.0] * n_messages
    for n, w in raw.items():
        class_mass[n % n_messages] += w
    target = 1.0 / n_messages
    weights = {n: w * target / class_mass[n % n_messages] for n, w in raw.items()}
    return DiscreteSampler(
        r_hat=r_hat,
        bits_per_state=bits_per_state,
        cell_weights=weights,
        support_truncation=trunc,
    )


def sample_alice_discrete(
    sampler: DiscreteSampler, rng: np.random.Generator, size: int | None = None
):
    """Draw a cell by weight, then a uniform position inside it."""
    cells = rng.choice(sampler._cells, size=size, p=sampler._masses)
    u = rng.random(size)
    if size is None:
        return (float(cells) + float(u)) * SQRT_PI
    return (cells.astype(np.float64) + u) * SQRT_PI


@dataclass(frozen=True)
class EquivalenceReport:
    """Discrepancies between the dealer-based formulation and direct preparation.

    With delta_sq = exp(-2*r_hat), the dealer's marginal for Alice's outcome
    must equal her sampling Gaussian, and the state steered to Bob must match
    prepare(): mean sqrt(1-delta_sq^2)*x_a, variance delta_sq/2.
    """

    r_hat: float
    delta_sq: float
    max_density_diff: float
    max_mean_diff: float
    variance_diff: float


def entanglement_equivalence(r_hat: float, grid) -> EquivalenceReport:
    """Check the dealer-based identities pointwise on a grid of outcome values."""
    if r_hat <= 0.0:
        raise ValueError(
            f"r_hat must be > 0 (dealer state is entangled only for delta_sq < 1), got {r_hat}"
        )
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    delta_sq = math.exp(-2.0 * r_hat)
    delta = math.sqrt(delta_sq)
    steer = math.sqrt(1.0 - delta_sq * delta_sq)
    sigma_a = alice_sigma(r_hat)

    max_density = 0.0
    max_mean = 0.0
    for x in grid.tolist():
        dealer_density = (delta / SQRT_PI) * math.exp(-delta_sq * x * x)
        max_density = max(max_density, abs(dealer_density - gaussian_pdf(x, 0.0, sigma_a)))
        max_mean = max(max_mean, abs(steer * x - prepare(x, Basis.X, r_hat).mean_squeezed))
    variance_diff = abs(0.5 * delta_sq - prepare(0.0, Basis.X, r_hat).sigma2_squeezed)
    return EquivalenceReport(
        r_hat=r_hat,
        delta_sq=delta_sq,
        max_density_diff=max_density,
        max_mean_diff=max_mean,
        variance_diff=variance_diff,
    )
