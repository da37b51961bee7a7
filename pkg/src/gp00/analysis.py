"""Error-rate, leakage, entropy-maximization and key-rate computations.

Covers the intrinsic same-basis error probability eps_s (continuous and
staircase-sampled variants, plus a Monte Carlo oracle), the wrong-basis
agreement probability, the announcement leakage, the constrained entropy
maximization over the grouped Bell-outcome probabilities, the secret key
rates 1-3h(eps) / 1-2h(eps), and the squeezing / error-rate thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import states
from .encoding import ONE_BIT, SQRT_PI, EncodingParams, IntervalFamily, decode, decoding_family, encode, phi
from .numerics import (
    DEFAULT_TOL,
    BracketError,
    Tolerance,
    _adaptive_simpson,
    binary_entropy,
    find_root,
    gaussian_mass_on_family,
    integrate_weighted,
    maximize_1d,
)


@dataclass(frozen=True)
class LambdaVector:
    """The four grouped Bell-outcome probabilities at error rate eps.

    Only lambda4 is free; the error-rate constraints pin the rest:
    lambda1 = 1 - 2*eps + lambda4 and lambda2 = lambda3 = eps - lambda4,
    with lambda4 feasible on [max(0, 2*eps - 1), eps].
    """

    eps: float
    lambda4: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.eps <= 0.5:
            raise ValueError(f"eps must be in [0, 0.5], got {self.eps}")
        lo = max(0.0, 2.0 * self.eps - 1.0)
        if not lo - 1e-12 <= self.lambda4 <= self.eps + 1e-12:
            raise ValueError(
                f"lambda4={self.lambda4} outside feasible segment [{lo}, {self.eps}]"
            )

    @property
    def lambda1(self) -> float:
        return 1.0 - 2.0 * self.eps + self.lambda4

    @property
    def lambda2(self) -> float:
        return self.eps - self.lambda4

    @property
    def lambda3(self) -> float:
        return self.eps - self.lambda4

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.lambda1, self.lambda2, self.lambda3, self.lambda4)


def lambda_from(eps: float, lambda4: float) -> LambdaVector:
    """The unique grouped-probability vector with the given eps and lambda4."""
    return LambdaVector(eps=eps, lambda4=lambda4)


def _plogp(p: float) -> float:
    return 0.0 if p <= 0.0 else -p * math.log2(p)


def entropy_Z(lv: LambdaVector) -> float:
    """Shannon entropy (bits) of the four grouped outcome probabilities."""
    return sum(_plogp(p) for p in lv.as_tuple())


def entropy_Z_given_W(lv: LambdaVector) -> float:
    """Entropy of the grouped outcome given the agree/disagree parity.

    (1-eps)*h(lambda1/(1-eps)) + eps*h(lambda3/eps), which equals
    entropy_Z(lv) - h(eps) for every feasible vector.
    """
    eps = lv.eps
    total = 0.0
    # the ratios are probabilities by construction; clip one-ulp float spill
    if eps < 1.0:
        total += (1.0 - eps) * binary_entropy(min(1.0, lv.lambda1 / (1.0 - eps)))
    if eps > 0.0:
        total += eps * binary_entropy(min(1.0, lv.lambda3 / eps))
    return total


def max_entropy(
    eps: float, conditioned: bool = False, tol: Tolerance = DEFAULT_TOL
) -> tuple[float, float]:
    """Maximize entropy_Z (or entropy_Z_given_W) over the feasible lambda4 segment.

    Returns (lambda4_star, H_star); the maximizer sits at lambda4 = eps^2.
    """
    if not 0.0 < eps < 0.5:
        raise ValueError(f"eps must be in (0, 0.5), got {eps}")
    lo = max(0.0, 2.0 * eps - 1.0)
    objective = entropy_Z_given_W if conditioned else entropy_Z

    def f(lambda4: float) -> float:
        return objective(LambdaVector(eps, min(eps, max(lo, lambda4))))

    return maximize_1d(f, lo, eps, tol)


def key_rate(eps: float, improved: bool = False, tol: Tolerance = DEFAULT_TOL) -> float:
    """Secret key rate 1 - h(eps) - max H; closed forms 1-3h(eps) and 1-2h(eps).

    The 1 - h(eps) term is the key-bit information H(X) - H(X|Y) for a
    uniform bit through a symmetric error channel.
    """
    if not 0.0 <= eps < 0.5:
        raise ValueError(f"eps must be in [0, 0.5), got {eps}")
    if eps == 0.0:
        return 1.0
    _, h_star = max_entropy(eps, conditioned=improved, tol=tol)
    return 1.0 - binary_entropy(eps) - h_star


@dataclass(frozen=True)
class RateReport:
    """Optimized entropies and both key rates at one error rate."""

    eps: float
    H_Z_max: float
    H_ZW_max: float
    R_basic: float
    R_improved: float


def rate_report(eps: float, tol: Tolerance = DEFAULT_TOL) -> RateReport:
    if eps == 0.0:
        return RateReport(eps=0.0, H_Z_max=0.0, H_ZW_max=0.0, R_basic=1.0, R_improved=1.0)
    _, h_z = max_entropy(eps, conditioned=False, tol=tol)
    _, h_zw = max_entropy(eps, conditioned=True, tol=tol)
    h = binary_entropy(eps)
    return RateReport(
        eps=eps,
        H_Z_max=h_z,
        H_ZW_max=h_zw,
        R_basic=1.0 - h - h_z,
        R_improved=1.0 - h - h_zw,
    )


def _difference_params(r_hat: float) -> tuple[float, float]:
    """(shrink, sigma) of delta = b - a for matched bases: delta ~ N(shrink*a, sigma^2)."""
    shrink = math.sqrt(1.0 - math.exp(-4.0 * r_hat)) - 1.0
    sigma = math.sqrt(0.5 * math.exp(-2.0 * r_hat))
    return shrink, sigma


def epsilon_s(r_hat: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Intrinsic same-basis bit error probability at squeezing r_hat.

    Averages P(delta outside the correct-decoding family) over Alice's
    Gaussian, where delta = b - a ~ N(a*(sqrt(1-exp(-4*r_hat)) - 1),
    exp(-2*r_hat)/2).  Absolute error <= 1e-6.
    """
    if r_hat <= 0.0:
        raise ValueError(f"r_hat must be > 0, got {r_hat}")
    shrink, sigma = _difference_params(r_hat)
    family = decoding_family(ONE_BIT, 0)

    def error_given_a(a: float) -> float:
        return 1.0 - gaussian_mass_on_family(shrink * a, sigma, family)

    return integrate_weighted(error_given_a, 0.0, states.alice_sigma(r_hat), tol)


def epsilon_s_discrete(
    r_hat: float, bits_per_state: int = 1, tol: Tolerance = DEFAULT_TOL
) -> float:
    """Same error functional with Alice sampling from the staircase approximation.

    Sum over lattice cells of the cell weight times the uniform within-cell
    average of the decoding error; for bits_per_state > 1 an error is any
    decoded message different from the encoded one.
    """
    if r_hat <= 0.0:
        raise ValueError(f"r_hat must be > 0, got {r_hat}")
    shrink, sigma = _difference_params(r_hat)
    params = EncodingParams(bits_per_state)
    family = decoding_family(params, 0)
    sampler = states.build_discrete_sampler(r_hat, bits_per_state)

    total = 0.0
    for n, weight in sampler.cell_weights.items():
        if weight < 1e-15:
            continue

        def error_at(u: float, base: int = n) -> float:
            a = (base + u) * SQRT_PI
            return 1.0 - gaussian_mass_on_family(shrink * a, sigma, family)

        cell_mean = _adaptive_simpson(error_at, 0.0, 1.0, tol.abs_tol, tol.max_iter)
        total += weight * cell_mean
    return total


def epsilon_s_mc(
    r_hat: float,
    bits_per_state: int = 1,
    discrete: bool = False,
    trials: int = 10**6,
    rng: np.random.Generator | None = None,
) -> tuple[float, float]:
    """Monte Carlo oracle for epsilon_s via prepare/measure and encode/decode.

    Runs matched-basis transmissions end to end and returns (estimate,
    standard error) with SE = sqrt(p*(1-p)/trials).
    """
    if trials < 10**3:
        raise ValueError(f"trials must be >= 1e3, got {trials}")
    if rng is None:
        rng = np.random.default_rng(0)
    params = EncodingParams(bits_per_state)
    if discrete:
        sampler = states.build_discrete_sampler(r_hat, bits_per_state)
        a_values = states.sample_alice_discrete(sampler, rng, size=trials)
    else:
        a_values = states.sample_alice(r_hat, rng, size=trials)
    bases = rng.integers(0, 2, size=trials)

    errors = 0
    for i in range(trials):
        a = float(a_values[i])
        basis = states.Basis(int(bases[i]))
        state = states.prepare(a, basis, r_hat)
        b = states.measure(state, basis, rng)
        if decode(b, phi(a), params) != encode(a, params):
            errors += 1
    p_hat = errors / trials
    return p_hat, math.sqrt(p_hat * (1.0 - p_hat) / trials)


def p_same_wrong_basis(a: float, r_hat: float) -> float:
    """Probability Bob decodes Alice's bit when he measured the wrong quadrature.

    His outcome is N(0, exp(2*r_hat)/2); agreement means b - a lands in the
    correct-decoding family, i.e. b in that family shifted by a.
    """
    if r_hat <= 0.0:
        raise ValueError(f"r_hat must be > 0, got {r_hat}")
    shifted = IntervalFamily(offset=a, period=2.0 * SQRT_PI, half_width=SQRT_PI / 2.0)
    return gaussian_mass_on_family(0.0, states.alice_sigma(r_hat), shifted)


def leakage(r_hat: float, announcement: float) -> float:
    """P(a in the bit-0 cells | announcement): what the announcement reveals.

    Ratio of Alice's density summed over even lattice points n*sqrt(pi) +
    announcement to the sum over all lattice points.  Equals 1/2 for every
    r_hat at announcement = sqrt(pi)/2; approaches 1/2 at all announcements
    as r_hat grows.
    """
    if r_hat <= 0.0:
        raise ValueError(f"r_hat must be > 0, got {r_hat}")
    if not 0.0 <= announcement < SQRT_PI:
        raise ValueError(f"announcement must be in [0, sqrt(pi)), got {announcement}")
    sigma = states.alice_sigma(r_hat)
    trunc = max(20, int(math.ceil(10.0 * sigma / SQRT_PI)) + 1)
    even = 0.0
    total = 0.0
    for n in range(-trunc, trunc + 1):
        x = n * SQRT_PI + announcement
        density = math.exp(-0.5 * (x / sigma) ** 2)
        total += density
        if n % 2 == 0:
            even += density
    return even / total


def min_squeezing(
    target_eps: float,
    discrete: bool = False,
    bits_per_state: int = 1,
    tol: Tolerance = DEFAULT_TOL,
) -> float:
    """Smallest squeezing with intrinsic error at most target_eps.

    Root of epsilon_s(r_hat) - target_eps (epsilon_s is monotone decreasing);
    the bracket is grown by doubling and a BracketError means the target is
    not reachable inside the searched range.
    """
    if not 0.0 < target_eps < 1.0:
        raise ValueError(f"target_eps must be in (0, 1), got {target_eps}")
    eval_tol = Tolerance(abs_tol=min(tol.abs_tol, 1e-9), rel_tol=0.0, max_iter=tol.max_iter)

    def f(r_hat: float) -> float:
        if discrete:
            return epsilon_s_discrete(r_hat, bits_per_state, eval_tol) - target_eps
        return epsilon_s(r_hat, eval_tol) - target_eps

    lo = 0.02
    if f(lo) <= 0.0:
        raise BracketError(
            f"target {target_eps} already met at r_hat={lo}; no positive bracket"
        )
    hi = 0.5
    while f(hi) > 0.0:
        hi *= 2.0
        if hi > 64.0:
            raise BracketError(f"target {target_eps} below the large-squeezing limit")
    root_tol = Tolerance(abs_tol=max(tol.abs_tol, 1e-7), rel_tol=0.0, max_iter=200)
    return find_root(f, lo, hi, root_tol)


def rate_threshold(improved: bool = False, tol: Tolerance = DEFAULT_TOL) -> float:
    """Largest error rate with positive key rate (root of the rate on (0.001, 0.4))."""
    closed = (lambda e: 1.0 - 2.0 * binary_entropy(e)) if improved else (
        lambda e: 1.0 - 3.0 * binary_entropy(e)
    )
    root_tol = Tolerance(abs_tol=min(tol.abs_tol, 1e-9), rel_tol=0.0, max_iter=200)
    eps_star = find_root(closed, 0.001, 0.4, root_tol)
    # cross-check the optimization path against the closed form
    residual = abs(key_rate(eps_star, improved, tol))
    if residual > 1e-6:
        raise ArithmeticError(
            f"optimized rate at threshold {eps_star} deviates from closed form by {residual}"
        )
    return eps_star
