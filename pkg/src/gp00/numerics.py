"""Deterministic scalar numerics shared by the other modules.

Binary entropy, Gaussian CDF/PDF, Gaussian mass over a periodic interval
family, adaptive Gaussian-weighted quadrature, bracketing root finding and
1-D unimodal maximization.  Everything here is a pure function of its
arguments and safe to call from parallel workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

_SQRT2 = math.sqrt(2.0)


class BracketError(ValueError):
    """No sign change on the supplied interval."""


class ConvergenceError(RuntimeError):
    """Iteration budget exhausted before reaching the requested tolerance."""


@dataclass(frozen=True)
class Tolerance:
    """Absolute/relative tolerance plus an iteration cap for iterative routines."""

    abs_tol: float = 1e-9
    rel_tol: float = 0.0
    max_iter: int = 10_000

    def __post_init__(self) -> None:
        if self.abs_tol <= 0.0:
            raise ValueError(f"abs_tol must be > 0, got {self.abs_tol}")
        if self.rel_tol < 0.0:
            raise ValueError(f"rel_tol must be >= 0, got {self.rel_tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


DEFAULT_TOL = Tolerance()


def binary_entropy(x: float) -> float:
    """h(x) = -x*log2(x) - (1-x)*log2(1-x), with 0*log2(0) = 0."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary_entropy requires 0 <= x <= 1, got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def gaussian_pdf(x: float, mean: float = 0.0, sigma: float = 1.0) -> float:
    """Density of N(mean, sigma^2) at x."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    z = (x - mean) / sigma
    return math.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi))


def gaussian_cdf(x: float, mean: float = 0.0, sigma: float = 1.0) -> float:
    """Phi((x - mean)/sigma) via erfc; absolute error well below 1e-12."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    return 0.5 * math.erfc((mean - x) / (sigma * _SQRT2))


def gaussian_mass_on_family(
    mean: float,
    sigma: float,
    family,
    truncation: int | None = None,
) -> float:
    """Probability that N(mean, sigma^2) lands in a periodic interval family.

    ``family`` is anything with ``offset``, ``period`` and ``half_width``
    attributes describing cells [offset + k*period - half_width,
    offset + k*period + half_width).  Cells with |k| <= truncation are
    summed; the default truncation puts the neglected tail below 1e-22.
    """
    if sigma <= 0.0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    period = family.period
    if truncation is None:
        truncation = int(math.ceil((10.0 * sigma + abs(mean - family.offset)) / period)) + 1
    total = 0.0
    for k in range(-truncation, truncation + 1):
        center = family.offset + k * period
        total += gaussian_cdf(center + family.half_width, mean, sigma) - gaussian_cdf(
            center - family.half_width, mean, sigma
        )
    # clip float residue; the sum of CDF differences is a probability
    return min(1.0, max(0.0, total))


def _adaptive_simpson(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    abs_tol: float,
    max_iter: int,
) -> float:
    """Adaptive Simpson quadrature with a global refinement budget."""

    def simpson(a: float, fa: float, m: float, fm: float, b: float, fb: float) -> float:
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    m0 = 0.5 * (lo + hi)
    flo, fm0, fhi = f(lo), f(m0), f(hi)
    whole = simpson(lo, flo, m0, fm0, hi, fhi)
    # stack entries: (a, fa, m, fm, b, fb, coarse_estimate, local_tol)
    stack = [(lo, flo, m0, fm0, hi, fhi, whole, abs_tol)]
    total = 0.0
    refinements = 0
    while stack:
        a, fa, m, fm, b, fb, coarse, tol = stack.pop()
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(a, fa, lm, flm, m, fm)
        right = simpson(m, fm, rm, frm, b, fb)
        err = left + right - coarse
        if abs(err) <= 15.0 * tol:
            total += left + right + err / 15.0
            continue
        refinements += 1
        if refinements > max_iter:
            raise ConvergenceError(
                f"quadrature did not converge within {max_iter} refinements"
            )
        half = 0.5 * tol
        stack.append((a, fa, lm, flm, m, fm, left, half))
        stack.append((m, fm, rm, frm, b, fb, right, half))
    return total


def integrate_weighted(
    f: Callable[[float], float],
    mean: float,
    sigma: float,
    tol: Tolerance = DEFAULT_TOL,
) -> float:
    """Integral of f(a) * N(a; mean, sigma^2) da over mean +/- 10 sigma."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be > 0, got {sigma}")

    def weighted(a: float) -> float:
        return f(a) * gaussian_pdf(a, mean, sigma)

    return _adaptive_simpson(
        weighted, mean - 10.0 * sigma, mean + 10.0 * sigma, tol.abs_tol, tol.max_iter
    )


def find_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: Tolerance = DEFAULT_TOL,
) -> float:
    """Root of continuous f bracketed by [lo, hi], by bisection with secant steps.

    Requires f(lo) and f(hi) to have opposite signs; returns the midpoint of
    a final bracket narrower than abs_tol + rel_tol*|x|.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise BracketError(f"f({lo})={flo} and f({hi})={fhi} have the same sign")
    for _ in range(tol.max_iter):
        width = hi - lo
        if width <= tol.abs_tol + tol.rel_tol * max(abs(lo), abs(hi)):
            return 0.5 * (lo + hi)
        # secant candidate, kept only if it falls safely inside the bracket
        x = lo - flo * width / (fhi - flo)
        margin = 0.01 * width
        if not (lo + margin < x < hi - margin):
            x = 0.5 * (lo + hi)
        fx = f(x)
        if fx == 0.0:
            return x
        if flo * fx < 0.0:
            hi, fhi = x, fx
        else:
            lo, flo = x, fx
        # guard against secant stagnation: force a bisection step if the
        # bracket shrank by less than a quarter
        if (hi - lo) > 0.75 * width:
            mid = 0.5 * (lo + hi)
            fm = f(mid)
            if fm == 0.0:
                return mid
            if flo * fm < 0.0:
                hi, fhi = mid, fm
            else:
                lo, flo = mid, fm
    raise ConvergenceError(f"root finding did not converge in {tol.max_iter} iterations")


_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def maximize_1d(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: Tolerance = DEFAULT_TOL,
) -> tuple[float, float]:
    """Golden-section maximization of a unimodal f on [lo, hi].

    Returns (argmax, f(argmax)); the argmax is within abs_tol of the true
    maximizer provided f is unimodal (the caller's responsibility).
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    a, b = lo, hi
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(tol.max_iter):
        if (b - a) <= tol.abs_tol + tol.rel_tol * max(abs(a), abs(b)):
            x = 0.5 * (a + b)
            return x, f(x)
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = f(d)
    raise ConvergenceError(f"maximization did not converge in {tol.max_iter} iterations")
