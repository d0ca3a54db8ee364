"""Mean-offspring series and numerical solution of the Malthusian parameter.

The number of children a vertex ever produces during an Exp(theta)-tilted
window has tail probabilities given by a product over attachment weights:

    P(at least k children) = prod_{i<k} f(i) / (theta + f(i))

so the mean m(theta) is the sum of these tails over k >= 1.  The Malthusian
parameter is the root of m(theta) = 1.

Truncation uses an exact telescoping identity instead of a heuristic cutoff.
Writing p_k for the tail and S_K = sum_{k>K} p_k, the recurrence
p_{k+1}(theta + f(k)) = p_k f(k) telescopes to

    theta * S_K = f(K) p_K + sum_{j>K} (f(j) - f(j-1)) p_j

and since f is nondecreasing with increments confined to [d_lo, d_hi]
beyond K, the remainder is enclosed:

    f(K) p_K / (theta - d_lo)  <=  S_K  <=  f(K) p_K / (theta - d_hi).

For uniform and linear weights, and for tables past their last entry, the
increments are constant, the enclosure has zero width, and the partial sum
plus midpoint is exact.  For exponent-alpha weights the width shrinks with
the largest remaining increment.  When theta never exceeds d_lo the same
identity forces S_K to be infinite, which reports divergence exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .attraction import AttractionSpec, evaluate, evaluate_many, max_increment_beyond

__all__ = [
    "MalthusEstimate",
    "SeriesNotConverged",
    "mean_offspring",
    "offspring_tail",
    "solve_malthusian",
]

_TRUNC_TARGET = 1e-16  # absolute half-width at which the series closes
_SOFT_BOUND = 1e-10  # at the term cap, a bound this small still returns
_MAX_TERMS = 10**8
_CHUNK_START = 64
_CHUNK_CAP = 1 << 20
_BRACKET_FLOOR = 1e-3
_BRACKET_CEIL = 64.0
_MAX_BISECTIONS = 256


class SeriesNotConverged(RuntimeError):
    """The enclosure did not close within the term cap.

    Carries ``partial_sum`` (the series through the cap plus the midpoint
    correction) and ``truncation_bound`` (half-width of the enclosure).
    """

    def __init__(self, partial_sum: float, truncation_bound: float):
        super().__init__(
            f"series not converged: partial sum {partial_sum:.12g}, "
            f"tail bound {truncation_bound:.3g} after {_MAX_TERMS} terms"
        )
        self.partial_sum = partial_sum
        self.truncation_bound = truncation_bound


@dataclass(frozen=True)
class MalthusEstimate:
    """Root of the mean-offspring equation with solver diagnostics."""

    theta: float
    residual: float
    bracket: tuple[float, float]
    iterations: int
    truncation_bound: float


def offspring_tail(spec: AttractionSpec, theta: float, k: int) -> float:
    """P(a vertex bears at least k children during an Exp(theta) window)."""
    if theta <= 0.0:
        raise ValueError(f"theta must be positive, got {theta}")
    if k < 0:
        raise ValueError(f"k must be a nonnegative integer, got {k}")
    p = 1.0
    for i in range(k):
        fi = evaluate(spec, i)
        p *= fi / (theta + fi)
    return p


def _min_increment(spec: AttractionSpec) -> float:
    # infimum of f(j) - f(j-1) over the remaining tail; only the linear
    # kind keeps its increments bounded away from zero
    return 1.0 if spec.kind == "linear" else 0.0


def _mean_detail(spec: AttractionSpec, theta: float) -> tuple[float, float, int]:
    """Return (mean, truncation half-width, terms summed)."""
    if theta <= 0.0:
        raise ValueError(f"theta must be positive, got {theta}")
    d_lo = _min_increment(spec)
    if theta <= d_lo:
        # theta*S_K >= f(K)p_K + d_lo*S_K forces S_K = +inf
        return math.inf, 0.0, 0
    partial = 0.0
    p = 1.0  # tail probability p_K at the current truncation index
    k = 0
    chunk = _CHUNK_START
    value = math.inf
    half = math.inf
    while True:
        fk = evaluate(spec, k)
        d_hi = max_increment_beyond(spec, k)
        if theta > d_hi:
            s_lo = fk * p / (theta - d_lo)
            s_hi = fk * p / (theta - d_hi)
            half = 0.5 * (s_hi - s_lo)
            value = partial + 0.5 * (s_lo + s_hi)
            # stop once the enclosure closes or the terms fall below the
            # truncation threshold; the reported bound stays rigorous
            if half <= _TRUNC_TARGET or p < _TRUNC_TARGET:
                return value, half, k
        if k >= _MAX_TERMS:
            break
        m = min(chunk, _MAX_TERMS - k)
        fs = evaluate_many(spec, np.arange(k, k + m, dtype=np.int64))
        running = np.cumprod(fs / (theta + fs))
        partial += p * float(running.sum())
        p *= float(running[-1])
        k += m
        chunk = min(chunk * 2, _CHUNK_CAP)
    if half <= _SOFT_BOUND:
        return value, half, _MAX_TERMS
    raise SeriesNotConverged(value if math.isfinite(value) else partial, half)


def mean_offspring(spec: AttractionSpec, theta: float) -> float:
    """Expected lifetime offspring count under an Exp(theta) observation window.

    Exact (up to the reported enclosure, at most 1e-16 here) for any valid
    spec; returns ``inf`` when the series provably diverges, which happens
    for linear weights at theta <= 1.
    """
    value, _, _ = _mean_detail(spec, theta)
    return value


def solve_malthusian(spec: AttractionSpec, tol: float = 1e-9) -> MalthusEstimate:
    """Bisect mean_offspring(theta) = 1 to a bracket narrower than ``tol``.

    Exponent-kind specs start from the bracket (1 + 1e-6, 2 - 1e-6), which
    is guaranteed to straddle the root; other kinds expand geometrically
    from it, failing once the search range (0.001, 64) is exhausted.
    """
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")

    def g(th: float) -> tuple[float, float]:
        value, bound, _ = _mean_detail(spec, th)
        return value - 1.0, bound

    lo, hi = 1.0 + 1e-6, 2.0 - 1e-6
    g_lo, _ = g(lo)
    g_hi, _ = g(hi)
    if spec.kind != "alpha_sublinear" or g_lo <= 0.0 or g_hi >= 0.0:
        while g_lo <= 0.0:  # root sits below the bracket
            hi, g_hi = lo, g_lo
            lo *= 0.5
            if lo < _BRACKET_FLOOR:
                lo = _BRACKET_FLOOR
                g_lo, _ = g(lo)
                if g_lo <= 0.0:
                    raise ValueError(
                        "no Malthusian parameter in search range "
                        f"({_BRACKET_FLOOR:g}, {_BRACKET_CEIL:g})"
                    )
                break
            g_lo, _ = g(lo)
        while g_hi >= 0.0:  # root sits above the bracket
            lo, g_lo = hi, g_hi
            hi *= 2.0
            if hi > _BRACKET_CEIL:
                hi = _BRACKET_CEIL
                g_hi, _ = g(hi)
                if g_hi >= 0.0:
                    raise ValueError(
                        "no Malthusian parameter in search range "
                        f"({_BRACKET_FLOOR:g}, {_BRACKET_CEIL:g})"
                    )
                break
            g_hi, _ = g(hi)

    iterations = 0
    while True:
        mid = 0.5 * (lo + hi)
        g_mid, bound = g(mid)
        iterations += 1
        done = (hi - lo) < tol and abs(g_mid) <= tol
        if done or g_mid == 0.0 or iterations >= _MAX_BISECTIONS or not lo < mid < hi:
            return MalthusEstimate(
                theta=mid,
                residual=abs(g_mid),
                bracket=(lo, hi),
                iterations=iterations,
                truncation_bound=bound,
            )
        if g_mid > 0.0:
            lo = mid
        else:
            hi = mid
