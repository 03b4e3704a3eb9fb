"""Exponential growth rates of (weighted) length spectra.

Entropy is the growth rate of the number of classes of length at most T,
pressure-type quantities are growth rates of weighted counts. Two estimators
are provided. The bisection finds the tilt at which the tilted word length
shell sums stop growing, it needs every class of the shells and nothing
about lengths. The regression fits the weighted cumulative count over a
window below the completeness horizon of the data.
"""

import dataclasses
import logging
import math
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, stats

from .base import GROWTH_METHOD, Report
from .errors import *
from .spectrum import ColumnRef, CountingFunction, SpectrumTable, counting

__all__ = [
    "WindowPolicy",
    "GrowthEstimate",
    "growth_rate",
    "entropy",
    "BISECTION_TOLERANCE",
]

log = logging.getLogger(__name__)

BISECTION_TOLERANCE = 1e-10
TILT_LIMIT = 1e6


@dataclasses.dataclass(frozen=True)
class WindowPolicy:
    """Estimation window as fractions of the horizon.

    Attributes:
        lo (float): Lower edge, default 0.5. Also the first shell as a fraction of the last.
        hi (float): Upper edge, default 0.95.
        shells (int): Fewest shells the bisection accepts.
        min_items (int): Items required inside the window.
    """

    lo: float = 0.5
    hi: float = 0.95
    shells: int = 3
    min_items: int = 200


@dataclasses.dataclass
class GrowthEstimate(Report):
    """Growth rate estimate.

    Attributes:
        value: Estimate, the bisection value unless only the regression ran.
        stderr: Standard error of `value`.
        window: Absolute regression window (T_lo, T_hi).
        sample_count: Items used by the method that produced `value`.
        method: Method used.
        regression: Regression value, None when not computed or its window was too thin.
        bisection: Bisection value when computed.
        consistent: Regression and bisection agree within max(3 stderr, 0.02).
        shells: First and last shell of the bisection.
    """

    value: float
    stderr: float
    window: Tuple[float, float]
    sample_count: int
    method: GROWTH_METHOD
    regression: Optional[float] = None
    bisection: Optional[float] = None
    consistent: bool = True
    shells: Optional[Tuple[int, int]] = None

    def to_dict(self) -> Dict[str, Any]:
        d = super().to_dict()
        d["count"] = self.sample_count
        return d


def _window(t_max: float, policy: WindowPolicy) -> Tuple[float, float]:
    lo, hi = policy.lo * t_max, policy.hi * t_max
    if not (math.isfinite(lo) and math.isfinite(hi) and 0 <= lo < hi):
        raise WindowDegenerateError(lo, hi)
    return lo, hi


class _ShellSums:
    """Tilted sums ``Z_k(s) = sum of m * w * exp(-s * l)`` over the classes of each shell k."""

    def __init__(self, k: np.ndarray, x: np.ndarray, lt: np.ndarray) -> None:
        order = np.argsort(k, kind="stable")
        k, self.x, self.lt = k[order], x[order], lt[order]
        self.starts = np.flatnonzero(np.r_[True, np.diff(k) != 0])
        self.sizes = np.diff(np.r_[self.starts, k.size])
        self.k = k[self.starts].astype(float)

    def _tilted(self, s: float) -> Tuple[np.ndarray, np.ndarray]:
        t = self.lt - s * self.x
        top = np.maximum.reduceat(t, self.starts)
        p = np.exp(t - np.repeat(top, self.sizes))
        return top, p

    def pressure(self, s: float) -> Tuple[float, float, np.ndarray]:
        """Slope of log Z_k over the shells, its standard error and the tilted mean length per shell."""

        top, p = self._tilted(s)
        z = np.add.reduceat(p, self.starts)
        fit = stats.linregress(self.k, top + np.log(z))
        return float(fit.slope), float(fit.stderr), np.add.reduceat(p * self.x, self.starts) / z

    def slope(self, s: float) -> float:
        return self.pressure(s)[0]


def _shell_sums(lengths: CountingFunction, lw: np.ndarray, policy: WindowPolicy) -> Tuple[_ShellSums, Tuple[int, int], int]:
    x = lengths.values
    if lengths.word_lengths is not None:
        k, m = lengths.word_lengths, lengths.multiplicity.astype(float)
        k_max = int(k.max(initial=0))
    else:
        # bare lengths: unit shells, the factor l stands in for the rotations of a class
        k, m = np.ceil(x).astype(np.int64), x
        k_max = int(math.floor(lengths.horizon))
    k_lo = max(1, int(math.ceil(policy.lo * k_max)))
    sel = (k >= k_lo) & (k <= k_max) & (m > 0)
    count = int(sel.sum())
    if count < policy.min_items:
        raise InsufficientDataError(count, policy.min_items)
    sums = _ShellSums(k[sel], x[sel], np.log(m[sel]) + lw[sel])
    if sums.k.size < max(3, policy.shells):
        raise InsufficientDataError(int(sums.k.size), max(3, policy.shells))
    return sums, (k_lo, k_max), count


def _bisection(sums: _ShellSums) -> Tuple[float, float]:
    """Tilt at which the shell sums neither grow nor decay, and its standard error."""

    lo, hi = -1.0, 1.0
    while sums.slope(lo) < 0:
        hi, lo = lo, 2 * lo
        if lo < -TILT_LIMIT:
            raise WindowDegenerateError(lo, hi)
    while sums.slope(hi) > 0:
        lo, hi = hi, 2 * hi
        if hi > TILT_LIMIT:
            raise WindowDegenerateError(lo, hi)
    s = optimize.brentq(sums.slope, lo, hi, xtol=BISECTION_TOLERANCE)

    _, se, means = sums.pressure(s)
    drift = stats.linregress(sums.k, means).slope
    return float(s), float(se / abs(drift)) if drift else math.inf


def _regression(lengths: CountingFunction, lw: np.ndarray, policy: WindowPolicy) -> Tuple[float, float, int]:
    """Slope of log W(T), W(T) the sum of ``l * w`` over lengths at most T, at every distinct T of the window."""

    x = lengths.values
    lo, hi = _window(lengths.horizon, policy)
    end = int(np.searchsorted(x, hi, side="right"))
    first = int(np.searchsorted(x, lo, side="right"))
    count = end - first
    if count < policy.min_items:
        raise InsufficientDataError(count, policy.min_items)

    # the factor l cancels the 1/T correction of prime orbit counts
    cumulative = np.logaddexp.accumulate(np.log(x[:end]) + lw[:end])
    last = np.flatnonzero(np.r_[x[first + 1:end] != x[first:end - 1], True]) + first
    if last.size < 3:
        raise InsufficientDataError(int(last.size), 3)
    fit = stats.linregress(x[last], cumulative[last])
    return float(fit.slope), float(fit.stderr), count


def growth_rate(lengths: CountingFunction, weights: Optional[Sequence[float]] = None, *,
                log_weights: Optional[np.ndarray] = None, policy: WindowPolicy = WindowPolicy(),
                method: GROWTH_METHOD = GROWTH_METHOD.BOTH) -> GrowthEstimate:
    """Exponential growth rate of the weighted count W(T) = sum of weights of lengths at most T.

    With word lengths attached, the bisection sums each word length shell with
    rotation multiplicities. Bare lengths are grouped into unit shells up to the horizon.

    Args:
        lengths: Counting function.
        weights: Positive per-item weights aligned with ``lengths.values``.
        log_weights: Logarithms of the weights, alternative to `weights`.
        policy: Window policy.
        method: Regression, bisection or both. Both reports the bisection and
            keeps going without the regression when its window is too thin.

    Returns:
        GrowthEstimate: Estimate.

    Raises:
        InsufficientDataError: Fewer than ``policy.min_items`` items for the method that produces the value.
        WindowDegenerateError: Window empty or inverted.
    """

    x = lengths.values
    if log_weights is not None:
        lw = np.asarray(log_weights, dtype=float)
    elif weights is not None:
        w = np.asarray(weights, dtype=float)
        if w.size and not w.min() > 0:
            raise InvalidArgumentError("Weights must be positive.")
        lw = np.log(w)
    else:
        lw = np.zeros_like(x)
    if lw.shape != x.shape:
        raise InvalidArgumentError(f"{x.size} lengths but {lw.size} weights.")
    window = _window(lengths.horizon, policy)
    name = lengths.label or "growth"

    if method is GROWTH_METHOD.REGRESSION:
        value, stderr, count = _regression(lengths, lw, policy)
        return GrowthEstimate(value, stderr, window, count, method, regression=value)

    sums, shells, count = _shell_sums(lengths, lw, policy)
    value, stderr = _bisection(sums)
    if method is GROWTH_METHOD.BISECTION:
        return GrowthEstimate(value, stderr, window, count, method, bisection=value, shells=shells)

    try:
        regression, reg_stderr, _ = _regression(lengths, lw, policy)
    except InsufficientDataError as e:
        log.warning("%s: no regression below the horizon (%s)", name, e)
        return GrowthEstimate(value, stderr, window, count, method, None, value, False, shells)
    consistent = abs(regression - value) <= max(3 * reg_stderr, 0.02)
    if not consistent:
        log.warning("%s: regression %.6g and bisection %.6g disagree", name, regression, value)
    return GrowthEstimate(value, stderr, window, count, method, regression, value, consistent, shells)


def entropy(table: SpectrumTable, column: ColumnRef, *, policy: WindowPolicy = WindowPolicy(),
            method: GROWTH_METHOD = GROWTH_METHOD.BOTH) -> GrowthEstimate:
    """Topological entropy of one column, growth with unit weights."""

    return growth_rate(counting(table, column), policy=policy, method=method)
