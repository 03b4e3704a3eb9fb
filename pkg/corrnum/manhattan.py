"""Manhattan curves and the correlation number.

The Manhattan curve of two columns is sampled as ``b -> a(b)``, the growth
rate in the first length of the count weighted by ``exp(-b * l2)``. Its
endpoint slopes give the pressure intersections, the point where it is
parallel to the chord between its axis intercepts gives the correlation
number. Two more routes to the same number are provided: minimising the
growth of renormalized mixes, and fitting direct window counts.
"""

import concurrent.futures as cf
import dataclasses
import logging
import math
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .base import GROWTH_METHOD, Report
from .errors import *
from .growth import GrowthEstimate, WindowPolicy, entropy, growth_rate
from .representation import LengthFunctional, schottky_pair
from .spectrum import ColumnRef, SpectrumTable, compute_spectrum, counting, systole

__all__ = [
    "ManhattanCurve",
    "PressureIntersections",
    "TangentPoint",
    "MinsResult",
    "CountFit",
    "LengthComparison",
    "CorrelationReport",
    "PinchingReport",
    "check_proportional",
    "sample_curve",
    "pressure_intersections",
    "correlation_tangent",
    "correlation_mins",
    "correlation_count",
    "joint_horizon",
    "point_on_curve_residual",
    "compare_lengths",
    "entropy_systole_product",
    "correlate",
    "pinching_demo",
    "STENCIL",
    "CONVEXITY_TOLERANCE",
]

log = logging.getLogger(__name__)

STENCIL = 5
CONVEXITY_TOLERANCE = 5e-3
ENDPOINT_TOLERANCE = 0.02
PROPORTIONAL_TOLERANCE = 1e-9


@dataclasses.dataclass
class ManhattanCurve(Report):
    """Sampled Manhattan curve.

    Attributes:
        labels: Column headers of the two spectra.
        b: Grid of the second coordinate.
        a: Growth rate at each grid point.
        stderr: Standard error at each grid point.
        h1: Entropy of the first column.
        h2: Entropy of the second column.
        a_at_zero: Interpolated a(0), close to h1.
        root: Interpolated zero of a, close to h2.
        convexity_certificate: Largest violation of discrete convexity, 0 if convex.
        monotone: a strictly decreasing over the grid.
        endpoints_ok: Both intercepts within tolerance of the entropies.
        stencil: Points per local quadratic fit.
    """

    labels: Tuple[str, str]
    b: np.ndarray
    a: np.ndarray
    stderr: np.ndarray
    h1: float
    h2: float
    a_at_zero: float
    root: float
    convexity_certificate: float
    monotone: bool
    endpoints_ok: bool
    stencil: int = STENCIL

    @property
    def samples(self) -> List[Tuple[float, float, float]]:
        return list(zip(self.b.tolist(), self.a.tolist(), self.stderr.tolist()))


class PressureIntersections(NamedTuple):
    I_12: float
    I_21: float
    J_12: float
    J_21: float


class TangentPoint(NamedTuple):
    """Point of the curve parallel to the chord between its intercepts."""

    M: float
    a: float
    b: float


class MinsResult(NamedTuple):
    """Minimal growth over renormalized mixes.

    Attributes:
        M: Minimal growth rate.
        s0: Argmin in (0, 1).
        variation: Spread of the objective over the bounds.
        stderr: Largest growth rate stderr seen.
    """

    M: float
    s0: float
    variation: float
    stderr: float


@dataclasses.dataclass
class CountFit(Report):
    """Joint window counts and their exponential fit.

    Attributes:
        x: Window positions.
        counts: Classes in each window.
        epsilon: Window width parameter.
        renormalized: Windows on renormalized lengths.
        M: Fitted exponent, None when too few windows are nonempty.
        C: Fitted constant.
        C_over_eps2: C divided by epsilon squared.
        stderr: Standard error of M.
        residuals: Fit residuals at the nonempty windows.
        vanishing_threshold: Smallest grid x past which every window is empty.
    """

    x: np.ndarray
    counts: np.ndarray
    epsilon: float
    renormalized: bool
    M: Optional[float] = None
    C: Optional[float] = None
    C_over_eps2: Optional[float] = None
    stderr: Optional[float] = None
    residuals: Optional[np.ndarray] = None
    vanishing_threshold: Optional[float] = None


@dataclasses.dataclass
class LengthComparison(Report):
    """Domination and crossing of two spectra.

    Attributes:
        dominating: ``"col1"`` or ``"col2"`` if one raw spectrum is at least the other on every class.
        crossing: Renormalized spectra cross.
        above: Classes with renormalized first length above the second.
        below: Classes with renormalized first length below the second.
        sample_above: A few such words.
        sample_below: A few such words.
    """

    dominating: Optional[str]
    crossing: bool
    above: int
    below: int
    sample_above: List[str]
    sample_below: List[str]


@dataclasses.dataclass
class CorrelationReport(Report):
    """Correlation of two spectra by all three routes, with consistency flags.

    The count fit and its M are None when too few joint windows are nonempty.
    """

    labels: Tuple[str, str]
    h1: float
    h2: float
    h1_stderr: float
    h2_stderr: float
    I_12: float
    I_21: float
    J_12: float
    J_21: float
    M_tangent: float
    tangent_point: Tuple[float, float]
    M_mins: float
    s0: float
    point_on_curve_residual: float
    M_countfit: Optional[float]
    C_countfit: Optional[float]
    countfit: Optional[CountFit]
    convexity_certificate: float
    consistency: dict
    curve: ManhattanCurve = dataclasses.field(default=None, repr=False, metadata={"transient": True})

    @property
    def consistent(self) -> bool:
        return all(self.consistency.values())


@dataclasses.dataclass
class PinchingReport(Report):
    """Correlation along a pinching family.

    Attributes:
        epsilons: Short translation lengths.
        K: Long translation length.
        angle: Axis angle.
        M: Tangent correlation number per step, None when the pipeline failed.
        systoles: Systole of the sum column per step.
        m_decreasing: M strictly decreasing along the family.
        systole_increasing: Systole strictly increasing along the family.
        reports: Per-step correlation reports.
        failures: Per-step error message, None on success.
    """

    epsilons: List[float]
    K: float
    angle: float
    M: List[Optional[float]]
    systoles: List[float]
    m_decreasing: bool
    systole_increasing: bool
    reports: List[Optional[CorrelationReport]]
    failures: List[Optional[str]]


def check_proportional(l1: np.ndarray, l2: np.ndarray) -> Tuple[float, float, bool]:
    """Best factor kappa with l1 ~ kappa * l2, the pointwise residual and whether it vanishes."""

    kappa = float(np.dot(l1, l2) / np.dot(l2, l2))
    residual = float(np.abs(l1 - kappa * l2).max())
    return kappa, residual, residual <= PROPORTIONAL_TOLERANCE * max(1.0, float(np.abs(l1).max()))


def _stencil(b: np.ndarray, center: float, width: int = STENCIL) -> slice:
    k = int(np.argmin(np.abs(b - center)))
    lo = min(max(k - width // 2, 0), max(len(b) - width, 0))
    return slice(lo, lo + width)


def _local_quadratic(b: np.ndarray, a: np.ndarray, center: float, width: int = STENCIL) -> Tuple[np.ndarray, float]:
    """Quadratic through the stencil nearest `center`, in powers of ``b - center``, and its RMS residual."""

    sl = _stencil(b, center, width)
    t = b[sl] - center
    coef = np.polyfit(t, a[sl], 2)
    resid = a[sl] - np.polyval(coef, t)
    return coef, float(np.sqrt(np.mean(resid ** 2)))


def _second_differences(b: np.ndarray, a: np.ndarray) -> np.ndarray:
    slopes = np.diff(a) / np.diff(b)
    return np.diff(slopes) * 0.5 * (b[2:] - b[:-2])


def _root(b: np.ndarray, a: np.ndarray) -> float:
    below = np.nonzero(a <= 0)[0]
    if not below.size or below[0] == 0:
        return math.nan
    k = int(below[0])
    guess = b[k - 1] + (b[k] - b[k - 1]) * a[k - 1] / (a[k - 1] - a[k])
    coef, _ = _local_quadratic(b, a, guess)
    roots = np.roots(coef)
    real = roots[np.abs(roots.imag) < 1e-12].real + guess
    inside = real[(real >= b[k - 1]) & (real <= b[k])]
    return float(inside[np.argmin(np.abs(inside - guess))]) if inside.size else float(guess)


def sample_curve(table: SpectrumTable, col1: ColumnRef, col2: ColumnRef, b_grid: Optional[Sequence[float]] = None, *,
                 h1: Optional[float] = None, h2: Optional[float] = None, policy: WindowPolicy = WindowPolicy(),
                 force: bool = False, threads: int = 1) -> ManhattanCurve:
    """Sample the Manhattan curve of two columns.

    Args:
        table: Spectrum table.
        col1: First column, its lengths index the count.
        col2: Second column, its lengths weight the count.
        b_grid: Grid, default 33 points over [-0.1 h2, 1.1 h2].
        h1: Entropy of col1, estimated when None.
        h2: Entropy of col2, estimated when None.
        policy: Growth window policy.
        force: Sample even when the columns are proportional.
        threads: Worker threads over the grid.

    Raises:
        ProportionalSpectraError: Columns proportional and not forced.
    """

    i1, i2 = table.column_index(col1), table.column_index(col2)
    l1, l2 = table.values[:, i1], table.values[:, i2]
    kappa, residual, proportional = check_proportional(l1, l2)
    if proportional:
        if not force:
            raise ProportionalSpectraError(kappa, residual)
        log.warning("columns proportional (factor %.12g), sampling a line", kappa)

    if h1 is None:
        h1 = entropy(table, i1, policy=policy).value
    if h2 is None:
        h2 = entropy(table, i2, policy=policy).value
    b = np.linspace(-0.1 * h2, 1.1 * h2, 33) if b_grid is None else np.asarray(b_grid, dtype=float)
    if b.size < STENCIL or np.any(np.diff(b) <= 0):
        raise InvalidArgumentError(f"b grid needs {STENCIL} increasing points.")

    cf1 = counting(table, i1)
    l2_sorted = cf1.aligned(l2)

    def point(bk: float) -> GrowthEstimate:
        est = growth_rate(cf1, log_weights=-bk * l2_sorted, policy=policy, method=GROWTH_METHOD.BISECTION)
        log.debug("b = %.6g: a = %.6g +- %.2g", bk, est.value, est.stderr)
        return est

    with cf.ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        estimates = list(pool.map(point, b.tolist()))
    a = np.array([e.value for e in estimates])
    stderr = np.array([e.stderr for e in estimates])

    a_zero = float(_local_quadratic(b, a, 0.0)[0][-1])
    root = _root(b, a)
    violation = max(0.0, float(-_second_differences(b, a).min()))
    monotone = bool(np.all(np.diff(a) < 0))
    endpoints_ok = abs(a_zero - h1) <= ENDPOINT_TOLERANCE and abs(root - h2) <= ENDPOINT_TOLERANCE
    if not monotone:
        log.warning("curve not strictly decreasing")
    if violation > CONVEXITY_TOLERANCE:
        log.warning("convexity violated by %.3g", violation)
    if not endpoints_ok:
        log.warning("endpoints off: a(0) = %.6g vs h1 = %.6g, root %.6g vs h2 = %.6g", a_zero, h1, root, h2)
    log.info("sampled curve over %d points", b.size)

    return ManhattanCurve((table.columns[i1].header, table.columns[i2].header), b, a, stderr, float(h1), float(h2),
                          a_zero, root, violation, monotone, endpoints_ok)


def pressure_intersections(curve: ManhattanCurve, threshold: float = 0.01) -> PressureIntersections:
    """Pressure intersections from the endpoint slopes of the curve.

    Raises:
        EndpointFitUnstableError: A local quadratic fit misses its stencil by more than `threshold`.
    """

    if not math.isfinite(curve.root):
        raise EndpointFitUnstableError("a = 0", math.inf, threshold)
    slopes = []
    for where, center in (("b = 0", 0.0), ("a = 0", curve.root)):
        coef, residual = _local_quadratic(curve.b, curve.a, center)
        if residual > threshold:
            raise EndpointFitUnstableError(where, residual, threshold)
        slopes.append(float(coef[1]))
    s0, s1 = slopes
    I_12 = -s0
    I_21 = -1.0 / s1
    return PressureIntersections(I_12, I_21, curve.h2 / curve.h1 * I_12, curve.h1 / curve.h2 * I_21)


def correlation_tangent(curve: ManhattanCurve) -> TangentPoint:
    """Point where the curve is parallel to the chord between (h1, 0) and (0, h2).

    Slopes come from local quadratic fits at every grid point. The first grid
    interval where they reach the target is refit by one quadratic centered
    on it, whose derivative is solved for the target.

    Raises:
        SlopeNotBracketedError: Target slope outside the sampled range.
    """

    if curve.convexity_certificate > CONVEXITY_TOLERANCE:
        log.warning("tangent on a curve violating convexity by %.3g", curve.convexity_certificate)
    b, a = curve.b, curve.a
    slopes = np.array([_local_quadratic(b, a, bk)[0][1] for bk in b])
    if np.any(np.diff(slopes) < 0):
        log.warning("curve slopes not monotone, largest drop %.3g", float(-np.diff(slopes).min()))
    target = -curve.h1 / curve.h2
    if not slopes[0] <= target <= slopes[-1]:
        raise SlopeNotBracketedError(target, float(slopes[0]), float(slopes[-1]))

    k = max(int(np.argmax(slopes >= target)), 1)
    center = 0.5 * (b[k - 1] + b[k])
    coef, _ = _local_quadratic(b, a, center)
    if coef[0] > 0:
        t = (target - coef[1]) / (2 * coef[0])
    else:
        lo, hi = slopes[k - 1], slopes[k]
        t = (b[k - 1] - center) + (b[k] - b[k - 1]) * ((target - lo) / (hi - lo) if hi > lo else 0.5)
    t = float(np.clip(t, b[k - 1] - center, b[k] - center))
    b_star = float(center + t)
    a_star = float(np.polyval(coef, t))
    return TangentPoint(a_star / curve.h1 + b_star / curve.h2, a_star, b_star)


def _mix_weights(n_columns: int, i1: int, i2: int, s: float, h1: float, h2: float) -> np.ndarray:
    w = np.zeros(n_columns)
    w[i1] += s * h1
    w[i2] += (1 - s) * h2
    return w


def correlation_mins(table: SpectrumTable, col1: ColumnRef, col2: ColumnRef, h1: float, h2: float, *,
                     policy: WindowPolicy = WindowPolicy(), bounds: Tuple[float, float] = (0.02, 0.98),
                     xatol: float = 1e-4) -> MinsResult:
    """Minimal growth rate of ``s * h1 * l1 + (1 - s) * h2 * l2`` over s.

    Raises:
        FlatObjectiveError: Objective varies by less than twice its standard error.
    """

    i1, i2 = table.column_index(col1), table.column_index(col2)
    stderrs: List[float] = []

    def objective(s: float) -> float:
        est = growth_rate(counting(table, mix=_mix_weights(len(table.columns), i1, i2, s, h1, h2)),
                          policy=policy, method=GROWTH_METHOD.BISECTION)
        stderrs.append(est.stderr)
        return est.value

    res = optimize.minimize_scalar(objective, bounds=bounds, method="bounded", options={"xatol": xatol})
    samples = [objective(s) for s in np.linspace(bounds[0], bounds[1], 9)]
    variation = max(samples + [float(res.fun)]) - min(samples + [float(res.fun)])
    stderr = max(stderrs)
    if variation < 2 * stderr:
        raise FlatObjectiveError(variation, stderr)
    return MinsResult(float(res.fun), float(res.x), variation, stderr)


def point_on_curve_residual(curve: ManhattanCurve, M: float, s0: float) -> float:
    """Distance in a between the curve and ``(s0 * h1 * M, (1 - s0) * h2 * M)``."""

    b = (1 - s0) * curve.h2 * M
    coef, _ = _local_quadratic(curve.b, curve.a, b)
    return abs(float(coef[-1]) - s0 * curve.h1 * M)


def _window_counts(u: np.ndarray, v: np.ndarray, x: np.ndarray, wu: float, wv: float) -> np.ndarray:
    order = np.argsort(u, kind="stable")
    us, vs = u[order], v[order]
    counts = np.empty(x.size, dtype=np.int64)
    for k, xk in enumerate(x):
        lo = np.searchsorted(us, xk, side="right")
        hi = np.searchsorted(us, xk + wu, side="left")
        seg = vs[lo:hi]
        counts[k] = np.count_nonzero((seg > xk) & (seg < xk + wv))
    return counts


def correlation_count(table: SpectrumTable, col1: ColumnRef, col2: ColumnRef, h1: float, h2: float,
                      epsilon: float = 0.2, x_grid: Optional[Sequence[float]] = None, *,
                      renormalized: bool = True) -> CountFit:
    """Count classes whose two lengths both sit in a short window at x, and fit the exponent.

    Renormalized windows are ``h1 * l1`` in (x, x + h1 * epsilon) and ``h2 * l2``
    in (x, x + h2 * epsilon). Raw windows are ``l1`` and ``l2`` in (x, x + epsilon).
    The fit is ``log(count * x**1.5) = log C + M * x``, least squares weighted
    by the square root of each count.

    Args:
        x_grid: Window positions, default 12 points over [0.35, 0.8] of the joint horizon,
            the smallest larger window coordinate among classes of the cutoff word length.

    Raises:
        InvalidArgumentError: Non-positive epsilon.
        EmptyWindowsError: Fewer than 5 renormalized windows are nonempty.
    """

    if not epsilon > 0:
        raise InvalidArgumentError(f"epsilon must be positive, {epsilon} given.")
    i1, i2 = table.column_index(col1), table.column_index(col2)
    l1, l2 = table.values[:, i1], table.values[:, i2]
    if renormalized:
        u, v, wu, wv = h1 * l1, h2 * l2, h1 * epsilon, h2 * epsilon
    else:
        u, v, wu, wv = l1, l2, epsilon, epsilon

    if x_grid is None:
        horizon = joint_horizon(table, u, v)
        x = np.linspace(0.35 * horizon, 0.8 * horizon, 12)
    else:
        x = np.asarray(x_grid, dtype=float)
    counts = _window_counts(u, v, x, wu, wv)

    nonzero = np.nonzero(counts)[0]
    fit = CountFit(x, counts, float(epsilon), renormalized)
    if counts[-1] == 0:
        tail = np.nonzero(counts)[0]
        fit.vanishing_threshold = float(x[tail[-1] + 1] if tail.size else x[0])

    if nonzero.size < 5:
        if renormalized:
            raise EmptyWindowsError(int(nonzero.size))
        return fit

    xs = x[nonzero]
    ys = np.log(counts[nonzero] * xs ** 1.5)
    (slope, intercept), cov = np.polyfit(xs, ys, 1, w=np.sqrt(counts[nonzero]), cov=True)
    fit.M = float(slope)
    fit.C = float(math.exp(intercept))
    fit.C_over_eps2 = fit.C / epsilon ** 2
    fit.stderr = float(math.sqrt(cov[0, 0]))
    fit.residuals = ys - (intercept + slope * xs)
    return fit


def joint_horizon(table: SpectrumTable, u: np.ndarray, v: np.ndarray) -> float:
    """Smallest ``max(u, v)`` over classes of the cutoff word length, below it both coordinates are complete."""

    top = table.word_lengths == table.n_max
    return float(np.maximum(u, v)[top].min()) if top.any() else float(np.maximum(u, v).max(initial=0.0))


def compare_lengths(table: SpectrumTable, col1: ColumnRef, col2: ColumnRef, h1: float, h2: float,
                    samples: int = 5) -> LengthComparison:
    """Raw domination and renormalized crossing of two spectra."""

    i1, i2 = table.column_index(col1), table.column_index(col2)
    l1, l2 = table.values[:, i1], table.values[:, i2]
    dominating = "col1" if np.all(l1 >= l2) else "col2" if np.all(l2 >= l1) else None
    d = h1 * l1 - h2 * l2
    above, below = np.nonzero(d > 0)[0], np.nonzero(d < 0)[0]
    return LengthComparison(dominating, bool(above.size and below.size), int(above.size), int(below.size),
                            [table.words[i] for i in above[:samples]], [table.words[i] for i in below[:samples]])


def entropy_systole_product(table: SpectrumTable, columns: Sequence[ColumnRef], *,
                            policy: WindowPolicy = WindowPolicy()) -> Tuple[float, float, float]:
    """Systole, entropy and their product for the sum of the given columns."""

    w = np.zeros(len(table.columns))
    for col in columns:
        w[table.column_index(col)] += 1.0
    cf_ = counting(table, mix=w)
    sys_ = systole(cf_)
    h = growth_rate(cf_, policy=policy).value
    return sys_, h, sys_ * h


def correlate(table: SpectrumTable, col1: ColumnRef = 0, col2: ColumnRef = 1, *,
              b_grid: Optional[Sequence[float]] = None, epsilon: float = 0.2,
              x_grid: Optional[Sequence[float]] = None, policy: WindowPolicy = WindowPolicy(),
              force: bool = False, threads: int = 1) -> CorrelationReport:
    """Full correlation pipeline for two columns.

    Entropies, curve, pressure intersections, then the correlation number by
    the tangent, the minimum over mixes and the count fit.

    Raises:
        ProportionalSpectraError: Columns proportional and not forced.
        NumericalError: Any step failed.
    """

    kappa, residual, proportional = check_proportional(table.column(col1), table.column(col2))
    if proportional and not force:
        raise ProportionalSpectraError(kappa, residual)
    h1_est = entropy(table, col1, policy=policy)
    h2_est = entropy(table, col2, policy=policy)
    h1, h2 = h1_est.value, h2_est.value
    log.info("entropies %.6g, %.6g", h1, h2)

    curve = sample_curve(table, col1, col2, b_grid, h1=h1, h2=h2, policy=policy, force=force, threads=threads)
    pi = pressure_intersections(curve)
    tangent = correlation_tangent(curve)
    mins = correlation_mins(table, col1, col2, h1, h2, policy=policy)
    residual = point_on_curve_residual(curve, mins.M, mins.s0)
    try:
        countfit: Optional[CountFit] = correlation_count(table, col1, col2, h1, h2, epsilon, x_grid)
    except EmptyWindowsError as e:
        log.warning("count fit skipped: %s", e)
        countfit = None
    M_countfit = countfit.M if countfit is not None else None

    estimates = [m for m in (tangent.M, mins.M, M_countfit) if m is not None]
    consistency = {
        "tangent_mins": abs(tangent.M - mins.M) <= 0.02,
        "tangent_countfit": M_countfit is not None and abs(tangent.M - M_countfit) <= 0.1,
        "point_on_curve": residual <= 0.02,
        "m_in_unit_interval": all(0 < m < 1 for m in estimates),
        "j_at_least_one": min(pi.J_12, pi.J_21) >= 0.98,
        "convex": curve.convexity_certificate <= CONVEXITY_TOLERANCE,
        "endpoints": curve.endpoints_ok,
        "growth_methods": h1_est.consistent and h2_est.consistent,
    }
    for name, ok in consistency.items():
        if not ok:
            log.warning("consistency check %s failed", name)

    return CorrelationReport(
        labels=curve.labels,
        h1=h1,
        h2=h2,
        h1_stderr=h1_est.stderr,
        h2_stderr=h2_est.stderr,
        I_12=pi.I_12,
        I_21=pi.I_21,
        J_12=pi.J_12,
        J_21=pi.J_21,
        M_tangent=tangent.M,
        tangent_point=(tangent.a, tangent.b),
        M_mins=mins.M,
        s0=mins.s0,
        point_on_curve_residual=residual,
        M_countfit=M_countfit,
        C_countfit=countfit.C if countfit is not None else None,
        countfit=countfit,
        convexity_certificate=curve.convexity_certificate,
        consistency=consistency,
        curve=curve,
    )


def _strictly(values: Sequence[Optional[float]], decreasing: bool) -> bool:
    if any(v is None for v in values):
        return False
    pairs = zip(values, values[1:])
    return all(x > y for x, y in pairs) if decreasing else all(x < y for x, y in pairs)


def pinching_demo(eps_list: Sequence[float] = (1.0, 0.5, 0.25), K: float = 3.0, angle: float = math.pi / 2, *,
                  n_max: int = 10, policy: WindowPolicy = WindowPolicy(), threads: int = 1,
                  seed: int = 0) -> PinchingReport:
    """Correlate ``schottky_pair(eps, K)`` with ``schottky_pair(K, eps)`` along a shrinking eps.

    Pilot validation is forced, small eps gives pairs that are not discrete.
    Step failures and failed gates are recorded and logged, never raised.
    """

    if any(x <= y for x, y in zip(eps_list, eps_list[1:])):
        raise InvalidArgumentError(f"epsilons must decrease, {list(eps_list)} given.")

    phi = LengthFunctional.simple_root(1, 2)
    ms: List[Optional[float]] = []
    systoles: List[float] = []
    reports: List[Optional[CorrelationReport]] = []
    failures: List[Optional[str]] = []
    for eps in eps_list:
        rho = schottky_pair(eps, K, angle, label="rho")
        eta = schottky_pair(K, eps, angle, label="eta")
        table = compute_spectrum([(rho, phi), (eta, phi)], 2, n_max, threads=threads, force=True, seed=seed)
        systoles.append(float(systole(counting(table, mix=[1.0, 1.0]))))
        try:
            report = correlate(table, 0, 1, policy=policy, threads=threads)
        except CorrError as e:
            log.warning("eps = %g: %s", eps, e)
            ms.append(None)
            reports.append(None)
            failures.append(str(e))
            continue
        ms.append(report.M_tangent)
        reports.append(report)
        failures.append(None)

    m_decreasing = _strictly(ms, True)
    systole_increasing = _strictly(systoles, False)
    if not m_decreasing:
        log.warning("correlation number not strictly decreasing: %s", ms)
    if not systole_increasing:
        log.warning("sum systole not strictly increasing: %s", systoles)
    return PinchingReport(list(eps_list), K, angle, ms, systoles, m_decreasing, systole_increasing, reports, failures)
