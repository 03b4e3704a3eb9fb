"""Matrix representations of free groups.

Jordan projections, length functionals over the simple roots and the
constructors used at desk scale: Schottky-type pairs in SL(2, R), the
irreducible (symmetric power) embedding and the contragredient involution.
"""

import dataclasses
import itertools
import logging
import math
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import stats

from .base import VERDICT, Report
from .errors import *
from .freegroup import ConjClass

__all__ = [
    "JordanVector",
    "LengthFunctional",
    "Representation",
    "LoxodromyReport",
    "evaluate",
    "jordan_projection",
    "length",
    "batch_jordan",
    "sym_power_embed",
    "contragredient",
    "schottky_pair",
    "validate_loxodromy",
    "load_representation",
    "dump_representation",
    "exterior_power",
    "OVERFLOW_GUARD",
]

log = logging.getLogger(__name__)

JordanVector = np.ndarray
"""Sorted log-moduli of eigenvalues, nonincreasing and summing to zero."""

OVERFLOW_GUARD = 1e280


@dataclasses.dataclass(frozen=True)
class LengthFunctional:
    """Nonnegative combination of simple roots.

    Evaluates to ``scale * sum(c_i * (x_i - x_{i+1}))`` on a Jordan vector.

    Attributes:
        coefficients (Tuple[float, ...]): c_1, ..., c_{d-1}.
        scale (float): Overall factor, 1/2 for the Hilbert functional.
    """

    coefficients: Tuple[float, ...]
    scale: float = 1.0
    name: Optional[str] = None

    def __post_init__(self) -> None:
        c = tuple(float(x) for x in self.coefficients)
        object.__setattr__(self, "coefficients", c)
        if not c or any(x < 0 or not math.isfinite(x) for x in c) or sum(c) <= 0:
            raise InvalidArgumentError(f"Coefficients must be nonnegative and not all zero, {c} given.")
        if not self.scale > 0:
            raise InvalidArgumentError(f"Scale must be positive, {self.scale} given.")

    @classmethod
    def hilbert(cls, d: int = 3) -> "LengthFunctional":
        """Hilbert length, half the log of the top to bottom eigenvalue ratio."""

        return cls((1.0,) * (d - 1), 0.5, "H")

    @classmethod
    def simple_root(cls, i: int, d: int) -> "LengthFunctional":
        """The i-th simple root, 1-based."""

        if not 1 <= i <= d - 1:
            raise InvalidArgumentError(f"Simple root index {i} out of range for d = {d}.")
        c = [0.0] * (d - 1)
        c[i - 1] = 1.0
        return cls(tuple(c), 1.0, f"a{i}")

    @classmethod
    def parse(cls, descriptor: Union[str, Mapping[str, Any]], d: int) -> "LengthFunctional":
        """Build from ``"H"``, ``"a<i>"`` or ``{"coefficients": [...], "scale": s}``.

        Raises:
            InvalidArgumentError: Unknown descriptor or wrong dimension.
        """

        if isinstance(descriptor, Mapping):
            phi = cls(tuple(descriptor["coefficients"]), float(descriptor.get("scale", 1.0)))
        elif descriptor in ("H", "hilbert"):
            phi = cls.hilbert(d)
        elif isinstance(descriptor, str) and descriptor[:1] == "a" and descriptor[1:].isdigit():
            phi = cls.simple_root(int(descriptor[1:]), d)
        else:
            raise InvalidArgumentError(f"Unknown functional {descriptor!r}.")
        if phi.dimension != d:
            raise InvalidArgumentError(f"Functional {phi.descriptor} is for d = {phi.dimension}, not {d}.")
        return phi

    @property
    def dimension(self) -> int:
        return len(self.coefficients) + 1

    @property
    def descriptor(self) -> str:
        if self.name is not None:
            return self.name
        coeffs = ",".join(f"{c:g}" for c in self.coefficients)
        return f"{self.scale:g}*({coeffs})"

    def evaluate(self, lam: np.ndarray) -> np.ndarray:
        """Evaluate on Jordan vectors, shape (..., d)."""

        roots = lam[..., :-1] - lam[..., 1:]
        return self.scale * (roots @ np.asarray(self.coefficients))


def exterior_power(m: np.ndarray, k: int) -> np.ndarray:
    """k-th compound matrix, minors indexed by lexicographic k-subsets."""

    d = m.shape[0]
    subsets = list(itertools.combinations(range(d), k))
    out = np.empty((len(subsets), len(subsets)))
    for a, rows in enumerate(subsets):
        for b, cols in enumerate(subsets):
            out[a, b] = np.linalg.det(m[np.ix_(rows, cols)])
    return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class Representation:
    """Assignment of unimodular real matrices to free group generators.

    Attributes:
        label (str): Name used in column headers and reports.
        eig_tolerance (float): Relative eigenvalue modulus gap below which a class is not loxodromic.
        params (dict): Constructor parameters, echoed by `dump_representation`.
    """

    DET_TOLERANCE = 1e-9
    INVERSE_TOLERANCE = 1e-12

    def __init__(self, generators: Sequence[Any], label: str = "rho", *,
                 eig_tolerance: float = 1e-10, params: Optional[Mapping[str, Any]] = None) -> None:
        """Matrix representation.

        Args:
            generators: One d x d matrix per generator.
            label: Name of the representation.
            eig_tolerance: Loxodromy tolerance, default 1e-10.
            params: Constructor parameters.

        Raises:
            InvalidRepresentationError: Shapes, determinants or inverses are invalid.
        """

        mats = np.array(generators, dtype=float)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise InvalidRepresentationError(f"Generators must be square matrices, shape {mats.shape} given.")
        r, d, _ = mats.shape
        if r < 2 or d < 2:
            raise InvalidRepresentationError(f"Need rank >= 2 and dimension >= 2, got rank {r}, d {d}.")
        if not np.all(np.isfinite(mats)):
            raise InvalidRepresentationError("Generator entries must be finite.")

        dets = np.linalg.det(mats)
        if np.any(np.abs(np.abs(dets) - 1) > self.DET_TOLERANCE):
            raise InvalidRepresentationError(f"Generators must have |det| = 1, got {dets.tolist()}.")

        inverses = np.linalg.inv(mats)
        for g, (a, b) in enumerate(zip(mats, inverses)):
            bound = self.INVERSE_TOLERANCE * max(1.0, np.linalg.norm(a, np.inf) * np.linalg.norm(b, np.inf))
            if np.abs(a @ b - np.eye(d)).max() > bound:
                raise InvalidRepresentationError(f"Generator {g} inverse residual over {bound:.3g}.")

        self.label = label
        self.eig_tolerance = float(eig_tolerance)
        self.params: Dict[str, Any] = dict(params or {})

        self._generators = _frozen(mats)
        self._inverses = _frozen(inverses)

        # letter code 2g -> generator g, 2g + 1 -> its inverse
        letters = np.empty((2 * r, d, d))
        letters[0::2] = mats
        letters[1::2] = inverses
        self._letters = _frozen(letters)
        self._log_dets = _frozen(np.log(np.abs(np.linalg.det(letters))))
        self._compounds = [self._letters] + [
            _frozen(np.array([exterior_power(m, k) for m in letters])) for k in range(2, d)
        ]

    @property
    def dimension(self) -> int:
        return self._generators.shape[1]

    @property
    def rank(self) -> int:
        return self._generators.shape[0]

    @property
    def generator_images(self) -> np.ndarray:
        return self._generators

    @property
    def inverse_images(self) -> np.ndarray:
        return self._inverses

    def letter_images(self, k: int = 1) -> np.ndarray:
        """Images of all letters in the k-th exterior power, indexed by letter code."""

        return self._compounds[k - 1]

    def __repr__(self) -> str:
        return f"Representation({self.label!r}, d={self.dimension}, rank={self.rank})"


def evaluate(rep: Representation, c: ConjClass) -> np.ndarray:
    """Ordered product of letter images along the canonical word.

    Raises:
        MatrixOverflowError: An entry exceeds 1e280.
    """

    mats = rep.letter_images(1)
    m = np.eye(rep.dimension)
    for code in c.codes:
        m = m @ mats[code]
        top = float(np.abs(m).max())
        if top > OVERFLOW_GUARD or not math.isfinite(top):
            raise MatrixOverflowError(c.word, top)
    return m


def _log_spectral_radius(mats: np.ndarray, codes: np.ndarray) -> np.ndarray:
    """log spectral radius of the products, rescaled after every step."""

    prod = mats[codes[:, 0]]
    scale = np.abs(prod).max(axis=(1, 2))
    prod = prod / scale[:, None, None]
    log_scale = np.log(scale)
    for j in range(1, codes.shape[1]):
        prod = np.matmul(prod, mats[codes[:, j]])
        scale = np.abs(prod).max(axis=(1, 2))
        prod /= scale[:, None, None]
        log_scale += np.log(scale)
    radius = np.abs(np.linalg.eigvals(prod)).max(axis=1)
    with np.errstate(divide="ignore"):
        return np.log(radius) + log_scale


def batch_jordan(rep: Representation, codes: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Jordan projections of a block of words of equal length.

    The sum of the top k log-moduli is the log spectral radius of the product
    in the k-th exterior power, so the small eigenvalues never come from
    cancellation against the large ones.

    Args:
        rep: Representation.
        codes: (N, n) letter codes.

    Returns:
        np.ndarray: (N, d) Jordan vectors.
        np.ndarray: (N,) minimal relative gap between consecutive eigenvalue moduli.
    """

    codes = np.asarray(codes)
    d = rep.dimension
    n_rows = codes.shape[0]
    partial = np.zeros((n_rows, d + 1))
    for k in range(1, d):
        partial[:, k] = _log_spectral_radius(rep.letter_images(k), codes)
    partial[:, d] = rep._log_dets[codes].sum(axis=1)

    lam = np.diff(partial, axis=1)
    lam = -np.sort(-lam, axis=1)
    lam -= lam.mean(axis=1, keepdims=True)
    gaps = -np.expm1(-(lam[:, :-1] - lam[:, 1:]))
    return lam, gaps.min(axis=1)


def jordan_projection(rep: Representation, c: ConjClass) -> JordanVector:
    """Jordan projection of the image of a class.

    Raises:
        NotLoxodromicError: Some relative eigenvalue modulus gap is at most `eig_tolerance`.
    """

    lam, gap = batch_jordan(rep, np.array([c.codes], dtype=np.int64))
    if not gap[0] > rep.eig_tolerance:
        raise NotLoxodromicError(c.word, float(gap[0]))
    return lam[0]


def length(rep: Representation, c: ConjClass, phi: LengthFunctional) -> float:
    """phi-length of a class, strictly positive.

    Raises:
        NotLoxodromicError: Class is not loxodromic.
    """

    return float(phi.evaluate(jordan_projection(rep, c)))


def _sym_power_matrix(g: np.ndarray, m: int) -> np.ndarray:
    a, b = g[0]
    c, d = g[1]
    out = np.zeros((m + 1, m + 1))
    for j in range(m + 1):
        # e1 -> a e1 + c e2, e2 -> b e1 + d e2, monomial e1^(m-i) e2^i <-> z^i
        poly = P.polymul(P.polypow([a, c], m - j), P.polypow([b, d], j))
        out[:len(poly), j] = poly[:m + 1]
    return out


def sym_power_embed(rep2: Representation, d_target: int, label: Optional[str] = None) -> Representation:
    """Compose with the irreducible representation of SL(2, R) in dimension d_target.

    Image matrices act on homogeneous polynomials of degree d_target - 1 in
    two variables, in the monomial basis.

    Raises:
        InvalidArgumentError: Base is not 2-dimensional or d_target < 3.
    """

    if rep2.dimension != 2:
        raise InvalidArgumentError(f"Base representation must be 2-dimensional, d = {rep2.dimension}.")
    if d_target < 3:
        raise InvalidArgumentError(f"Target dimension must be at least 3, {d_target} given.")

    images = []
    for g in rep2.generator_images:
        s = _sym_power_matrix(g, d_target - 1)
        s /= abs(np.linalg.det(s)) ** (1.0 / d_target)
        images.append(s)
    params = {"type": "sym_power", "d": d_target, "base": dump_representation(rep2)}
    return Representation(images, label or f"sym{d_target}({rep2.label})",
                          eig_tolerance=rep2.eig_tolerance, params=params)


def contragredient(rep: Representation, label: Optional[str] = None) -> Representation:
    """Inverse transpose of every generator image, labelled `label` or the base label starred."""

    images = np.transpose(rep.inverse_images, (0, 2, 1))
    params = {"type": "contragredient", "base": dump_representation(rep)}
    return Representation(images, label or f"{rep.label}*", eig_tolerance=rep.eig_tolerance, params=params)


def schottky_pair(la: float, lb: float, axis_angle: float, label: Optional[str] = None) -> Representation:
    """Two hyperbolic elements of SL(2, R) whose axes cross at a given angle.

    A translates by `la` along the imaginary axis, B translates by `lb` along
    the image of that axis under the rotation by ``axis_angle / 2``.

    Args:
        la: Translation length of a.
        lb: Translation length of b.
        axis_angle: Angle between the axes, in (0, pi).
        label: Name, default derived from the parameters.

    Raises:
        InvalidArgumentError: Non-positive translation length.
        DegenerateAxesError: Angle within 1e-3 of 0 or pi.
    """

    if not (la > 0 and lb > 0):
        raise InvalidArgumentError(f"Translation lengths must be positive, got {la}, {lb}.")
    if not 1e-3 <= axis_angle <= math.pi - 1e-3:
        raise DegenerateAxesError(axis_angle)

    A = np.diag([math.exp(la / 2), math.exp(-la / 2)])
    t = axis_angle / 2
    R = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
    B = R @ np.diag([math.exp(lb / 2), math.exp(-lb / 2)]) @ R.T
    params = {"type": "schottky", "la": la, "lb": lb, "angle": axis_angle}
    return Representation([A, B], label or f"schottky({la:g},{lb:g},{axis_angle:.6g})", params=params)


@dataclasses.dataclass
class LoxodromyReport(Report):
    """Empirical eigenvalue gap scan.

    Attributes:
        label: Representation label.
        words: Sampled classes.
        word_lengths: Their word lengths.
        relative_gaps: Minimal relative gap between consecutive eigenvalue moduli.
        log_gaps: Minimal gap between consecutive Jordan vector entries.
        ratios: log gap over word length.
        slope: Least-squares slope of the per-length minimal log gap against word length.
        min_gap: Smallest relative gap of the sample.
        not_loxodromic: Number of sampled classes at or below tolerance.
        verdict: `VERDICT.EMPIRICALLY_ANOSOV` or `VERDICT.FLAGGED`.
    """

    label: str
    words: List[str]
    word_lengths: List[int]
    relative_gaps: List[float]
    log_gaps: List[float]
    ratios: List[float]
    slope: float
    min_gap: float
    not_loxodromic: int
    verdict: VERDICT

    @property
    def anosov(self) -> bool:
        return self.verdict is VERDICT.EMPIRICALLY_ANOSOV


def validate_loxodromy(rep: Representation, sample: Sequence[ConjClass], *,
                       slope_margin: float = 0.05) -> LoxodromyReport:
    """Scan eigenvalue gaps over a sample of classes.

    The representation is empirically Anosov when every sampled class is
    loxodromic and the smallest log gap at each word length grows at least
    linearly, least-squares slope above `slope_margin`.
    """

    by_length: Dict[int, List[ConjClass]] = {}
    for c in sample:
        by_length.setdefault(len(c), []).append(c)

    words, lengths, rel, logs = [], [], [], []
    for n in sorted(by_length):
        classes = by_length[n]
        codes = np.array([c.codes for c in classes], dtype=np.int64)
        lam, gaps = batch_jordan(rep, codes)
        log_gap = (lam[:, :-1] - lam[:, 1:]).min(axis=1)
        words.extend(c.word for c in classes)
        lengths.extend([n] * len(classes))
        rel.extend(gaps.tolist())
        logs.extend(log_gap.tolist())

    if not words:
        raise InvalidArgumentError("Loxodromy sample is empty.")

    lengths_a = np.array(lengths)
    logs_a = np.array(logs)
    rel_a = np.array(rel)
    bad = int(np.count_nonzero(~(rel_a > rep.eig_tolerance)))

    ns = np.unique(lengths_a)
    worst = np.array([logs_a[lengths_a == n].min() for n in ns])
    if len(ns) >= 2:
        slope = float(stats.linregress(ns, worst).slope)
    else:
        slope = float(worst[0] / ns[0])

    verdict = VERDICT.EMPIRICALLY_ANOSOV if bad == 0 and slope > slope_margin else VERDICT.FLAGGED
    if verdict is VERDICT.FLAGGED:
        log.warning("%s flagged: %d non-loxodromic classes, gap slope %.4g", rep.label, bad, slope)

    return LoxodromyReport(
        label=rep.label,
        words=words,
        word_lengths=lengths,
        relative_gaps=rel,
        log_gaps=logs,
        ratios=(logs_a / lengths_a).tolist(),
        slope=slope,
        min_gap=float(rel_a.min()),
        not_loxodromic=bad,
        verdict=verdict,
    )


def _matrix_from(entry: Any, d: int) -> np.ndarray:
    a = np.array(entry, dtype=float)
    if a.ndim == 1:
        if a.size != d * d:
            raise InvalidRepresentationError(f"Generator needs {d * d} row-major entries, {a.size} given.")
        a = a.reshape(d, d)
    return a


def load_representation(spec: Mapping[str, Any]) -> Representation:
    """Build a representation from its JSON document.

    Accepts inline matrices ``{label, dimension, rank, generators}`` or a
    constructor ``{type: "schottky" | "sym_power" | "contragredient", ...}``.

    Raises:
        InvalidRepresentationError: Malformed document.
    """

    kind = spec.get("type", "inline")
    label = spec.get("label")
    if kind == "schottky":
        rep = schottky_pair(float(spec["la"]), float(spec["lb"]), float(spec["angle"]), label)
    elif kind == "sym_power":
        rep = sym_power_embed(load_representation(spec["base"]), int(spec["d"]), label)
    elif kind == "contragredient":
        rep = contragredient(load_representation(spec["base"]), label)
    elif kind == "inline":
        d = int(spec["dimension"])
        gens = [_matrix_from(g, d) for g in spec["generators"]]
        if "rank" in spec and int(spec["rank"]) != len(gens):
            raise InvalidRepresentationError(f"rank {spec['rank']} but {len(gens)} generators given.")
        return Representation(gens, label or "rho", eig_tolerance=float(spec.get("eig_tolerance", 1e-10)))
    else:
        raise InvalidRepresentationError(f"Unknown representation type {kind!r}.")
    return rep


def dump_representation(rep: Representation) -> Dict[str, Any]:
    """JSON document with row-major generators, floats round-trip exactly."""

    doc: Dict[str, Any] = {
        "label": rep.label,
        "dimension": rep.dimension,
        "rank": rep.rank,
        "generators": [[float(x) for x in g.ravel()] for g in rep.generator_images],
    }
    if rep.params:
        doc["constructor"] = rep.params
    return doc
