"""Joint length spectra.

A `SpectrumTable` holds, for every conjugacy class up to a word length cutoff,
one length per (representation, functional) column. Tables are computed shard
by shard over the enumeration, merged by the deterministic (word length,
canonical word) order and persisted as CSV with a sibling JSON meta file.
"""

import concurrent.futures as cf
import csv
import dataclasses
import json
import logging
import math
import os
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .base import VERDICT
from .errors import *
from .freegroup import (DEFAULT_MAX_CLASSES, ClassBlock, ConjClass, Letter, Shard, canonical_class,
                        class_blocks, codes_to_word, enumerate_classes, parse_word, projected_class_total,
                        reduce, shard_prefixes)
from .representation import (LengthFunctional, LoxodromyReport, Representation, batch_jordan,
                             dump_representation, validate_loxodromy)
from .utils import divisors, fmt17

__all__ = [
    "Column",
    "SpectrumTable",
    "CountingFunction",
    "compute_spectrum",
    "pilot_sample",
    "counting",
    "systole",
    "save_table",
    "load_table",
    "meta_path",
]

log = logging.getLogger(__name__)

ColumnRef = Union[int, str]
"""Column index, full header ``label:descriptor`` or bare label."""


@dataclasses.dataclass(frozen=True)
class Column:
    """Spectrum column.

    Attributes:
        label (str): Representation label.
        descriptor (str): Functional descriptor.
    """

    label: str
    descriptor: str

    @property
    def header(self) -> str:
        return f"{self.label}:{self.descriptor}"

    @classmethod
    def from_header(cls, header: str) -> "Column":
        label, sep, descriptor = header.rpartition(":")
        if not sep or not label or not descriptor:
            raise ValueError(f"column header {header!r} is not label:functional")
        return cls(label, descriptor)


class SpectrumTable:
    """Per-class joint lengths, rows sorted by (word length, canonical word).

    Attributes:
        columns (List[Column]): Column descriptions.
        words (List[str]): Canonical words.
        word_lengths (np.ndarray): Word lengths.
        primitive (np.ndarray): Primitive flags.
        values (np.ndarray): (rows, columns) lengths, all positive.
        meta (dict): Run parameters, verdicts and dropped row tally.
    """

    def __init__(self, columns: Sequence[Column], words: Sequence[str], word_lengths: np.ndarray,
                 primitive: np.ndarray, values: np.ndarray, meta: Optional[Mapping[str, Any]] = None) -> None:
        values = np.array(values, dtype=float).reshape(len(words), len(columns))
        values.setflags(write=False)
        self.columns = list(columns)
        self.words = list(words)
        self.word_lengths = np.asarray(word_lengths, dtype=np.int64)
        self.primitive = np.asarray(primitive, dtype=bool)
        self.values = values
        self.meta: Dict[str, Any] = dict(meta or {})
        self._periods: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.words)

    @property
    def n_max(self) -> int:
        return int(self.meta.get("n_max", self.word_lengths.max(initial=0)))

    @property
    def periods(self) -> np.ndarray:
        """Smallest rotation fixing each canonical word, the number of cyclic words in its class."""

        if self._periods is None:
            periods = self.word_lengths.copy()
            for i in np.nonzero(~self.primitive)[0]:
                word, n = self.words[i], int(self.word_lengths[i])
                periods[i] = next(d for d in divisors(n) if word[d:] + word[:d] == word)
            periods.setflags(write=False)
            self._periods = periods
        return self._periods

    def column_index(self, col: ColumnRef) -> int:
        """Resolve a column reference.

        Raises:
            InvalidArgumentError: No such column.
        """

        if isinstance(col, (int, np.integer)):
            if not -len(self.columns) <= col < len(self.columns):
                raise InvalidArgumentError(f"Column index {col} out of range.")
            return int(col) % len(self.columns)
        for i, c in enumerate(self.columns):
            if col == c.header:
                return i
        matches = [i for i, c in enumerate(self.columns) if c.label == col]
        if len(matches) == 1:
            return matches[0]
        raise InvalidArgumentError(f"No unique column {col!r}.")

    def column(self, col: ColumnRef) -> np.ndarray:
        return self.values[:, self.column_index(col)]

    def combine(self, weights: Sequence[float]) -> np.ndarray:
        """Linear combination of the columns, row by row.

        Raises:
            NonPositiveMixError: Some combined value is not positive.
        """

        w = np.asarray(weights, dtype=float)
        if w.shape != (len(self.columns),):
            raise InvalidArgumentError(f"Need {len(self.columns)} weights, {w.size} given.")
        mixed = self.values @ w
        if mixed.size and not mixed.min() > 0:
            raise NonPositiveMixError(f"Mix {w.tolist()} has non-positive value {mixed.min():.6g}.")
        return mixed

    def derive(self, label: str, weights: Sequence[float]) -> "SpectrumTable":
        """New table with a linear combination column appended."""

        mixed = self.combine(weights)
        descriptor = "mix(" + ",".join(f"{w:g}" for w in weights) + ")"
        meta = dict(self.meta)
        meta["derived"] = dict(meta.get("derived", {}), **{label: [float(w) for w in weights]})
        return SpectrumTable(self.columns + [Column(label, descriptor)], self.words, self.word_lengths,
                             self.primitive, np.column_stack([self.values, mixed]), meta)


class CountingFunction:
    """Sorted length values with the step function N(T).

    Attributes:
        values (np.ndarray): Values in nondecreasing order.
        order (np.ndarray): Row index of each sorted value, ``values = raw[order]``.
        horizon (float): Length up to which the data is complete.
        word_lengths (np.ndarray): Word length per sorted value, None for bare lengths.
        multiplicity (np.ndarray): Cyclic words per sorted class, None for bare lengths.
    """

    def __init__(self, values: Sequence[float], horizon: Optional[float] = None, label: str = "", *,
                 word_lengths: Optional[Sequence[int]] = None, multiplicity: Optional[Sequence[int]] = None) -> None:
        raw = np.asarray(values, dtype=float)
        self.order = np.argsort(raw, kind="stable")
        self.values = raw[self.order]
        self.values.setflags(write=False)
        if horizon is None:
            horizon = float(self.values[-1]) if self.values.size else 0.0
        self.horizon = float(horizon)
        self.label = label

        self.word_lengths: Optional[np.ndarray] = None
        self.multiplicity: Optional[np.ndarray] = None
        if word_lengths is not None:
            n = np.asarray(word_lengths, dtype=np.int64)
            m = n if multiplicity is None else np.asarray(multiplicity, dtype=np.int64)
            if n.shape != raw.shape or m.shape != raw.shape:
                raise InvalidArgumentError(f"{raw.size} lengths but {n.size} word lengths, {m.size} multiplicities.")
            self.word_lengths = n[self.order]
            self.multiplicity = m[self.order]

    def __len__(self) -> int:
        return self.values.size

    def __call__(self, T: float) -> int:
        """Number of values at most T."""

        return int(np.searchsorted(self.values, T, side="right"))

    def aligned(self, per_row: np.ndarray) -> np.ndarray:
        """Reorder per-row data to match `values`."""

        return np.asarray(per_row)[self.order]


def counting(table: SpectrumTable, column: Optional[ColumnRef] = None,
             mix: Optional[Sequence[float]] = None) -> CountingFunction:
    """Counting function of one column or of a linear combination.

    The horizon is the smallest value among classes of the cutoff word length.

    Raises:
        NonPositiveMixError: Combined value not positive.
    """

    if mix is not None:
        vals = table.combine(mix)
        label = "mix(" + ",".join(f"{w:g}" for w in mix) + ")"
    else:
        i = table.column_index(0 if column is None else column)
        vals = table.values[:, i]
        label = table.columns[i].header

    top = table.word_lengths == table.n_max
    horizon = float(vals[top].min()) if top.any() else None
    return CountingFunction(vals, horizon, label, word_lengths=table.word_lengths, multiplicity=table.periods)


def systole(cf_: CountingFunction) -> float:
    """Minimal length.

    Raises:
        EmptySpectrumError: No values.
    """

    if not len(cf_):
        raise EmptySpectrumError("Spectrum is empty.")
    return float(cf_.values[0])


def pilot_sample(rank: int, pilot_n: int = 6, extra: int = 64, extra_n: int = 12,
                 seed: int = 0) -> List[ConjClass]:
    """Every class of length at most `pilot_n`, plus seeded random longer classes."""

    sample = list(enumerate_classes(rank, pilot_n))
    seen = {c.codes for c in sample}
    rng = np.random.default_rng(seed)
    size = 2 * rank
    tries = 0
    while extra > 0 and tries < 20 * extra and extra_n > pilot_n:
        tries += 1
        n = int(rng.integers(pilot_n + 1, extra_n + 1))
        codes = [int(rng.integers(size))]
        while len(codes) < n:
            c = int(rng.integers(size - 1))
            codes.append(c if c < (codes[-1] ^ 1) else c + 1)
        if codes[-1] == codes[0] ^ 1:
            continue
        cls_ = canonical_class(tuple(Letter.from_code(c) for c in codes))
        if cls_.codes not in seen:
            seen.add(cls_.codes)
            sample.append(cls_)
            extra -= 1
    return sample


Piece = Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]


def _shard_rows(pairs: Sequence[Tuple[Representation, LengthFunctional]], rank: int, n_max: int,
                include_powers: bool, shard: Shard, max_classes: int) -> List[Piece]:
    pieces = []
    for block in class_blocks(rank, n_max, include_powers, shard=shard, max_classes=max_classes):
        values, ok = _block_values(pairs, block)
        n = np.full(block.keys.shape, block.n, dtype=np.int64)
        pieces.append((n, block.keys, block.codes, block.periods, values, ok))
    log.debug("shard %s: %d classes", codes_to_word(shard.prefix), sum(p[0].size for p in pieces))
    return pieces


def _block_values(pairs: Sequence[Tuple[Representation, LengthFunctional]],
                  block: ClassBlock) -> Tuple[np.ndarray, np.ndarray]:
    codes = block.codes.astype(np.int64)
    values = np.empty((codes.shape[0], len(pairs)))
    ok = np.ones(codes.shape[0], dtype=bool)
    projections: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
    for j, (rep, phi) in enumerate(pairs):
        if id(rep) not in projections:
            projections[id(rep)] = batch_jordan(rep, codes)
        lam, gaps = projections[id(rep)]
        values[:, j] = phi.evaluate(lam)
        ok &= (gaps > rep.eig_tolerance) & (values[:, j] > 0) & np.isfinite(values[:, j])
    return values, ok


def compute_spectrum(pairs: Sequence[Tuple[Representation, LengthFunctional]], rank: int, n_max: int,
                     include_powers: bool = True, *, threads: int = 1, force: bool = False,
                     pilot_n: int = 6, seed: int = 0,
                     max_classes: int = DEFAULT_MAX_CLASSES) -> SpectrumTable:
    """Exhaustive joint spectrum over every class up to n_max.

    Args:
        pairs: One (representation, functional) pair per column.
        rank: Free group rank.
        n_max: Word length cutoff.
        include_powers: Whether proper powers get rows.
        threads: Worker threads over enumeration shards.
        force: Keep going when a representation fails the pilot validation.
        pilot_n: Pilot sample holds every class up to this length.
        seed: Seed of the random part of the pilot sample.
        max_classes: Enumeration budget.

    Returns:
        SpectrumTable: Rows failing loxodromy in any column are dropped and tallied in ``meta["dropped"]``.

    Raises:
        PilotValidationFailedError: Some representation flagged and not forced.
        CutoffTooLargeError: Projected count over budget.
    """

    if not pairs:
        raise InvalidArgumentError("No columns requested.")
    for rep, phi in pairs:
        if rep.rank != rank:
            raise InvalidArgumentError(f"{rep.label} has rank {rep.rank}, table rank is {rank}.")
        if phi.dimension != rep.dimension:
            raise InvalidArgumentError(f"Functional {phi.descriptor} does not fit {rep.label} (d = {rep.dimension}).")
    expected = projected_class_total(rank, n_max, include_powers) if n_max >= 1 else 0
    if expected > max_classes:
        raise CutoffTooLargeError(expected, max_classes)

    sample = pilot_sample(rank, pilot_n, seed=seed)
    reports: Dict[str, LoxodromyReport] = {}
    for rep, _ in pairs:
        if rep.label in reports:
            continue
        report = validate_loxodromy(rep, sample)
        reports[rep.label] = report
        if report.verdict is VERDICT.FLAGGED:
            if not force:
                raise PilotValidationFailedError(rep.label, report.slope, report.min_gap)
            log.warning("%s failed pilot validation, continuing (forced)", rep.label)

    shards = shard_prefixes(rank, 2 if n_max >= 2 else 1)
    with cf.ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(
            lambda sh: _shard_rows(pairs, rank, n_max, include_powers, sh, max_classes), shards))
    pieces = [p for shard_pieces in results for p in shard_pieces]
    log.info("merged %d shards", len(shards))

    ns, keys, periods, values, ok = (np.concatenate([p[i] for p in pieces]) for i in (0, 1, 3, 4, 5))
    codes = [row for p in pieces for row in p[2]]

    if ns.size != expected:
        raise CountMismatchError(n_max, expected, int(ns.size))

    order = np.lexsort((keys, ns))
    order = order[ok.astype(bool)[order]]
    dropped = int(ns.size - order.size)
    if dropped:
        log.warning("dropped %d classes failing loxodromy", dropped)

    words = [codes_to_word(codes[i]) for i in order]
    word_lengths = ns[order]
    primitive = periods[order] == word_lengths

    meta = {
        "rank": rank,
        "n_max": n_max,
        "include_powers": include_powers,
        "rows": int(order.size),
        "dropped": dropped,
        "pilot_n": pilot_n,
        "seed": seed,
        "verdicts": {label: r.verdict.name for label, r in reports.items()},
        "pilot": {label: {"slope": r.slope, "min_gap": r.min_gap, "samples": len(r.words)}
                  for label, r in reports.items()},
        "representations": {rep.label: dump_representation(rep) for rep, _ in pairs},
    }
    columns = [Column(rep.label, phi.descriptor) for rep, phi in pairs]
    return SpectrumTable(columns, words, word_lengths, primitive, values[order], meta)


def meta_path(path: str) -> str:
    """Sibling JSON path with the same basename."""

    return os.path.splitext(path)[0] + ".json"


def save_table(table: SpectrumTable, path: str) -> None:
    """Write CSV with 17 significant digits plus the sibling JSON meta."""

    meta = dict(table.meta, columns=[c.header for c in table.columns], rows=len(table))
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["word", "len", "primitive"] + [c.header for c in table.columns])
        for i, word in enumerate(table.words):
            writer.writerow([word, int(table.word_lengths[i]), int(table.primitive[i])]
                            + [fmt17(x) for x in table.values[i]])
    with open(meta_path(path), "w", encoding="utf-8", newline="\n") as f:
        f.write(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def load_table(path: str) -> SpectrumTable:
    """Read a table written by `save_table`.

    Raises:
        SpectrumFormatError: Header, field count, word, flag or length invalid; `row` is the file line.
    """

    meta: Dict[str, Any] = {}
    if os.path.exists(meta_path(path)):
        with open(meta_path(path), encoding="utf-8") as f:
            try:
                meta = json.load(f)
            except json.JSONDecodeError as e:
                raise SpectrumFormatError(meta_path(path), e.lineno, e.msg) from e

    words: List[str] = []
    lengths: List[int] = []
    prims: List[bool] = []
    rows: List[List[float]] = []
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if not header or header[:3] != ["word", "len", "primitive"] or len(header) < 4:
            raise SpectrumFormatError(path, 1, "header must be word,len,primitive,<label:functional>...")
        try:
            columns = [Column.from_header(h) for h in header[3:]]
        except ValueError as e:
            raise SpectrumFormatError(path, 1, str(e)) from e

        for record in reader:
            row = reader.line_num
            if len(record) != len(header):
                raise SpectrumFormatError(path, row, f"{len(header)} fields expected, {len(record)} found")
            word, n, prim = record[:3]
            try:
                letters = parse_word(word)
            except InvalidArgumentError as e:
                raise SpectrumFormatError(path, row, str(e)) from e
            if not word or len(reduce(letters)) != len(letters) or n != str(len(letters)):
                raise SpectrumFormatError(path, row, f"word {word!r} does not match length {n!r}")
            if prim not in ("0", "1"):
                raise SpectrumFormatError(path, row, f"primitive flag {prim!r} is not 0 or 1")
            try:
                vals = [float(x) for x in record[3:]]
            except ValueError as e:
                raise SpectrumFormatError(path, row, str(e)) from e
            if not all(math.isfinite(x) and x > 0 for x in vals):
                raise SpectrumFormatError(path, row, "lengths must be finite and positive")
            words.append(word)
            lengths.append(len(letters))
            prims.append(prim == "1")
            rows.append(vals)

    if "rows" in meta and meta["rows"] != len(words):
        raise SpectrumFormatError(path, len(words) + 1, f"meta lists {meta['rows']} rows, {len(words)} found")
    return SpectrumTable(columns, words, np.array(lengths, dtype=np.int64), np.array(prims, dtype=bool),
                         np.array(rows, dtype=float).reshape(len(words), len(columns)), meta)
