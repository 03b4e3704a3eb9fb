import contextlib
import csv
import io
import json
import math
import os
import tempfile
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

import corrnum
from corrnum.base import GROWTH_METHOD, VERDICT
from corrnum.cli import main
from corrnum.config import RunConfig, parameter_hash, validate_config
from corrnum.errors import *
from corrnum.freegroup import (ConjClass, Letter, canonical_class, class_blocks, class_count, enumerate_classes,
                               format_word, invert_class, least_rotation, parse_word, primitive_class_count,
                               projected_class_total, reduce, shard_prefixes)
from corrnum.growth import WindowPolicy, entropy, growth_rate
from corrnum.manhattan import (ManhattanCurve, check_proportional, compare_lengths, correlate, correlation_count,
                               correlation_mins, correlation_tangent, entropy_systole_product, pinching_demo,
                               point_on_curve_residual, pressure_intersections, sample_curve)
from corrnum.representation import (LengthFunctional, Representation, batch_jordan, contragredient,
                                    dump_representation, evaluate, jordan_projection, length,
                                    load_representation, schottky_pair, sym_power_embed, validate_loxodromy)
from corrnum.spectrum import (Column, CountingFunction, SpectrumTable, compute_spectrum, counting, load_table,
                              save_table, systole)

HALF_PI = math.pi / 2
SQRT2 = math.sqrt(2)

# crossing axes give a discrete free group iff sinh(la/2) sinh(lb/2) sin(angle) >= 1
DISCRETE_1 = (2.5, 2.5, HALF_PI)
DISCRETE_2 = (3.0, 2.2, math.pi / 3)
DISCRETE_3 = (2.8, 2.4, 2 * math.pi / 5)

# far from proportional: one short and one long generator, swapped or balanced
SCHOTTKY_1 = (1.7, 3.5, 2 * math.pi / 5)
SCHOTTKY_2 = (3.3, 1.9, HALF_PI)
SCHOTTKY_3 = (2.6, 2.4, math.pi / 3)

A1 = LengthFunctional.simple_root(1, 2)


def w(s: str):
    return parse_word(s)


def cls(s: str) -> ConjClass:
    return canonical_class(parse_word(s))


def words_of(rank: int, n_max: int, include_powers: bool = True):
    return [c.word for c in enumerate_classes(rank, n_max, include_powers)]


def block_words(rank: int, n_max: int, include_powers: bool = True):
    out = []
    for block in class_blocks(rank, n_max, include_powers):
        out.extend("".join(format_word([Letter.from_code(int(x)) for x in row])) for row in block.codes)
    return out


def letter_table(weights, n_max: int = 12, rank: int = 2) -> SpectrumTable:
    """Spectra where every generator letter contributes a fixed length."""

    counts, words, lengths, prims = [], [], [], []
    for block in class_blocks(rank, n_max):
        gens = block.codes.astype(np.int64) >> 1
        counts.append(np.stack([(gens == g).sum(axis=1) for g in range(rank)], axis=1))
        words.extend(format_word([Letter.from_code(int(x)) for x in row]) for row in block.codes)
        lengths.append(np.full(block.keys.shape, block.n))
        prims.append(block.periods == block.n)
    counts = np.concatenate(counts).astype(float)
    columns, values = [], []
    for i, wt in enumerate(weights):
        v = counts[:, 0] * wt[0]
        for g in range(1, rank):
            v = v + counts[:, g] * wt[g]
        values.append(v)
        columns.append(Column(f"w{i}", "letters"))
    return SpectrumTable(columns, words, np.concatenate(lengths), np.concatenate(prims), np.column_stack(values),
                         {"rank": rank, "n_max": n_max, "include_powers": True, "dropped": 0})


def transfer_growth(cost_per_generator, rank: int = 2) -> float:
    """Exact growth rate of a letter-weight spectrum, where the transfer matrix has spectral radius one."""

    cost = np.repeat(np.asarray(cost_per_generator, dtype=float), 2)
    mask = 1.0 - np.eye(2 * rank)[np.arange(2 * rank) ^ 1]

    def log_radius(s):
        return math.log(np.abs(np.linalg.eigvals(mask * np.exp(-s * cost)[None, :])).max())

    return optimize.brentq(log_radius, -50, 50)


def exact_curve(w1, w2, b: float) -> float:
    cost = np.repeat(np.asarray(w1, float), 2)
    shift = np.repeat(np.asarray(w2, float), 2) * b
    mask = 1.0 - np.eye(4)[np.arange(4) ^ 1]

    def log_radius(a):
        return math.log(np.abs(np.linalg.eigvals(mask * np.exp(-a * cost - shift)[None, :])).max())

    return optimize.brentq(log_radius, -50, 50)


def exact_correlation(w1, w2) -> float:
    h1, h2 = transfer_growth(w1), transfer_growth(w2)
    res = optimize.minimize_scalar(
        lambda s: transfer_growth(s * h1 * np.asarray(w1) + (1 - s) * h2 * np.asarray(w2)),
        bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-8})
    return float(res.fun)


reduced_codes = st.lists(st.integers(0, 3), min_size=1, max_size=10).map(
    lambda xs: tuple(Letter.from_code(x) for x in xs)).filter(lambda ls: len(reduce(ls)) > 0)


class TestFreeGroup(unittest.TestCase):
    def test_reduce(self):
        self.assertEqual(reduce(w("aA")), ())
        self.assertEqual(reduce(w("abBa")), w("aa"))
        self.assertEqual(reduce(w("abA")), w("abA"))

    def test_canonical_class(self):
        self.assertEqual(canonical_class(w("ba")).word, "ab")
        self.assertEqual(canonical_class(w("Aba")).word, "b")

        c = canonical_class(w("abab"))
        self.assertEqual(c.word, "abab")
        self.assertEqual(c.period, 2)
        self.assertFalse(c.primitive)

        self.assertTrue(canonical_class(w("aab")).primitive)
        self.assertRaises(IdentityWordError, canonical_class, w("abBA"))

    def test_letter_order(self):
        # generator index major, +1 before -1
        self.assertEqual(canonical_class(w("bA")).word, "Ab")
        self.assertEqual(canonical_class(w("BA")).word, "AB")
        self.assertEqual(least_rotation([2, 0, 1]), 1)

    def test_parse_format(self):
        self.assertEqual(format_word(parse_word("aBcA")), "aBcA")
        self.assertEqual(parse_word("aB"), (Letter(0, 1), Letter(1, -1)))
        self.assertRaises(InvalidArgumentError, parse_word, "a1")

    def test_invert_class(self):
        self.assertEqual(invert_class(cls("a")).word, "A")
        self.assertEqual(invert_class(cls("ab")).word, "AB")

    @settings(max_examples=200, deadline=None)
    @given(reduced_codes)
    def test_invert_involution(self, letters):
        c = canonical_class(letters)
        self.assertEqual(invert_class(invert_class(c)), c)

    @settings(max_examples=200, deadline=None)
    @given(reduced_codes)
    def test_rotation_invariance(self, letters):
        c = canonical_class(letters)
        for k in range(len(c)):
            rotated = c.letters[k:] + c.letters[:k]
            self.assertEqual(canonical_class(rotated), c)

    def test_class_count(self):
        self.assertEqual(class_count(2, 1), (4, 4))
        self.assertEqual(class_count(2, 2), (12, 8))
        self.assertEqual(class_count(2, 3), (28, 12))
        self.assertEqual(class_count(3, 2), (30, 18))

    def test_enumerate_small(self):
        self.assertEqual(len(words_of(2, 1)), 4)
        self.assertEqual(len(words_of(2, 2)), 12)
        self.assertEqual(len(words_of(2, 3)), 24)

    def test_stream_matches_oracle(self):
        for rank, n_max in ((2, 10), (3, 6)):
            tally = {}
            for c in enumerate_classes(rank, n_max):
                tally[len(c)] = tally.get(len(c), 0) + 1
            for n in range(1, n_max + 1):
                self.assertEqual(tally[n], class_count(rank, n)[1], f"rank {rank}, n {n}")

    def test_blocks_match_oracle(self):
        for rank, n_max in ((2, 12), (3, 8)):
            tally = {}
            for block in class_blocks(rank, n_max):
                tally[block.n] = tally.get(block.n, 0) + block.codes.shape[0]
            for n in range(1, n_max + 1):
                self.assertEqual(tally[n], class_count(rank, n)[1], f"rank {rank}, n {n}")

    def test_blocks_match_stream(self):
        self.assertEqual(sorted(block_words(2, 8)), sorted(words_of(2, 8)))
        self.assertEqual(sorted(block_words(3, 5)), sorted(words_of(3, 5)))
        self.assertEqual(sorted(block_words(2, 8, False)), sorted(words_of(2, 8, False)))

    def test_block_periods(self):
        for block in class_blocks(2, 8):
            for row, p in zip(block.codes.tolist(), block.periods.tolist()):
                self.assertEqual(canonical_class([Letter.from_code(x) for x in row]).period, p)

    def test_duplicate_free(self):
        words = words_of(2, 10)
        self.assertEqual(len(words), len(set(words)))
        self.assertEqual(len(words), projected_class_total(2, 10))

    def test_canonical_stream(self):
        for c in enumerate_classes(2, 7):
            self.assertEqual(canonical_class(c.letters), c)

    def test_primitive_flag(self):
        for c in enumerate_classes(2, 10):
            s, n = c.word, len(c)
            periodic = any(n % d == 0 and s == s[:d] * (n // d) for d in range(1, n))
            self.assertEqual(c.primitive, not periodic, s)

    def test_primitive_count(self):
        tally = {}
        for c in enumerate_classes(2, 10, include_powers=False):
            tally[len(c)] = tally.get(len(c), 0) + 1
        for n in range(1, 11):
            self.assertEqual(tally[n], primitive_class_count(2, n))

    def test_shards(self):
        union = []
        for sh in shard_prefixes(2, 2):
            union.extend(c.word for c in enumerate_classes(2, 7, shard=sh))
        self.assertEqual(sorted(union), sorted(words_of(2, 7)))
        self.assertEqual(len(union), len(set(union)))

    def test_cutoff_budget(self):
        self.assertRaises(CutoffTooLargeError, lambda: list(enumerate_classes(2, 8, max_classes=100)))
        self.assertRaises(InvalidArgumentError, lambda: list(enumerate_classes(1, 3)))


class TestRepresentation(unittest.TestCase):
    def setUp(self) -> None:
        self.diag2 = Representation([np.diag([2.0, 0.5]), [[2.0, 1.0], [1.0, 1.0]]], "diag")
        self.rho = schottky_pair(*DISCRETE_1)
        self.rho3 = sym_power_embed(self.rho, 3)

        rng = np.random.default_rng(7)
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        self.generic3 = Representation([np.diag(np.exp([2.0, 0.5, -2.5])),
                                        q @ np.diag(np.exp([1.5, 0.3, -1.8])) @ q.T], "generic")

    def test_evaluate(self):
        self.assertTrue(np.allclose(evaluate(self.diag2, cls("a")), np.diag([2.0, 0.5])))
        self.assertTrue(np.allclose(evaluate(self.diag2, cls("aa")), np.diag([4.0, 0.25])))

    def test_evaluate_inverse(self):
        rng = np.random.default_rng(1)
        for c in rng.choice(list(enumerate_classes(2, 8)), 50):
            inverse = ConjClass(tuple(x.inverse() for x in reversed(c.letters)), c.period)
            prod = evaluate(self.rho, c) @ evaluate(self.rho, inverse)
            self.assertTrue(np.allclose(prod, np.eye(2), atol=1e-9))

    def test_evaluate_overflow(self):
        big = Representation([np.diag([math.exp(100), math.exp(-100)]), np.eye(2)], "big")
        self.assertRaises(MatrixOverflowError, evaluate, big, cls("aaaaaaa"))
        lam = batch_jordan(big, np.array([[0] * 7]))[0][0]
        self.assertAlmostEqual(lam[0], 350.0, places=9)

    def test_jordan_examples(self):
        rep = Representation([np.diag([4.0, 1.0, 0.25]), [[1, 1, 0], [0, 1, 1], [0, 0, 1]]], "d3")
        lam = jordan_projection(rep, cls("a"))
        self.assertTrue(np.allclose(lam, [math.log(4), 0, -math.log(4)], atol=1e-12))
        self.assertAlmostEqual(length(rep, cls("a"), LengthFunctional.hilbert(3)), math.log(4), places=12)

        tri = Representation([[[2.0, 1.0], [0.0, 0.5]], np.diag([3.0, 1 / 3])], "tri")
        self.assertTrue(np.allclose(jordan_projection(tri, cls("a")), [math.log(2), -math.log(2)], atol=1e-12))
        self.assertAlmostEqual(length(self.diag2, cls("a"), A1), math.log(4), places=12)

    def test_jordan_vector_invariants(self):
        codes = np.array([c.codes for c in enumerate_classes(2, 6) if len(c) == 6])
        lam, _ = batch_jordan(self.generic3, codes)
        self.assertTrue(np.all(np.diff(lam, axis=1) <= 0))
        self.assertTrue(np.all(np.abs(lam.sum(axis=1)) <= 1e-9))

    @settings(max_examples=100, deadline=None)
    @given(reduced_codes, st.integers(1, 5))
    def test_homogeneity(self, letters, k):
        c = canonical_class(letters)
        power = canonical_class(c.letters * k)
        for rep in (self.rho, self.rho3, self.generic3):
            lam, _ = batch_jordan(rep, np.array([c.codes]))
            lam_k, _ = batch_jordan(rep, np.array([power.codes]))
            self.assertTrue(np.allclose(lam_k[0], k * lam[0], atol=1e-8))

    @settings(max_examples=100, deadline=None)
    @given(reduced_codes)
    def test_inverse_symmetry(self, letters):
        c = canonical_class(letters)
        for rep in (self.rho, self.generic3):
            lam, _ = batch_jordan(rep, np.array([c.codes]))
            lam_inv, _ = batch_jordan(rep, np.array([invert_class(c).codes]))
            self.assertTrue(np.allclose(lam_inv[0], -lam[0][::-1], atol=1e-8))

    @settings(max_examples=100, deadline=None)
    @given(reduced_codes)
    def test_rotation_invariance(self, letters):
        c = canonical_class(letters)
        base = length(self.rho, c, A1)
        for k in range(len(c)):
            rotated = ConjClass(c.letters[k:] + c.letters[:k], c.period)
            self.assertAlmostEqual(length(self.rho, rotated, A1), base, delta=1e-9)

    def test_length_functional(self):
        h = LengthFunctional.parse("H", 3)
        self.assertEqual(h.coefficients, (1.0, 1.0))
        self.assertEqual(h.scale, 0.5)
        self.assertEqual(h.descriptor, "H")
        self.assertEqual(LengthFunctional.parse("a2", 3).coefficients, (0.0, 1.0))
        self.assertEqual(LengthFunctional.parse({"coefficients": [1], "scale": 2}, 2).descriptor, "2*(1)")
        self.assertRaises(InvalidArgumentError, LengthFunctional.parse, "x", 3)
        self.assertRaises(InvalidArgumentError, LengthFunctional.parse, "a3", 3)
        self.assertRaises(InvalidArgumentError, LengthFunctional, (0.0, 0.0))

    def test_invalid_representation(self):
        self.assertRaises(InvalidRepresentationError, Representation, [np.diag([2.0, 1.0]), np.eye(2)])
        self.assertRaises(InvalidRepresentationError, Representation, [np.eye(2)])
        self.assertRaises(InvalidRepresentationError, Representation, [np.ones((2, 3)), np.ones((2, 3))])

    def test_sym_power(self):
        t = 1.7
        base = Representation([np.diag([t, 1 / t]), self.rho.generator_images[1]], "base")
        self.assertTrue(np.allclose(sym_power_embed(base, 3).generator_images[0], np.diag([t * t, 1, 1 / (t * t)])))
        self.assertRaises(InvalidArgumentError, sym_power_embed, self.rho3, 4)
        self.assertRaises(InvalidArgumentError, sym_power_embed, self.rho, 2)

    def test_sym_power_fuchsian_locus(self):
        codes = np.array([c.codes for c in enumerate_classes(2, 8) if len(c) == 8])
        base = A1.evaluate(batch_jordan(self.rho, codes)[0])
        embedded = LengthFunctional.hilbert(3).evaluate(batch_jordan(self.rho3, codes)[0])
        self.assertTrue(np.allclose(base, embedded, atol=1e-8))

        rho4 = sym_power_embed(self.rho, 4)
        self.assertTrue(np.allclose(np.abs(np.linalg.det(rho4.generator_images)), 1.0))

    def test_sym_power_conjugation(self):
        g = np.array([[1.0, 0.3], [0.2, 1.06]])
        g /= math.sqrt(np.linalg.det(g))
        conj = Representation([g @ m @ np.linalg.inv(g) for m in self.rho.generator_images], "conj")
        codes = np.array([c.codes for c in enumerate_classes(2, 6) if len(c) >= 5])
        h = LengthFunctional.hilbert(3)
        self.assertTrue(np.allclose(h.evaluate(batch_jordan(sym_power_embed(conj, 3), codes)[0]),
                                    h.evaluate(batch_jordan(self.rho3, codes)[0]), atol=1e-8))

    def test_contragredient(self):
        for rep in (self.rho3, self.generic3):
            back = contragredient(contragredient(rep))
            self.assertTrue(np.allclose(back.generator_images, rep.generator_images, atol=1e-12, rtol=0))

        h = LengthFunctional.hilbert(3)
        a1, a2 = LengthFunctional.simple_root(1, 3), LengthFunctional.simple_root(2, 3)
        codes = np.array([c.codes for c in enumerate_classes(2, 8) if len(c) >= 7])
        for rep in (self.rho3, self.generic3):
            lam = batch_jordan(rep, codes)[0]
            lam_star = batch_jordan(contragredient(rep), codes)[0]
            self.assertTrue(np.allclose(lam_star, -lam[:, ::-1], atol=1e-8))
            self.assertTrue(np.allclose(h.evaluate(lam_star), h.evaluate(lam), atol=1e-8))
            self.assertTrue(np.allclose(a1.evaluate(lam_star), a2.evaluate(lam), atol=1e-8))

    def test_schottky(self):
        rep = schottky_pair(2 * math.log(2), 1.0, HALF_PI)
        self.assertAlmostEqual(length(rep, cls("a"), A1), 2 * math.log(2), places=12)

        rep = schottky_pair(1.0, 1.0, HALF_PI)
        self.assertAlmostEqual(length(rep, cls("b"), A1), 1.0, places=12)
        self.assertGreater(batch_jordan(rep, np.array([cls("ab").codes]))[1][0], 0)

        self.assertRaises(DegenerateAxesError, schottky_pair, 1.0, 1.0, 5e-4)
        self.assertRaises(DegenerateAxesError, schottky_pair, 1.0, 1.0, math.pi)
        self.assertRaises(InvalidArgumentError, schottky_pair, -1.0, 1.0, 1.0)

    def test_validate_loxodromy(self):
        sample = list(enumerate_classes(2, 6))
        report = validate_loxodromy(self.rho, sample)
        self.assertIs(report.verdict, VERDICT.EMPIRICALLY_ANOSOV)
        self.assertEqual(report.not_loxodromic, 0)
        self.assertEqual(len(report.ratios), len(sample))
        self.assertIs(validate_loxodromy(self.rho3, sample).verdict, VERDICT.EMPIRICALLY_ANOSOV)

        flat = Representation([np.eye(2), self.rho.generator_images[1]], "flat")
        report = validate_loxodromy(flat, sample)
        self.assertIs(report.verdict, VERDICT.FLAGGED)
        self.assertEqual(report.relative_gaps[report.words.index("a")], 0.0)

    def test_validate_crossing_axes(self):
        # commutator of short crossing translations is elliptic
        report = validate_loxodromy(schottky_pair(1.0, 1.0, HALF_PI), list(enumerate_classes(2, 6)))
        self.assertIs(report.verdict, VERDICT.FLAGGED)
        self.assertGreater(report.not_loxodromic, 0)
        json.loads(report.to_json())

    def test_load_dump(self):
        rep = load_representation({"type": "schottky", "la": 2.5, "lb": 2.5, "angle": HALF_PI, "label": "r"})
        self.assertEqual(rep.label, "r")
        doc = dump_representation(rep)
        again = load_representation({k: v for k, v in doc.items() if k != "constructor"})
        self.assertTrue(np.array_equal(again.generator_images, rep.generator_images))

        rep3 = load_representation({"type": "sym_power", "d": 3, "base": {"type": "schottky", "la": 2.5,
                                                                           "lb": 2.5, "angle": HALF_PI}})
        self.assertEqual(rep3.dimension, 3)
        star = load_representation({"type": "contragredient", "base": dump_representation(rep3)})
        self.assertTrue(star.label.endswith("*"))
        for kind, extra in (("sym_power", {"d": 3}), ("contragredient", {})):
            named = load_representation(dict(extra, type=kind, label="named", base=dump_representation(rep)))
            self.assertEqual(named.label, "named")
            self.assertEqual(dump_representation(named)["label"], "named")
        self.assertEqual(sym_power_embed(rep, 3, "rho3").label, "rho3")

        nested = load_representation({"dimension": 2, "generators": [[[2, 0], [0, 0.5]], [1, 1, 0, 1]]})
        self.assertEqual(nested.rank, 2)
        self.assertRaises(InvalidRepresentationError, load_representation, {"type": "nope"})
        self.assertRaises(InvalidRepresentationError, load_representation,
                          {"dimension": 2, "rank": 3, "generators": [[1, 0, 0, 1], [1, 0, 0, 1]]})


class TestSpectrum(unittest.TestCase):
    @classmethod
    def setUpClass(cls_) -> None:
        cls_.rho = schottky_pair(*DISCRETE_1)
        cls_.eta = schottky_pair(*DISCRETE_2)
        cls_.table = compute_spectrum([(cls_.rho, A1), (cls_.eta, A1),
                                       (sym_power_embed(cls_.rho, 3), LengthFunctional.hilbert(3))], 2, 8)

    def test_rows(self):
        self.assertEqual(len(self.table), projected_class_total(2, 8))
        self.assertEqual(self.table.meta["dropped"], 0)
        self.assertTrue(np.all(self.table.values > 0))
        keys = list(zip(self.table.word_lengths.tolist(), self.table.words))
        self.assertEqual(len(set(keys)), len(keys))
        self.assertTrue(all(a[0] <= b[0] for a, b in zip(keys, keys[1:])))
        self.assertEqual(self.table.meta["verdicts"][self.rho.label], "EMPIRICALLY_ANOSOV")

    def test_small_table(self):
        rep = schottky_pair(1.0, 1.0, HALF_PI)
        self.assertRaises(PilotValidationFailedError, compute_spectrum, [(rep, A1)], 2, 2)
        table = compute_spectrum([(rep, A1)], 2, 2, force=True)
        self.assertEqual(len(table), 12)
        self.assertAlmostEqual(systole(counting(table, 0)), 1.0, places=12)

    def test_determinism(self):
        pairs = [(self.rho, A1), (self.eta, A1)]
        with tempfile.TemporaryDirectory() as tmp:
            blobs = []
            for threads in (1, 4):
                path = os.path.join(tmp, f"t{threads}.csv")
                save_table(compute_spectrum(pairs, 2, 7, threads=threads), path)
                with open(path, "rb") as f:
                    blobs.append(f.read())
            self.assertEqual(blobs[0], blobs[1])

    def test_errors(self):
        self.assertRaises(CutoffTooLargeError, compute_spectrum, [(self.rho, A1)], 2, 8, max_classes=100)
        rho3 = schottky_pair(*DISCRETE_1)
        bad = Representation(list(rho3.generator_images) + [np.eye(2)], "rank3")
        self.assertRaises(InvalidArgumentError, compute_spectrum, [(bad, A1)], 2, 3)
        self.assertRaises(InvalidArgumentError, compute_spectrum, [(self.rho, LengthFunctional.hilbert(3))], 2, 3)

    def test_proportional_columns(self):
        table = compute_spectrum([(self.rho, A1), (self.rho, LengthFunctional((1.0,), 2.0))], 2, 5)
        self.assertTrue(np.array_equal(table.column(1), 2 * table.column(0)))
        self.assertTrue(check_proportional(table.column(0), table.column(1))[2])
        self.assertRaises(NonPositiveMixError, counting, table, mix=[2.0, -1.0])

    def test_fuchsian_columns(self):
        self.assertTrue(np.allclose(self.table.column(0), self.table.column(2), atol=1e-8))
        index = {word: i for i, word in enumerate(self.table.words)}
        for i, word in enumerate(self.table.words[:500]):
            j = index[invert_class(cls(word)).word]
            self.assertAlmostEqual(self.table.values[i, 0], self.table.values[j, 0], delta=1e-8)

    def test_counting(self):
        cf = counting(self.table, 0)
        self.assertEqual(cf(cf.values[0] - 1e-9), 0)
        self.assertEqual(cf(math.inf), len(self.table))
        self.assertTrue(np.all(np.diff(cf.values) >= 0))
        self.assertTrue(np.array_equal(counting(self.table, mix=[1.0, 0.0, 0.0]).values, cf.values))
        self.assertTrue(np.array_equal(cf.values, np.sort(self.table.column(0))))
        self.assertEqual(cf.horizon, self.table.column(0)[self.table.word_lengths == 8].min())

    def test_systole(self):
        cf = counting(self.table, 0)
        self.assertAlmostEqual(systole(cf), 2.5, places=10)
        self.assertAlmostEqual(systole(counting(self.table, mix=[0.5, 0.0, 0.5])), systole(cf), places=8)
        self.assertRaises(EmptySpectrumError, systole, CountingFunction([]))

    def test_derive(self):
        derived = self.table.derive("sum", [1.0, 1.0, 0.0])
        self.assertEqual(derived.columns[-1].header, "sum:mix(1,1,0)")
        self.assertTrue(np.allclose(derived.column("sum"), self.table.column(0) + self.table.column(1)))

    def test_round_trip(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "spectrum.csv")
            save_table(self.table, path)
            loaded = load_table(path)
            self.assertTrue(np.array_equal(loaded.values, self.table.values))
            self.assertEqual(loaded.words, self.table.words)
            self.assertEqual([c.header for c in loaded.columns], [c.header for c in self.table.columns])
            self.assertTrue(os.path.exists(os.path.join(tmp, "spectrum.json")))

            # independent scan of the file
            T = float(np.median(self.table.column(0)))
            with open(path, newline="") as f:
                rows = list(csv.reader(f))[1:]
            self.assertEqual(sum(float(r[3]) <= T for r in rows), counting(self.table, 0)(T))

    def test_corrupted(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "spectrum.csv")
            save_table(self.table, path)
            with open(path) as f:
                lines = f.readlines()
            lines[4] = lines[4].replace(lines[4].split(",")[0], "aA", 1)
            with open(path, "w") as f:
                f.writelines(lines)
            with self.assertRaises(SpectrumFormatError) as ctx:
                load_table(path)
            self.assertEqual(ctx.exception.row, 5)

            lines[4] = "a,1,1,-1,1,1\n"
            with open(path, "w") as f:
                f.writelines(lines)
            with self.assertRaises(SpectrumFormatError) as ctx:
                load_table(path)
            self.assertEqual(ctx.exception.row, 5)


class TestGrowth(unittest.TestCase):
    @classmethod
    def setUpClass(cls_) -> None:
        n = np.arange(1, 13)
        cls_.unit = np.repeat(n, [class_count(2, k)[1] for k in n]).astype(float)

    def test_unit_lengths(self):
        est = growth_rate(CountingFunction(self.unit))
        self.assertAlmostEqual(est.value, math.log(3), delta=0.02)
        self.assertAlmostEqual(est.bisection, math.log(3), delta=0.02)
        self.assertTrue(est.consistent)
        self.assertGreaterEqual(est.stderr, 0)
        self.assertLess(est.window[0], est.window[1])
        self.assertEqual(est.to_dict()["count"], est.sample_count)
        self.assertEqual(est.to_dict()["method"], "BOTH")

    def test_shift(self):
        cf = CountingFunction(self.unit)
        h = growth_rate(cf).value
        for b in (0.1, 0.3, 0.7):
            self.assertAlmostEqual(growth_rate(cf, log_weights=-b * cf.values).value, h - b, delta=0.01)
            self.assertAlmostEqual(growth_rate(cf, np.exp(-b * cf.values)).value, h - b, delta=0.01)

    def test_scaling(self):
        h = growth_rate(CountingFunction(self.unit)).value
        for kappa in (0.5, 2.0):
            self.assertAlmostEqual(growth_rate(CountingFunction(kappa * self.unit)).value, h / kappa, delta=0.01)

    def test_methods(self):
        cf = CountingFunction(self.unit)
        reg = growth_rate(cf, method=GROWTH_METHOD.REGRESSION)
        bis = growth_rate(cf, method=GROWTH_METHOD.BISECTION)
        self.assertIsNone(reg.bisection)
        self.assertEqual(bis.value, bis.bisection)
        self.assertAlmostEqual(reg.value, bis.value, delta=0.02)

    def test_letter_weights(self):
        table = letter_table([(1.0, SQRT2), (1.3, 0.9)])
        for i, wt in enumerate([(1.0, SQRT2), (1.3, 0.9)]):
            est = entropy(table, i)
            self.assertAlmostEqual(est.value, transfer_growth(wt), delta=0.01)
            self.assertEqual(est.shells, (6, 12))
            self.assertIsNotNone(est.regression)

    def test_word_shells(self):
        table = letter_table([(1.0, SQRT2)], n_max=10)
        cf = counting(table, 0)
        self.assertTrue(np.array_equal(cf.word_lengths, cf.aligned(table.word_lengths)))
        # rotations of the canonical words are every cyclically reduced word
        self.assertEqual(int(table.periods[table.word_lengths == 4].sum()), class_count(2, 4)[0])
        self.assertEqual(table.periods[table.words.index("abab")], 2)
        self.assertEqual(table.periods[table.words.index("aaaa")], 1)

        h = growth_rate(cf, method=GROWTH_METHOD.BISECTION).value
        for b in (0.2, 0.5):
            shifted = growth_rate(cf, log_weights=-b * cf.values, method=GROWTH_METHOD.BISECTION).value
            self.assertAlmostEqual(shifted, h - b, delta=1e-8)

    def test_thin_regression_window(self):
        # horizon 6 leaves a handful of classes below it, the shells still hold every class
        table = letter_table([(0.5, 3.0)])
        est = entropy(table, 0)
        self.assertIsNone(est.regression)
        self.assertFalse(est.consistent)
        self.assertAlmostEqual(est.value, transfer_growth((0.5, 3.0)), delta=0.02)
        self.assertRaises(InsufficientDataError, entropy, table, 0, method=GROWTH_METHOD.REGRESSION)

    def test_errors(self):
        self.assertRaises(InsufficientDataError, growth_rate, CountingFunction(np.arange(1.0, 50.0)))
        self.assertRaises(WindowDegenerateError, growth_rate, CountingFunction(self.unit),
                          policy=WindowPolicy(lo=0.9, hi=0.5))
        self.assertRaises(InvalidArgumentError, growth_rate, CountingFunction(self.unit), np.zeros(self.unit.size))
        self.assertRaises(InvalidArgumentError, CountingFunction, [1.0, 2.0], word_lengths=[1])

    def test_short_horizon(self):
        for method in GROWTH_METHOD:
            self.assertRaises(InsufficientDataError, growth_rate, CountingFunction(self.unit, horizon=3.0),
                              method=method)


class TestEntropyOnTables(unittest.TestCase):
    @classmethod
    def setUpClass(cls_) -> None:
        rho = schottky_pair(*DISCRETE_1)
        cls_.table = compute_spectrum([(rho, A1), (sym_power_embed(rho, 3), LengthFunctional.hilbert(3)),
                                       (rho, LengthFunctional((1.0,), 2.0))], 2, 12, threads=4)

    def test_schottky_entropy(self):
        est = entropy(self.table, 0)
        self.assertGreater(est.value, 0)
        self.assertLessEqual(est.value, math.log(3))

    def test_embedded_entropy(self):
        self.assertAlmostEqual(entropy(self.table, 0).value, entropy(self.table, 1).value, delta=0.005)

    def test_proportional_entropy(self):
        self.assertAlmostEqual(entropy(self.table, 2).value, entropy(self.table, 0).value / 2, delta=0.01)

    def test_merge_independence(self):
        shuffled = np.random.default_rng(3).permutation(self.table.column(0))
        a = growth_rate(CountingFunction(self.table.column(0), counting(self.table, 0).horizon))
        b = growth_rate(CountingFunction(shuffled, counting(self.table, 0).horizon))
        self.assertAlmostEqual(a.value, b.value, delta=1e-12)


class TestManhattan(unittest.TestCase):
    W1 = (1.0, SQRT2)
    W2 = (1.3, 0.9)

    @classmethod
    def setUpClass(cls_) -> None:
        cls_.table = letter_table([cls_.W1, cls_.W2])
        cls_.h1, cls_.h2 = transfer_growth(cls_.W1), transfer_growth(cls_.W2)
        cls_.curve = sample_curve(cls_.table, 0, 1)
        cls_.M = exact_correlation(cls_.W1, cls_.W2)

    def test_endpoints(self):
        self.assertAlmostEqual(self.curve.a_at_zero, self.curve.h1, delta=0.02)
        self.assertAlmostEqual(self.curve.root, self.curve.h2, delta=0.02)
        self.assertAlmostEqual(self.curve.h1, self.h1, delta=0.02)
        self.assertAlmostEqual(self.curve.h2, self.h2, delta=0.02)
        self.assertTrue(self.curve.endpoints_ok)
        self.assertEqual(len(self.curve.samples), 33)

    def test_shape(self):
        self.assertLessEqual(self.curve.convexity_certificate, 5e-3)
        self.assertTrue(self.curve.monotone)
        for b, a in zip(self.curve.b[::4], self.curve.a[::4]):
            self.assertAlmostEqual(a, exact_curve(self.W1, self.W2, b), delta=0.02)

    def test_pressure_intersections(self):
        pi = pressure_intersections(self.curve)
        d = 1e-5
        slope0 = (exact_curve(self.W1, self.W2, d) - exact_curve(self.W1, self.W2, -d)) / (2 * d)
        self.assertAlmostEqual(pi.I_12, -slope0, delta=0.05)
        self.assertGreaterEqual(pi.J_12, 0.98)
        self.assertGreaterEqual(pi.J_21, 0.98)
        self.assertAlmostEqual(pi.J_12, self.curve.h2 / self.curve.h1 * pi.I_12, places=12)

    def test_tangent(self):
        t = correlation_tangent(self.curve)
        self.assertTrue(0 < t.M < 1)
        self.assertAlmostEqual(t.M, self.M, delta=0.02)

    def test_mins(self):
        mins = correlation_mins(self.table, 0, 1, self.curve.h1, self.curve.h2)
        self.assertTrue(0.02 <= mins.s0 <= 0.98)
        self.assertAlmostEqual(mins.M, self.M, delta=0.02)
        self.assertAlmostEqual(mins.M, correlation_tangent(self.curve).M, delta=0.02)
        self.assertLessEqual(point_on_curve_residual(self.curve, mins.M, mins.s0), 0.02)

        # renormalized column alone has unit growth
        w = np.array([0.0, self.curve.h2])
        self.assertAlmostEqual(growth_rate(counting(self.table, mix=w)).value, 1.0, delta=0.02)

    def test_tangent_parabola(self):
        # a = h1 (1 - b / h2)^2 is parallel to the chord at b = h2 / 2, M = 3 / 4
        h1, h2 = 0.8, 1.25
        b = np.linspace(-0.1 * h2, 1.1 * h2, 33)
        a = h1 * (1 - b / h2) ** 2
        curve = ManhattanCurve(("x", "y"), b, a, np.zeros_like(b), h1, h2, h1, h2, 0.0, False, True)
        t = correlation_tangent(curve)
        self.assertAlmostEqual(t.M, 0.75, places=9)
        self.assertAlmostEqual(t.b, h2 / 2, places=9)

        late = ManhattanCurve(("x", "y"), b[20:], a[20:], np.zeros(13), h1, h2, h1, h2, 0.0, False, True)
        self.assertRaises(SlopeNotBracketedError, correlation_tangent, late)

    def test_scale_invariance(self):
        scaled = SpectrumTable(self.table.columns, self.table.words, self.table.word_lengths,
                               self.table.primitive, self.table.values * np.array([1.0, 2.0]), self.table.meta)
        curve = sample_curve(scaled, 0, 1)
        self.assertAlmostEqual(correlation_tangent(curve).M, correlation_tangent(self.curve).M, delta=0.01)
        m1 = correlation_mins(self.table, 0, 1, self.curve.h1, self.curve.h2).M
        m2 = correlation_mins(scaled, 0, 1, curve.h1, curve.h2).M
        self.assertAlmostEqual(m1, m2, delta=0.01)

    def test_swap(self):
        swapped = sample_curve(self.table, 1, 0)
        self.assertAlmostEqual(correlation_tangent(swapped).M, correlation_tangent(self.curve).M, delta=0.02)

    def test_symmetric_pair(self):
        table = letter_table([self.W1, self.W1[::-1]])
        curve = sample_curve(table, 0, 1)
        t = correlation_tangent(curve)
        self.assertAlmostEqual(t.a, t.b, delta=0.02)
        self.assertTrue(0 < t.M < 1)

    def test_near_identical(self):
        table = letter_table([self.W1, (1.01, SQRT2 * 0.99)])
        curve = sample_curve(table, 0, 1)
        pi = pressure_intersections(curve)
        self.assertTrue(0.97 <= pi.J_12 <= 1.03)
        self.assertTrue(0.97 <= pi.J_21 <= 1.03)

    def test_proportional(self):
        table = letter_table([self.W1, (2.0, 2 * SQRT2)])
        with self.assertRaises(ProportionalSpectraError) as ctx:
            sample_curve(table, 0, 1)
        self.assertIn("proportional spectra", str(ctx.exception))
        self.assertRaises(ProportionalSpectraError, correlate, table)

    def test_identical_forced(self):
        table = letter_table([self.W1, self.W1])
        curve = sample_curve(table, 0, 1, force=True)
        for b, a in zip(curve.b, curve.a):
            self.assertAlmostEqual(a, curve.h1 - b, delta=0.01)

        table = letter_table([self.W1, (2.0, 2 * SQRT2)])
        curve = sample_curve(table, 0, 1, force=True)
        for b, a in zip(curve.b, curve.a):
            self.assertAlmostEqual(a, curve.h1 - 2 * b, delta=0.01)
        self.assertAlmostEqual(pressure_intersections(curve).I_12, 2.0, delta=0.01)

    def test_count_toy(self):
        table = SpectrumTable([Column("x", "a1"), Column("y", "a1")], ["a", "b", "ab"], np.array([1, 1, 2]),
                              np.ones(3, bool), np.array([[3.0, 3.1], [3.05, 4.0], [5.0, 5.0]]), {"n_max": 2})
        fit = correlation_count(table, 0, 1, 1.0, 1.0, 0.2, [2.95], renormalized=False)
        self.assertEqual(fit.counts.tolist(), [1])
        self.assertIsNone(fit.M)
        self.assertRaises(EmptyWindowsError, correlation_count, table, 0, 1, 1.0, 1.0, 0.2, [2.95])
        self.assertRaises(InvalidArgumentError, correlation_count, table, 0, 1, 1.0, 1.0, 0.0, [2.95])

    def test_count_recount(self):
        rng = np.random.default_rng(11)
        l1, l2 = self.table.column(0), self.table.column(1)
        for _ in range(20):
            x, eps = rng.uniform(2.0, 10.0), rng.uniform(0.05, 1.0)
            fit = correlation_count(self.table, 0, 1, 1.0, 1.0, eps, [x], renormalized=False)
            brute = sum(1 for u, v in zip(l1, l2) if x < u < x + eps and x < v < x + eps)
            self.assertEqual(int(fit.counts[0]), brute)

    def test_vanishing(self):
        table = letter_table([self.W1, (1.5, 2.0)])
        h1, h2 = transfer_growth(self.W1), transfer_growth((1.5, 2.0))
        self.assertFalse(0.95 <= h1 / h2 <= 1.05)
        x = np.linspace(0.6, 12.0, 20)
        fit = correlation_count(table, 0, 1, h1, h2, 1.0, x, renormalized=False)
        self.assertGreater(fit.counts[0], 0)
        self.assertIsNotNone(fit.vanishing_threshold)
        self.assertLessEqual(fit.vanishing_threshold, 3.0)
        self.assertTrue(np.all(fit.counts[x >= fit.vanishing_threshold] == 0))

    def test_compare_lengths(self):
        cmp = compare_lengths(self.table, 0, 1, self.h1, self.h2)
        self.assertIsNone(cmp.dominating)
        self.assertTrue(cmp.crossing)
        dominated = letter_table([self.W1, (1.5, 2.0)])
        self.assertEqual(compare_lengths(dominated, 0, 1, 1.0, 1.0).dominating, "col2")

    def test_entropy_systole(self):
        sys_, h, product = entropy_systole_product(self.table, [0, 1])
        self.assertAlmostEqual(sys_, 2.3, places=12)
        self.assertAlmostEqual(h, transfer_growth(np.add(self.W1, self.W2)), delta=0.02)
        self.assertAlmostEqual(product, sys_ * h, places=12)

    def test_correlate(self):
        report = correlate(self.table, 0, 1, epsilon=1.0)
        self.assertTrue(0 < report.M_tangent < 1)
        self.assertTrue(0 < report.M_mins < 1)
        self.assertIsNotNone(report.curve)
        doc = json.loads(report.to_json())
        self.assertNotIn("curve", doc)
        self.assertIn("countfit", doc)
        self.assertIn("tangent_mins", doc["consistency"])


class TestSchottkyCorrelation(unittest.TestCase):
    PAIRS = ((0, 1), (0, 2), (1, 2))

    @classmethod
    def setUpClass(cls_) -> None:
        pairs = [(schottky_pair(*p), A1) for p in (SCHOTTKY_1, SCHOTTKY_2, SCHOTTKY_3)]
        cls_.table = compute_spectrum(pairs, 2, 14, threads=4)
        cls_.reports = {ij: correlate(cls_.table, *ij, epsilon=1.5, threads=4) for ij in cls_.PAIRS}

    def test_not_proportional(self):
        for i, j in self.PAIRS:
            kappa, residual, proportional = check_proportional(self.table.column(i), self.table.column(j))
            self.assertFalse(proportional)
            self.assertGreater(residual, 1.0)

    def test_curves(self):
        for (i, j), report in self.reports.items():
            curve = report.curve
            self.assertAlmostEqual(curve.a_at_zero, report.h1, delta=0.02)
            self.assertAlmostEqual(curve.root, report.h2, delta=0.02)
            self.assertLessEqual(curve.convexity_certificate, 5e-3)
            self.assertTrue(curve.monotone)
            self.assertGreaterEqual(min(report.J_12, report.J_21), 0.98)

    def test_correlation_numbers(self):
        for (i, j), report in self.reports.items():
            self.assertTrue(0 < report.M_tangent < 1)
            self.assertTrue(0 < report.M_mins < 1)
            self.assertAlmostEqual(report.M_tangent, report.M_mins, delta=0.02)
            self.assertLessEqual(report.point_on_curve_residual, 0.02)
            self.assertIsNotNone(report.M_countfit)
            self.assertAlmostEqual(report.M_countfit, report.M_tangent, delta=0.1)

    def test_entropies(self):
        for (i, j), report in self.reports.items():
            self.assertAlmostEqual(report.h1, entropy(self.table, i).value, places=12)
            self.assertTrue(0 < report.h2 < math.log(3))

    def test_countfit(self):
        report = self.reports[(0, 1)]
        fit = correlation_count(self.table, 0, 1, report.h1, report.h2, epsilon=1.5)
        self.assertGreaterEqual(int(np.count_nonzero(fit.counts)), 5)
        self.assertEqual(len(fit.residuals), int(np.count_nonzero(fit.counts)))
        self.assertAlmostEqual(fit.M, report.M_countfit, places=12)
        self.assertAlmostEqual(fit.C_over_eps2, fit.C / 2.25, places=12)


class TestPinching(unittest.TestCase):
    def test_demo(self):
        report = pinching_demo((1.0, 0.5, 0.25), 6.0, HALF_PI, n_max=10)
        self.assertEqual(report.failures, [None, None, None])
        self.assertTrue(all(m is not None and 0 < m < 1 for m in report.M))
        self.assertTrue(report.m_decreasing)
        self.assertTrue(all(s > 0 for s in report.systoles))
        for step in report.reports:
            self.assertAlmostEqual(step.h1, step.h2, delta=0.02)
        doc = json.loads(report.to_json())
        self.assertEqual(doc["epsilons"], [1.0, 0.5, 0.25])
        self.assertEqual(doc["M"], report.M)

    def test_order(self):
        self.assertRaises(InvalidArgumentError, pinching_demo, (0.5, 1.0))


class TestConfig(unittest.TestCase):
    def test_defaults(self):
        config = validate_config({})
        self.assertEqual(config, RunConfig())
        self.assertEqual(config.window_policy(), WindowPolicy())

    def test_rejects(self):
        for doc in ({"bogus": 1}, {"rank": 1}, {"n_max": "12"}, {"window": {"lo": 0.9, "hi": 0.5}},
                    {"representations": [{"type": "schottky", "la": 1}]}, {"functionals": "b1"}):
            self.assertRaises(ConfigError, validate_config, doc)

    def test_representations(self):
        config = validate_config({
            "representations": [{"type": "schottky", "la": 2.5, "lb": 2.5, "angle": HALF_PI},
                                {"type": "schottky", "la": 2.5, "lb": 2.5, "angle": HALF_PI}],
            "functionals": ["a1", {"coefficients": [1], "scale": 2}],
        })
        columns = config.columns()
        self.assertEqual(len(columns), 2)
        self.assertNotEqual(columns[0][0].label, columns[1][0].label)
        self.assertEqual([rep.label for rep, _ in columns],
                         ["schottky(2.5,2.5,1.5708)#0", "schottky(2.5,2.5,1.5708)#1"])
        self.assertEqual(dump_representation(columns[1][0])["label"], "schottky(2.5,2.5,1.5708)#1")
        self.assertEqual(columns[1][1].scale, 2.0)

    def test_hash(self):
        a = validate_config({"n_max": 8})
        self.assertEqual(parameter_hash(a, "0"), parameter_hash(validate_config({"n_max": 8}), "0"))
        self.assertNotEqual(parameter_hash(a, "0"), parameter_hash(a.with_overrides(n_max=9), "0"))
        self.assertEqual(parameter_hash(a, "0"), parameter_hash(a.with_overrides(threads=8), "0"))


class TestCli(unittest.TestCase):
    def run_main(self, *argv):
        out, err = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            code = main(list(argv))
        return code, out.getvalue(), err.getvalue()

    def write_config(self, tmp, doc):
        path = os.path.join(tmp, "run.json")
        with open(path, "w") as f:
            json.dump(doc, f)
        return path

    def test_enumerate(self):
        code, out, _ = self.run_main("enumerate", "--rank", "2", "--n-max", "3")
        self.assertEqual(code, 0)
        self.assertIn("n=3: 28 words, 12 classes", out)
        self.assertIn("n=1: 4 words, 4 classes", out)
        code, out, _ = self.run_main("enumerate", "--rank", "3", "--n-max", "2")
        self.assertIn("n=2: 30 words, 18 classes", out)

    def test_spectrum_cache(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = self.write_config(tmp, {"representations": [{"type": "schottky", "la": 1, "lb": 1,
                                                                  "angle": HALF_PI}], "n_max": 2, "force": True})
            out_dir = os.path.join(tmp, "out")
            code, _, _ = self.run_main("spectrum", "--config", config, "--out", out_dir)
            self.assertEqual(code, 0)
            csv_path = os.path.join(out_dir, "spectrum.csv")
            with open(csv_path, "rb") as f:
                first = f.read()
            self.assertEqual(first.count(b"\n"), 13)

            code, out, _ = self.run_main("spectrum", "--config", config, "--out", out_dir)
            self.assertEqual(code, 0)
            self.assertIn("cache hit", out)
            with open(csv_path, "rb") as f:
                self.assertEqual(f.read(), first)
            with open(os.path.join(out_dir, "manifest.json")) as f:
                self.assertIn("spectrum.csv", json.load(f)["files"])

            with open(csv_path) as f:
                lines = f.readlines()
            lines[2] = "a,1,1,oops\n"
            with open(csv_path, "w") as f:
                f.writelines(lines)
            code, _, err = self.run_main("spectrum", "--config", config, "--out", out_dir)
            self.assertEqual(code, 3)
            self.assertIn("row 3", err)

    def test_help(self):
        out = io.StringIO()
        with contextlib.redirect_stdout(out), self.assertRaises(SystemExit) as ctx:
            main(["--help"])
        self.assertEqual(ctx.exception.code, 0)
        for name in ("enumerate", "spectrum", "entropy", "manhattan", "correlate", "demo"):
            self.assertIn(name, out.getvalue())
            with contextlib.redirect_stdout(io.StringIO()), self.assertRaises(SystemExit) as ctx:
                main([name, "--help"])
            self.assertEqual(ctx.exception.code, 0)
        self.assertIn("Full correlation pipeline", out.getvalue())

    def test_entropy_manifest(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = self.write_config(tmp, {"representations": [{"type": "schottky", "la": 1.7, "lb": 3.5,
                                                                  "angle": 2 * math.pi / 5}], "n_max": 8})
            out_dir = os.path.join(tmp, "out")
            os.makedirs(out_dir)
            with open(os.path.join(out_dir, "stale.txt"), "w") as f:
                f.write("left over\n")
            code, out, _ = self.run_main("entropy", "--config", config, "--out", out_dir)
            self.assertEqual(code, 0)
            self.assertIn("h[", out)
            with open(os.path.join(out_dir, "manifest.json")) as f:
                files = json.load(f)["files"]
            self.assertEqual(sorted(files), ["entropy_0.json", "spectrum.csv", "spectrum.json"])

    def test_threads_determinism(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = self.write_config(tmp, {"representations": [
                {"type": "schottky", "la": 1.7, "lb": 3.5, "angle": 2 * math.pi / 5},
                {"type": "schottky", "la": 3.3, "lb": 1.9, "angle": HALF_PI}], "n_max": 10, "epsilon": 1.5})
            results = []
            for threads in ("1", "8"):
                out_dir = os.path.join(tmp, threads)
                code, out, _ = self.run_main("correlate", "--config", config, "--out", out_dir, "--threads", threads)
                self.assertEqual(code, 0)
                self.assertIn("M_tangent", out)
                self.assertTrue(os.path.exists(os.path.join(out_dir, "correlation.json")))
                files = {}
                for name in sorted(os.listdir(out_dir)):
                    with open(os.path.join(out_dir, name), "rb") as f:
                        files[name] = f.read()
                results.append(files)
            self.assertEqual(results[0], results[1])
            with open(os.path.join(tmp, "1", "manifest.json")) as f:
                manifest = json.load(f)["files"]
            self.assertIn("correlation.json", manifest)
            self.assertNotIn("manifest.json", manifest)
            self.assertEqual(set(manifest), set(results[0]) - {"manifest.json"})

    def test_proportional_exit(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = self.write_config(tmp, {
                "representations": [{"type": "schottky", "la": 2.5, "lb": 2.5, "angle": HALF_PI},
                                    {"type": "schottky", "la": 2.5, "lb": 2.5, "angle": HALF_PI}],
                "functionals": ["a1", {"coefficients": [1], "scale": 2}],
                "n_max": 3})
            code, _, err = self.run_main("correlate", "--config", config, "--out", os.path.join(tmp, "out"))
            self.assertEqual(code, 4)
            self.assertIn("proportional spectra", err)

    def test_config_exit(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = self.write_config(tmp, {"bogus": True})
            code, _, err = self.run_main("spectrum", "--config", config, "--out", tmp)
            self.assertEqual(code, 2)
            code, _, _ = self.run_main("spectrum", "--out", tmp)
            self.assertEqual(code, 2)

    def test_demo(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = self.write_config(tmp, {"demo": {"n_max": 10}})
            out_dir = os.path.join(tmp, "out")
            code, out, _ = self.run_main("correlate", "--demo", "pinching", "--config", config, "--out", out_dir)
            self.assertEqual(code, 0)
            self.assertIn("systole increasing", out)
            self.assertNotIn("failed", out)
            with open(os.path.join(out_dir, "pinching.json")) as f:
                doc = json.load(f)
            self.assertEqual(doc["K"], 6.0)
            self.assertEqual(doc["failures"], [None, None, None])
            self.assertTrue(all(0 < m < 1 for m in doc["M"]))
            self.assertTrue(doc["m_decreasing"])


if __name__ == "__main__":
    unittest.main()
