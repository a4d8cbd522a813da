import numpy as np
import pytest

from patternsynth.errors import UsageError
from patternsynth.quadtree import qts_from_observation
from patternsynth.tssl import check, parse, soundness_audit, value
from patternsynth.tssl import syntax as S

import helpers

ALL = frozenset({"NW", "NE", "SE", "SW"})

CHECKER_TEXT = "A * X A * X ( A {SW,NE} X (m >= 1) & A {NW,SE} X (m <= 0) )"
RELAXED_TEXT = "A * X A * X ( A {SW,NE} X (m >= 0.9) & A {NW,SE} X (m <= 0.1) )"


def checkerboard(side=8):
    return np.fromfunction(lambda i, j: (i + j) % 2, (side, side))


class TestCheckGoldens:
    def test_uniform_white_atoms(self):
        qts = qts_from_observation(np.ones((8, 8)))
        assert check(qts, parse("m >= 1")) is True
        assert check(qts, parse("m <= 0")) is False

    def test_checkerboard_formula(self):
        assert check(qts_from_observation(checkerboard()), parse(CHECKER_TEXT))

    def test_all_black_and_white_violate(self):
        phi = parse(CHECKER_TEXT)
        assert not check(qts_from_observation(np.zeros((8, 8))), phi)
        assert not check(qts_from_observation(np.ones((8, 8))), phi)

    def test_negation_flips_check(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            qts = helpers.random_qts(rng, int(rng.integers(1, 10)))
            phi = helpers.random_formula(rng, int(rng.integers(0, 4)))
            assert check(qts, S.Not(phi)) == (not check(qts, phi))

    def test_unknown_variable_rejected(self):
        qts = qts_from_observation(np.ones((8, 8)))
        with pytest.raises(UsageError):
            check(qts, parse("m2 >= 0.5"))
        with pytest.raises(UsageError):
            value(qts, parse("m2 >= 0.5"))


class TestValueGoldens:
    def test_atom_at_root_is_mean_minus_threshold(self):
        rng = np.random.default_rng(1)
        values = rng.uniform(0, 1, (8, 8))
        qts = qts_from_observation(values)
        root_mean = qts.values[qts.initial][0]
        for d in (0.0, 0.3, 0.9):
            assert value(qts, S.Atom("m1", ">=", d)) == root_mean - d
            assert value(qts, S.Atom("m1", "<=", d)) == d - root_mean

    def test_relaxed_checkerboard_value(self):
        qts = qts_from_observation(checkerboard())
        assert value(qts, parse(RELAXED_TEXT)) == pytest.approx(0.0015625, abs=1e-12)

    def test_exact_checkerboard_is_indeterminate_but_satisfied(self):
        qts = qts_from_observation(checkerboard())
        phi = parse(CHECKER_TEXT)
        assert value(qts, phi) == 0.0
        assert check(qts, phi) is True
        report = soundness_audit(qts, phi)
        assert report.verdict == "indeterminate"
        assert not report.violation

    def test_negation_antisymmetry_exact(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            qts = helpers.random_qts(rng, int(rng.integers(1, 12)))
            phi = helpers.random_formula(rng, int(rng.integers(0, 4)))
            assert value(qts, S.Not(phi)) == -value(qts, phi)

    def test_discount_bound_under_nested_next(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            qts = helpers.random_qts(rng, int(rng.integers(1, 8)))
            n = int(rng.integers(0, 5))
            phi: S.Formula = S.Atom("m1", ">=", float(rng.uniform(0, 1)))
            for _ in range(n):
                dirs = helpers.random_dirs(rng)
                phi = (S.ExistsNext(dirs, phi) if rng.random() < 0.5
                       else S.ForallNext(dirs, phi))
            assert abs(value(qts, phi)) <= qts.value_bound / 4 ** n + 1e-15

    def test_value_range(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            qts = helpers.random_qts(rng, int(rng.integers(1, 12)))
            phi = helpers.random_formula(rng, int(rng.integers(0, 5)))
            assert abs(value(qts, phi)) <= qts.value_bound

    def test_atom_monotone_in_threshold(self):
        rng = np.random.default_rng(5)
        qts = helpers.random_qts(rng, 6)
        thresholds = np.sort(rng.uniform(0, 1, 10))
        vals = [value(qts, S.Atom("m1", ">=", float(d))) for d in thresholds]
        assert all(b <= a for a, b in zip(vals, vals[1:]))

    def test_top_is_positive_and_satisfied(self):
        rng = np.random.default_rng(6)
        qts = helpers.random_qts(rng, 5)
        assert value(qts, S.Top()) == qts.value_bound > 0
        assert check(qts, S.Top())


class TestDuality:
    def test_globally_duality_structural(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            dirs = helpers.random_dirs(rng)
            k = int(rng.integers(1, 4))
            sub = helpers.random_formula(rng, 2)
            assert S.exists_globally(dirs, k, sub) == S.Not(
                S.forall_finally(dirs, k, S.Not(sub)))
            assert S.forall_globally(dirs, k, sub) == S.Not(
                S.exists_finally(dirs, k, S.Not(sub)))

    def test_globally_duality_semantic(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            qts = helpers.random_qts(rng, int(rng.integers(1, 8)))
            dirs = helpers.random_dirs(rng)
            k = int(rng.integers(1, 4))
            sub = helpers.random_formula(rng, 1)
            eg = S.exists_globally(dirs, k, sub)
            dual = S.Not(S.forall_finally(dirs, k, S.Not(sub)))
            assert check(qts, eg) == check(qts, dual)
            assert value(qts, eg) == value(qts, dual)


class TestBruteForceAgreement:
    def test_small_random_qts_and_formulas(self):
        rng = np.random.default_rng(9)
        for _ in range(150):
            qts = helpers.random_qts(rng, int(rng.integers(1, 9)), channels=1)
            phi = helpers.random_formula(rng, int(rng.integers(0, 4)))
            assert check(qts, phi) == helpers.naive_check(qts, phi)
            assert value(qts, phi) == helpers.naive_value(qts, phi)

    def test_checkerboard_against_naive(self):
        qts = qts_from_observation(checkerboard())
        for text in (CHECKER_TEXT, RELAXED_TEXT, "E * F 2 (m >= 1)",
                     "A {NW} [ m <= 0.6 U 3 m >= 1 ]"):
            phi = parse(text)
            assert check(qts, phi) == helpers.naive_check(qts, phi)
            assert value(qts, phi) == helpers.naive_value(qts, phi)


class TestSoundness:
    def test_no_violations_on_random_corpus(self):
        rng = np.random.default_rng(10)
        indeterminate = 0
        for _ in range(500):
            qts = helpers.random_qts(rng, int(rng.integers(1, 20)), channels=2)
            phi = helpers.random_formula(rng, int(rng.integers(0, 5)), channels=2)
            report = soundness_audit(qts, phi)
            assert not report.violation
            indeterminate += report.verdict == "indeterminate"
        assert indeterminate < 50  # ties should be rare with random thresholds
