import itertools
import json
import math

import numpy as np
import pytest

from qlime.encoder import CoFeaturePolicy, FlipMode
from qlime.errors import ExplanationError, ShapeError
from qlime.explain import (
    Entry,
    Explanation,
    LimeConfig,
    QlimeConfig,
    lime_explain,
    overlap,
    qlime_explain,
    surrogate_eval,
    top_k,
    weighted_ridge,
)
from qlime.model import LogisticModel

HOLD = QlimeConfig(policy=CoFeaturePolicy.DETERMINISTIC_HOLD)
TOKENS3 = ("alpha", "beta", "gamma")


def sig(z):
    return 1.0 / (1.0 + math.exp(-z))


def vocab_of(n):
    return tuple(f"tok{i:02d}" for i in range(n))


def expl(pairs, vocab=()):
    return Explanation([Entry(i, t, w) for i, t, w in pairs], "QLIME", 0, None, 0, vocab)


class TestQlime:
    def test_nothing_to_flip(self):
        m = LogisticModel(np.array([1.0, 2.0]), 0.0)
        e = qlime_explain(m, [0, 0], ("aa", "bb"))
        assert e.entries == [] and e.model_evals == 1 and m.eval_counter == 1

    def test_hold_value(self):
        # sigma(1.5) - sigma(-0.5), frozen from a 30-digit evaluation
        m = LogisticModel(np.array([2.0, -1.0, 0.5]), 0.0)
        e = qlime_explain(m, [1, 1, 1], TOKENS3, HOLD)
        assert e.weights()[0] == pytest.approx(0.4400338073954982, abs=1e-12)

    def test_hold_entries_sorted_by_magnitude(self):
        m = LogisticModel(np.array([2.0, -1.0, 0.5]), 0.0)
        e = qlime_explain(m, [1, 1, 1], TOKENS3, HOLD)
        assert [x.token for x in e.entries] == ["alpha", "beta", "gamma"]
        assert e.weights()[1] < 0

    def test_sampled_expectation_two_features(self):
        m = LogisticModel(np.array([1.3, -0.7]), 0.2)
        R = 10_000
        e = qlime_explain(m, [1, 1], ("aa", "bb"), QlimeConfig(repeats=R, seed=3))
        f = lambda x: sig(1.3 * x[0] - 0.7 * x[1] + 0.2)
        outcomes = [f([1, 1]) - f([0, 0]), f([1, 1]) - f([0, 1])]
        mean, sd = np.mean(outcomes), np.std(outcomes)
        assert abs(e.weights()[0] - mean) <= 3 * sd / math.sqrt(R)

    @pytest.mark.parametrize("shots", [None, 100])
    @pytest.mark.parametrize("repeats", [1, 3])
    def test_eval_count(self, shots, repeats):
        rng = np.random.default_rng(1)
        m = LogisticModel(rng.normal(size=8), 0.1)
        x = np.array([1, 0, 1, 1, 0, 1, 0, 1])
        e = qlime_explain(m, x, vocab_of(8), QlimeConfig(shots=shots, repeats=repeats))
        assert e.model_evals == 1 + repeats * 5 == m.eval_counter

    def test_entries_cover_present_features(self):
        m = LogisticModel(np.ones(6), 0.0)
        x = np.array([0, 1, 1, 0, 1, 0])
        e = qlime_explain(m, x, vocab_of(6), QlimeConfig(seed=2))
        assert sorted(en.index for en in e.entries) == [1, 2, 4]

    def test_zero_to_one_covers_absent_features(self):
        m = LogisticModel(np.ones(4), 0.0)
        cfg = QlimeConfig(flip_mode=FlipMode.ZERO_TO_ONE, policy=CoFeaturePolicy.DETERMINISTIC_HOLD)
        e = qlime_explain(m, [1, 0, 0, 1], vocab_of(4), cfg)
        assert sorted(en.index for en in e.entries) == [1, 2]
        # adding a positive-weight feature raises f, so the difference is negative
        assert all(en.weight < 0 for en in e.entries)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_hold_oracle_exhaustive(self, n):
        rng = np.random.default_rng(n)
        w, b = rng.normal(size=n) * 2, float(rng.normal())
        m = LogisticModel(w, b)
        for x in itertools.product([0, 1], repeat=n):
            x = np.array(x)
            e = qlime_explain(m, x, vocab_of(n), HOLD)
            z = float(w @ x + b)
            for entry in e.entries:
                expected = sig(z) - sig(z - w[entry.index])
                assert entry.weight == pytest.approx(expected, abs=1e-12)
                assert np.sign(entry.weight) == np.sign(w[entry.index])

    @pytest.mark.parametrize("seed", range(10))
    def test_dominant_weight_ranks_first(self, seed):
        rng = np.random.default_rng(seed)
        n = 6
        w = rng.uniform(-0.3, 0.3, size=n)
        j = int(rng.integers(n))
        w[j] = np.sign(rng.normal()) * (np.abs(np.delete(w, j)).sum() + 0.5)
        e = qlime_explain(LogisticModel(w, 0.0), np.ones(n, dtype=int), vocab_of(n), HOLD)
        assert top_k(e, 1) == [vocab_of(n)[j]]

    @pytest.mark.parametrize("backend", ["dense", "product"])
    def test_deterministic(self, backend):
        rng = np.random.default_rng(5)
        m = LogisticModel(rng.normal(size=10), 0.0)
        x = rng.integers(0, 2, size=10)
        cfg = QlimeConfig(seed=99, backend=backend)
        a = qlime_explain(m, x, vocab_of(10), cfg)
        b = qlime_explain(m, x, vocab_of(10), cfg)
        assert a.entries == b.entries

    def test_backends_agree_in_expectation(self):
        rng = np.random.default_rng(8)
        m = LogisticModel(rng.normal(size=6), 0.3)
        x = np.array([1, 1, 0, 1, 1, 0])
        R = 20_000
        d = qlime_explain(m, x, vocab_of(6), QlimeConfig(repeats=R, seed=1)).weights()
        p = qlime_explain(m, x, vocab_of(6), QlimeConfig(repeats=R, seed=2, backend="product")).weights()
        for k in d:
            # both are means of R draws with per-draw spread below 0.5
            assert abs(d[k] - p[k]) < 4 * 0.5 * math.sqrt(2 / R)

    def test_length_mismatch(self):
        m = LogisticModel(np.ones(3), 0.0)
        with pytest.raises(ShapeError):
            qlime_explain(m, [1, 1], ("aa", "bb"))
        with pytest.raises(ShapeError):
            qlime_explain(m, [1, 1, 1], ("aa", "bb"))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            QlimeConfig(repeats=0)
        with pytest.raises(ValueError):
            QlimeConfig(backend="product", shots=100)


class TestLime:
    def test_single_signal_top1(self):
        n, j = 8, 3
        w = np.zeros(n)
        w[j] = 2.0
        m = LogisticModel(w, -1.0)
        x = np.ones(n, dtype=int)
        hits = sum(top_k(lime_explain(m, x, vocab_of(n), LimeConfig(seed=s)), 1) == [vocab_of(n)[j]]
                   for s in range(10))
        assert hits >= 10 * 0.95

    def test_constant_model(self):
        m = LogisticModel(np.zeros(5), 0.0)
        e = lime_explain(m, [1, 1, 0, 1, 1], vocab_of(5))
        assert all(abs(en.weight) < 1e-6 for en in e.entries)

    def test_eval_count(self):
        m = LogisticModel(np.ones(4), 0.0)
        e = lime_explain(m, [1, 0, 1, 1], vocab_of(4), LimeConfig(n_perturbations=300))
        assert e.model_evals == 300 == m.eval_counter

    def test_entries_cover_present_features(self):
        m = LogisticModel(np.ones(5), 0.0)
        e = lime_explain(m, [0, 1, 1, 0, 1], vocab_of(5))
        assert sorted(en.index for en in e.entries) == [1, 2, 4]

    def test_all_zero_instance(self):
        with pytest.raises(ExplanationError):
            lime_explain(LogisticModel(np.ones(3), 0.0), [0, 0, 0], TOKENS3)

    def test_deterministic(self):
        m = LogisticModel(np.array([1.0, -2.0, 0.5, 0.1]), 0.0)
        a = lime_explain(m, [1, 1, 1, 1], vocab_of(4), LimeConfig(seed=4))
        b = lime_explain(m, [1, 1, 1, 1], vocab_of(4), LimeConfig(seed=4))
        assert a.entries == b.entries

    def test_linear_target_recovered(self):
        # for an (almost) linear response the ridge coefficients approach the slopes
        w = np.array([0.02, -0.01, 0.03])
        m = LogisticModel(w, 0.0)
        e = lime_explain(m, [1, 1, 1], TOKENS3, LimeConfig(n_perturbations=2000, ridge_lambda=1e-6))
        np.testing.assert_allclose([e.weights()[i] for i in range(3)], w / 4, rtol=0.05)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            LimeConfig(n_perturbations=0)
        with pytest.raises(ValueError):
            LimeConfig(kernel_width=0)


class TestWeightedRidge:
    @pytest.mark.parametrize("seed", range(5))
    def test_matches_augmented_least_squares(self, seed):
        rng = np.random.default_rng(seed)
        N, d, lam = 40, 4, 0.7
        Z = rng.integers(0, 2, size=(N, d)).astype(float)
        y = rng.normal(size=N)
        sw = rng.uniform(0.1, 1.0, size=N)
        coef, icpt = weighted_ridge(Z, y, sw, lam)
        # oracle: sqrt-weighted rows plus penalty rows that leave the intercept free
        A = np.hstack([Z, np.ones((N, 1))]) * np.sqrt(sw)[:, None]
        pen = np.hstack([np.sqrt(lam) * np.eye(d), np.zeros((d, 1))])
        sol, *_ = np.linalg.lstsq(np.vstack([A, pen]), np.concatenate([y * np.sqrt(sw), np.zeros(d)]),
                                  rcond=None)
        np.testing.assert_allclose(coef, sol[:d], atol=1e-10)
        assert icpt == pytest.approx(sol[d], abs=1e-10)


class TestSurrogate:
    def test_dot_product(self):
        e = expl([(0, "a", 0.4), (2, "c", -0.1)])
        assert surrogate_eval(e, [1, 0, 1]) == pytest.approx(0.3)

    def test_zero_vector(self):
        assert surrogate_eval(expl([(0, "a", 0.4)]), [0, 0, 0]) == 0

    def test_empty(self):
        assert surrogate_eval(expl([]), [1, 1]) == 0

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            surrogate_eval(expl([(0, "a", 1.0)], ("a", "b", "c")), [1, 1])
        with pytest.raises(ShapeError):
            surrogate_eval(expl([(4, "e", 1.0)]), [1, 1])


class TestTopKOverlap:
    def test_truncates(self):
        e = expl([(i, f"t{i}", 1.0 / (i + 1)) for i in range(7)])
        assert top_k(e, 5) == ["t0", "t1", "t2", "t3", "t4"]

    def test_short_list(self):
        e = expl([(i, f"t{i}", 1.0) for i in range(3)])
        assert len(top_k(e, 5)) == 3

    def test_tie_rule_from_explainer(self):
        m = LogisticModel(np.array([1.0, 1.0, 1.0]), 0.0)
        e = qlime_explain(m, [1, 1, 1], ("cc", "aa", "bb"), HOLD)
        assert top_k(e, 3) == ["aa", "bb", "cc"]

    def test_bad_k(self):
        with pytest.raises(ValueError):
            top_k(expl([]), 0)

    def test_identical(self):
        e = expl([(i, f"t{i}", 1.0) for i in range(5)])
        assert overlap(e, e, 5) == 5

    def test_disjoint(self):
        a = expl([(i, f"a{i}", 1.0) for i in range(5)])
        b = expl([(i, f"b{i}", 1.0) for i in range(5)])
        assert overlap(a, b, 5) == 0

    def test_vocab_mismatch(self):
        with pytest.raises(ExplanationError):
            overlap(expl([], ("a",)), expl([], ("b",)), 5)


class TestJson:
    def test_schema(self):
        m = LogisticModel(np.array([2.0, -1.0, 0.5]), 0.0)
        e = qlime_explain(m, [1, 1, 1], TOKENS3, QlimeConfig(seed=4, shots=100))
        doc = json.loads(e.to_json())
        assert set(doc) == {"method", "seed", "shots", "model_evals", "entries"}
        assert doc["method"] == "QLIME" and doc["shots"] == 100 and doc["seed"] == 4
        assert doc["model_evals"] == 4
        assert set(doc["entries"][0]) == {"index", "token", "weight"}

    def test_truncated(self):
        m = LogisticModel(np.ones(4), 0.0)
        e = lime_explain(m, [1, 1, 1, 1], vocab_of(4))
        assert len(e.to_dict(top_k=2)["entries"]) == 2
        assert e.to_dict()["shots"] is None
