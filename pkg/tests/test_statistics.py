import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from poisgof._layout import STAT_COLUMNS
from poisgof.distributions import DomainError, Poisson, RngHandle, sample
from poisgof.empirical import CountSample, FittedNull, mle_lambda
from poisgof.statistics import (
    TABLE_ORDER,
    StatisticId,
    compute,
    evaluate,
    parse_statistics,
    stat_ad,
    stat_cv,
    stat_id,
    stat_kl,
    stat_ks,
    stat_t1,
    stat_t2,
    stat_tinf,
    statistic_matrix,
)

TWO = CountSample([0, 1])
TWO_FIT = FittedNull(0.5)


def close(a, b, tol=1e-10):
    return abs(a - b) <= tol * max(1.0, abs(b))


class TestHandExamples:
    def test_t1(self):
        assert stat_t1(TWO, TWO_FIT, "fit") == pytest.approx(0.393469, abs=5e-7)
        # exact value 0.628388; six-decimal rounding of the terms shifts a hand sum by ~3e-5
        assert stat_t1(TWO, TWO_FIT, "lap", a=1.0) == pytest.approx(0.628416, abs=5e-5)
        assert stat_t1(TWO, TWO_FIT, "lap", a=1.0) == pytest.approx(
            (1 - 0.5 * math.exp(0.5)) + (math.exp(0.5) - 1) * math.exp(-1) + math.exp(-2) / (1 - math.exp(-1)),
            rel=1e-14,
        )

    def test_t2_root_and_squared(self):
        root = stat_t2(TWO, TWO_FIT, "fit", root=True)
        assert root == pytest.approx(0.486368, abs=2e-5)
        assert stat_t2(TWO, TWO_FIT, "fit") == pytest.approx(root**2, rel=1e-14)

    def test_tinf_emp(self):
        assert stat_tinf(TWO, TWO_FIT, "emp") == pytest.approx(0.324361, abs=5e-7)

    def test_ks(self):
        assert stat_ks(TWO, TWO_FIT) == pytest.approx(0.106531, abs=5e-7)

    def test_cv(self):
        f = oracles.pmf_table(0.5, 101)
        F = np.cumsum(f)
        expect = 0.5 * (0.106531**2 * 0.606531 + 0.090204**2 * 0.303265 + ((1 - F[2:101]) ** 2 * f[2:101]).sum())
        assert stat_cv(TWO, TWO_FIT) == pytest.approx(expect, rel=1e-4)
        assert stat_cv(TWO, TWO_FIT) == pytest.approx(oracles.cv([0, 1]), rel=1e-12)

    def test_ad(self):
        assert stat_ad(TWO, TWO_FIT) == pytest.approx(oracles.ad([0, 1]), rel=1e-12)

    def test_kl_sums_over_all_integers(self):
        # sqrt(2) * (|0.5 - F(0)| + |1 - F(1)| + sum_{k >= 2} (1 - F(k)))
        f = oracles.pmf_table(0.5, 200)
        F = np.cumsum(f)
        expect = math.sqrt(2) * (abs(0.5 - F[0]) + abs(1 - F[1]) + (1 - F[2:]).sum())
        assert stat_kl(TWO, TWO_FIT) == pytest.approx(expect, rel=1e-12)
        assert stat_kl(TWO, TWO_FIT) == pytest.approx(0.301314, abs=5e-7)

    def test_id_single_point(self):
        five = CountSample([5])
        value = stat_id(five, mle_lambda(five))
        assert abs(value - oracles.id_grid([5])) <= 1e-9

    def test_compute_dispatch(self, sparrow):
        assert compute(StatisticId.T1_LAP, TWO).value == pytest.approx(stat_t1(TWO, TWO_FIT, "lap"))
        assert compute(StatisticId.KS, TWO).value == pytest.approx(0.106531, abs=5e-7)
        assert round(compute(StatisticId.AD, sparrow).value, 3) == 0.001


class TestPracticalExamples:
    SPARROW = {"t1-fit": 0.377, "t1-emp": 0.409, "t1-lap": 0.574, "t2-fit": 0.155, "t2-emp": 0.179,
               "t2-lap": 0.223, "tinf-fit": 0.184, "tinf-emp": 0.276, "tinf-lap": 0.324,
               "cv": 0.000, "ad": 0.001, "kl": 1.364, "id": 0.682}
    HORSE = {"t1-fit": 0.705, "t1-emp": 1.432, "t1-lap": 1.776, "t2-fit": 1.179, "t2-emp": 5.282,
             "t2-lap": 2.673, "tinf-fit": 0.075, "tinf-emp": 0.365, "tinf-lap": 1.000,
             "cv": 0.000, "ad": 0.003, "kl": 5.094, "id": 2.481}

    def test_sparrow(self, sparrow):
        values = evaluate(sparrow)
        for name, expect in self.SPARROW.items():
            assert round(values[StatisticId(name)], 3) == expect, name

    def test_horsekicks(self, horsekicks):
        values = evaluate(horsekicks)
        for name, expect in self.HORSE.items():
            assert round(values[StatisticId(name)], 3) == expect, name

    def test_ks_is_unscaled(self, sparrow, horsekicks):
        # the sqrt(n)-scaled form gives 0.682 and 0.701
        assert round(math.sqrt(40) * evaluate(sparrow)[StatisticId.KS], 3) == 0.682
        assert round(math.sqrt(20) * evaluate(horsekicks)[StatisticId.KS], 3) == 0.701


class TestOracleEquivalence:
    def test_small_samples(self, small_samples):
        for values in small_samples[:200]:
            row = statistic_matrix(np.array([values]))[0]
            expect = {**oracles.weighted_statistics(values), **oracles.all_competitors(values)}
            for name, value in expect.items():
                assert close(row[STAT_COLUMNS.index(name)], value), (values, name)

    @pytest.mark.parametrize("a", [0.25, 1.0, 3.0])
    def test_laplace_parameter(self, a):
        values = [0, 2, 2, 3, 7]
        row = statistic_matrix(np.array([values]), laplace_a=a)[0]
        expect = oracles.weighted_statistics(values, a=a)
        for name in ("t1-lap", "t2-lap", "tinf-lap"):
            assert close(row[STAT_COLUMNS.index(name)], expect[name])

    def test_larger_means(self):
        rng = np.random.default_rng(4)
        for lam in (7.5, 18.0, 45.0):
            values = [int(v) for v in rng.poisson(lam, 25)]
            row = statistic_matrix(np.array([values]))[0]
            expect = {**oracles.weighted_statistics(values), **oracles.all_competitors(values)}
            for name, value in expect.items():
                assert close(row[STAT_COLUMNS.index(name)], value), (lam, name)


class TestBackends:
    def test_agree_on_random_rows(self, backend):
        rng = np.random.default_rng(8)
        values = rng.poisson(2.5, size=(300, 17))
        values[::7] = rng.negative_binomial(1, 0.2, size=(len(values[::7]), 17))
        values[5] = 0
        lam = values.mean(axis=1)
        got = backend.all_statistics(values, lam, 1.0)
        expect = statistic_matrix(values)
        assert np.allclose(got, expect, rtol=1e-12, atol=1e-14)

    def test_batch_independence(self, backend):
        rng = np.random.default_rng(2)
        values = rng.poisson(4.0, size=(50, 9))
        whole = backend.all_statistics(values, values.mean(axis=1), 1.0)
        parts = [backend.all_statistics(values[i:i + 1], values[i:i + 1].mean(axis=1), 1.0) for i in range(50)]
        assert np.array_equal(whole, np.vstack(parts))

    def test_inversion_identical(self):
        from poisgof import kernels

        found = kernels.backends()
        if len(found) < 2:
            pytest.skip("compiled backend not built")
        u = np.random.default_rng(1).random(20_000)
        for lam in (0.05, 1.1, 9.8, 29.5):
            outs = [mod.poisson_inversion(lam, u) for mod in found.values()]
            assert all(np.array_equal(outs[0], o) for o in outs[1:])


class TestIdentities:
    def test_t1_fit_dual_path(self, small_samples):
        for values in small_samples[:300]:
            s = CountSample(values)
            fit = mle_lambda(s)
            f = oracles.pmf_table(fit.lambda_hat, s.m + 400)
            weights = np.zeros(s.m + 1)
            fn = s.counts / s.n
            nz = fn > 0
            weights[nz] = fn[nz] / f[: s.m + 1][nz]
            by_weight = (np.abs(weights - 1) * f[: s.m + 1]).sum() + f[s.m + 1:].sum()
            assert abs(stat_t1(s, fit, "fit") - by_weight) <= 1e-12

    def test_tinf_fit_uses_tail_max(self):
        s = CountSample([3, 3, 3, 3])
        fit = mle_lambda(s)
        assert stat_tinf(s, fit, "fit") >= oracles.pmf_table(3.0, 10)[4]


class TestDegenerate:
    def test_all_zero_sample(self):
        row = dict(zip(STAT_COLUMNS, statistic_matrix(np.zeros((1, 4), dtype=int))[0]))
        lap_tail = math.exp(-1) / (1 - math.exp(-1))
        assert row["t1-lap"] == pytest.approx(lap_tail, rel=1e-14)
        assert row["t2-lap"] == pytest.approx(lap_tail, rel=1e-14)
        assert row["tinf-lap"] == pytest.approx(math.exp(-1), rel=1e-14)
        for name in ("t1-fit", "t1-emp", "t2-fit", "t2-emp", "tinf-fit", "tinf-emp", "ks", "cv", "ad", "kl", "id"):
            assert row[name] == 0.0, name


class TestValidation:
    def test_parse(self):
        assert parse_statistics("all") == list(TABLE_ORDER)
        assert parse_statistics("KS, t1-lap,ks") == [StatisticId.KS, StatisticId.T1_LAP]
        assert parse_statistics(["id"]) == [StatisticId.ID]
        with pytest.raises(DomainError):
            parse_statistics("t3-fit")
        with pytest.raises(DomainError):
            parse_statistics("")

    def test_bad_laplace(self):
        with pytest.raises(DomainError):
            statistic_matrix(np.array([[1, 2]]), laplace_a=0.0)

    def test_bad_weight(self):
        with pytest.raises(DomainError):
            stat_t1(TWO, TWO_FIT, "uniform")

    def test_tinf_fit_precondition(self):
        with pytest.raises(DomainError):
            stat_tinf(CountSample([0, 1]), FittedNull(3.0), "fit")

    def test_members(self):
        assert len(StatisticId) == 14
        assert sum(s.is_new for s in StatisticId) == 9
        assert {s for s in StatisticId if s.uses_laplace} == {StatisticId.T1_LAP, StatisticId.T2_LAP, StatisticId.TINF_LAP}


@given(st.lists(st.integers(0, 40), min_size=1, max_size=30))
@settings(max_examples=300, deadline=None)
def test_values_non_negative_finite_and_order_free(values):
    a = statistic_matrix(np.array([values]))[0]
    b = statistic_matrix(np.array([sorted(values, reverse=True)]))[0]
    assert np.all(np.isfinite(a)) and np.all(a >= 0)
    assert np.array_equal(a, b)


def test_outlier_saturation_stays_finite():
    row = statistic_matrix(np.array([[0] * 99 + [900]]))[0]
    assert np.all(np.isfinite(row))


@pytest.mark.slow
@pytest.mark.parametrize("lam", [0.5, 4.0, 20.0])
def test_ks_consistency(lam):
    s = CountSample(sample(Poisson(lam), 10**5, RngHandle(23)))
    assert stat_ks(s, mle_lambda(s)) <= 0.01
    assert stat_cv(s, mle_lambda(s)) <= 1e-4
