import math

import numpy as np
import pytest

from risklab import (
    BoundConstants,
    check_spectrum_condition,
    gd_lower_bound,
    gd_ridge_type_bound,
    gd_sgd_type_bound,
    make_custom_problem,
    make_power_law_problem,
    make_spike_problem,
    power_law_exponent,
    ridge_bound,
    sgd_bound,
    shrinkage_matrix,
)


def _brute_k_star(lam, reg, n, c2, include_tail):
    d = lam.size
    for k in range(d):
        lhs = reg + (lam[k:].sum() / n if include_tail else 0.0)
        if lhs >= c2 * lam[k]:
            return k
    return d


class TestRidgeBound:
    def test_power_law_k_star_matches_brute_force(self):
        lam = np.arange(1, 100001, dtype=float) ** -2.0
        prob = make_custom_problem(lam, np.zeros(100000), 1.0)
        report = ridge_bound(prob, 100, 0.0)
        # borderline index: the tail sum at k = 198 misses 2*lam_199 by ~0.3%,
        # so the scan lands at 199 (confirmed by the brute-force oracle)
        assert report.k_star == 199
        assert report.k_star == _brute_k_star(lam, 0.0, 100, 2.0, True)

    def test_large_lambda_gives_zero_head(self):
        prob = make_power_law_problem(2.0, 1.0, 200)
        lam1 = prob.spectrum.eigenvalues[0]
        report = ridge_bound(prob, 50, 2.0 * lam1)
        assert report.k_star == 0
        assert report.tilde_lambda == pytest.approx(
            2.0 * lam1 + prob.spectrum.trace / 50)
        assert report.bias_head == 0.0

    def test_zero_signal(self):
        prob = make_custom_problem([1.0, 0.5], [0.0, 0.0], 1.0)
        report = ridge_bound(prob, 20, 0.1)
        assert report.bias_head == 0.0 and report.bias_tail == 0.0
        assert report.upper_total == pytest.approx(report.variance_term)

    def test_k_star_nonincreasing_in_lambda(self):
        prob = make_power_law_problem(2.0, 1.0, 2000)
        ks = [ridge_bound(prob, 100, lam).k_star
              for lam in np.geomspace(1e-6, 1.0, 12)]
        assert all(b <= a for a, b in zip(ks, ks[1:]))

    def test_tilde_lambda_dominates_lambda(self):
        prob = make_power_law_problem(1.5, 0.5, 1000)
        for lam in (0.0, 1e-3, 0.1):
            report = ridge_bound(prob, 80, lam)
            assert report.tilde_lambda >= lam
            assert report.k_star <= report.D + 1e-12


class TestSGDBound:
    def test_zero_stepsize(self):
        prob = make_power_law_problem(2.0, 1.0, 300)
        report = sgd_bound(prob, 100, 0.0)
        assert report.k_star == 0
        assert report.bias_head == pytest.approx(prob.signal_energy)

    def test_spike_critical_index(self):
        # the source analysis is asymptotic in its constants: at n = 100 the
        # head condition 1/(eta0*N) >= c2 * lam_1 needs c2 of order 12
        prob = make_spike_problem(100, 10000)
        eta0 = 1.0 / (4.0 * prob.spectrum.trace)
        report = sgd_bound(prob, 100, eta0, BoundConstants(c2=12.0))
        assert report.k_star == 1
        assert 1.0 <= report.D <= 1.1  # D = 1 + (eta0 N)^2 (d-1)/d^2 = Theta(1)
        assert report.preconditions_met["stepsize_ok"]
        assert report.preconditions_met["n_large"]

    def test_zero_signal_totals(self):
        lam = np.arange(1, 501, dtype=float) ** -2.0
        prob = make_custom_problem(lam, np.zeros(500), 1.0)
        report = sgd_bound(prob, 200, 0.05)
        assert report.upper_total == pytest.approx(report.D / report.N)
        assert report.lower_total == pytest.approx(report.D / report.N)

    def test_bias_is_exact_schedule_product(self):
        from risklab import sgd_schedule

        prob = make_power_law_problem(2.0, 1.0, 50)
        n, eta0 = 128, 0.05
        report = sgd_bound(prob, n, eta0)
        lam = prob.spectrum.eigenvalues
        factor = np.ones_like(lam)
        for eta in sgd_schedule(n, eta0):
            factor *= (1.0 - eta * lam) ** 2
        expected = float(np.sum(lam * prob.wstar**2 * factor))
        assert report.bias_head == pytest.approx(expected, rel=1e-12)

    def test_small_n_flagged(self):
        prob = make_power_law_problem(2.0, 1.0, 100)
        report = sgd_bound(prob, 50, 0.05)
        assert not report.preconditions_met["n_large"]


class TestGDRidgeType:
    def test_matches_ridge_under_matching_rule(self):
        prob = make_power_law_problem(2.0, 1.0, 2000)
        n, eta = 100, 1.0 / (2.0 * prob.spectrum.trace)
        for lam in np.geomspace(1e-4, 0.5, 8):
            t = math.ceil(1.0 / (eta * lam))
            rb = ridge_bound(prob, n, lam)
            gb = gd_ridge_type_bound(prob, n, eta, t)
            # ceil makes 1/(eta*t) <= lam, so borderline scans may differ
            # by one index; lam-tilde stays within a factor of 2
            assert abs(gb.k_star - rb.k_star) <= 1
            assert 0.5 <= gb.tilde_lambda / rb.tilde_lambda <= 2.0

    def test_infinite_t_limit(self):
        prob = make_power_law_problem(2.0, 1.0, 500)
        report = gd_ridge_type_bound(prob, 50, 0.1, 10**12)
        tail = prob.spectrum.tail_sum(report.k_star)
        assert report.tilde_lambda == pytest.approx(tail / 50, rel=1e-6)

    def test_t_zero_sentinel(self):
        prob = make_power_law_problem(2.0, 1.0, 100)
        report = gd_ridge_type_bound(prob, 50, 0.1, 0)
        assert report.k_star == 0
        assert report.bias_head == 0.0
        assert report.bias_tail == pytest.approx(prob.signal_energy)

    def test_spike_k_star(self):
        prob = make_spike_problem(100, 10000)
        eta_t = 100.0**0.9
        report = gd_ridge_type_bound(prob, 100, 1.0, math.ceil(eta_t))
        assert report.k_star == 1


class TestGDLower:
    def test_spike_ell_star(self):
        report = gd_lower_bound(make_spike_problem(100, 10000), 100, 1.0, 1)
        assert report.ell_star == 1

    def test_spike_head_rate(self):
        for n in (50, 100, 200):
            prob = make_spike_problem(n, n * n)
            report = gd_lower_bound(prob, n, 1.0, 1)
            assert report.bias_head == pytest.approx(float(n) ** -0.2,
                                                     rel=0.05)

    def test_zero_signal(self):
        prob = make_custom_problem([1.0, 0.5], [0.0, 0.0], 1.0)
        report = gd_lower_bound(prob, 10, 0.3, 4)
        assert report.lower_total == pytest.approx(
            min(report.D / 10, 1.0))


class TestGDSGDType:
    def test_d_le_d1(self):
        prob = make_power_law_problem(2.0, 1.0, 1000)
        for t in (1, 10, 100, 1000):
            report = gd_sgd_type_bound(prob, 100, 0.1, t)
            assert report.D <= report.D1 + 1e-12

    def test_assumption_41_sandwich(self):
        # a geometric spectrum with ratio q has sup tau*tail/count =
        # q/(q-1) at the head, so 2^-i satisfies the decay condition with
        # sigma = 2 (not 1: a coarse tau grid can miss the supremum)
        lam = 2.0 ** -np.arange(1, 21, dtype=float)
        prob = make_custom_problem(lam, np.zeros(20), 1.0)
        assert not check_spectrum_condition(prob.spectrum, 1.0, 400).holds
        assert check_spectrum_condition(prob.spectrum, 2.0, 400).holds
        # the sandwich needs a nondegenerate head (k* >= 1)
        for t in (16, 128, 1024):
            report = gd_sgd_type_bound(prob, 64, 0.2, t)
            assert report.k_star >= 1
            assert report.D1 <= (1.0 + 2.0) * report.D + 1e-9

    def test_sandwich_at_sigma_one(self):
        # flat head + fast cliff genuinely passes at sigma = 1, giving the
        # nondegenerate D1 <= 2D form
        lam = np.concatenate([np.ones(4), 1e-6 * 4.0 ** -np.arange(8.0)])
        prob = make_custom_problem(lam, np.zeros(lam.size), 1.0)
        assert check_spectrum_condition(prob.spectrum, 1.0, 400).holds
        for t in (8, 64, 512):
            report = gd_sgd_type_bound(prob, 100, 0.1, t)
            assert report.k_star >= 1
            assert report.D1 <= 2.0 * report.D + 1e-9

    def test_spike_d1_blowup(self):
        prob = make_spike_problem(100, 10000)
        t = math.ceil(100.0**0.9)
        report = gd_sgd_type_bound(prob, 100, 1.0, t)
        assert report.D1 > 10.0 * report.D
        assert report.D1 == pytest.approx(1.0 + t * 9999 / 10000, rel=1e-10)

    def test_zero_signal(self):
        prob = make_custom_problem([1.0, 0.5], [0.0, 0.0], 1.0)
        report = gd_sgd_type_bound(prob, 50, 0.2, 10)
        assert report.eff_bias == 0.0
        assert report.eff_var == 0.0

    def test_gaussian_refinement_differs(self):
        prob = make_power_law_problem(2.0, 1.0, 500)
        plain = gd_sgd_type_bound(prob, 100, 0.1, 50, gaussian=False)
        refined = gd_sgd_type_bound(prob, 100, 0.1, 50, gaussian=True)
        assert refined.eff_var != plain.eff_var


class TestShrinkage:
    def test_t_one_is_scaled_identity(self):
        rng = np.random.default_rng(0)
        G = rng.standard_normal((8, 20))
        A = G @ G.T
        n, eta = 8, 0.5 * 8 / np.linalg.eigvalsh(A)[-1]
        out = shrinkage_matrix(A, eta, 1)
        assert np.allclose(out, (n / eta) * np.eye(8), atol=1e-8)

    def test_large_t_tends_to_gram(self):
        rng = np.random.default_rng(1)
        G = rng.standard_normal((6, 30))
        A = G @ G.T
        eta = 0.9 * 6 / np.linalg.eigvalsh(A)[-1]
        out = shrinkage_matrix(A, eta, 10**6)
        assert np.allclose(out, A, rtol=1e-4, atol=1e-8)

    def test_sandwich_sample(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            m = rng.integers(3, 20)
            G = rng.standard_normal((m, 2 * m))
            A = G @ G.T
            n = m
            eta = 0.7 * n / np.linalg.eigvalsh(A)[-1]
            for t in (1, 7, 50):
                out = shrinkage_matrix(A, eta, t)
                norm = np.linalg.norm(A, 2)
                lo_a = np.linalg.eigvalsh(out - A).min()
                lo_i = np.linalg.eigvalsh(out - (n / (eta * t)) * np.eye(n)).min()
                hi = np.linalg.eigvalsh(A + (2 * n / (eta * t)) * np.eye(n)
                                        - out).min()
                slack = -1e-8 * norm
                assert lo_a >= slack and lo_i >= slack and hi >= slack

    def test_rejects_t_zero(self):
        with pytest.raises(ValueError):
            shrinkage_matrix(np.eye(3), 0.1, 0)


class TestPowerLawExponent:
    def test_gd_optimal(self):
        assert power_law_exponent("gd", 2.0, 1.0) == pytest.approx(-0.8)
        assert power_law_exponent("minimax", 2.0, 1.0) == pytest.approx(-0.8)

    def test_ridge_saturation(self):
        assert power_law_exponent("ridge", 2.0, 2.0) == pytest.approx(-0.8)
        assert power_law_exponent("gd", 2.0, 2.0) == pytest.approx(-8.0 / 9.0)

    def test_sgd_low_source(self):
        assert power_law_exponent("sgd", 4.0, 0.1) == pytest.approx(-0.2)

    def test_gd_dominates_pointwise(self):
        for a in (1.5, 2.0, 4.0):
            for r in (0.05, 0.25, 0.5, 1.0, 2.0, 4.0):
                gd = power_law_exponent("gd", a, r)
                assert gd <= power_law_exponent("ridge", a, r) + 1e-12
                assert gd <= power_law_exponent("sgd", a, r) + 1e-12

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            power_law_exponent("gd", 1.0, 1.0)
        with pytest.raises(ValueError):
            power_law_exponent("gd", 2.0, -0.5)
        with pytest.raises(ValueError):
            power_law_exponent("newton", 2.0, 1.0)


class TestBracketing:
    def test_definitional_bracketing(self):
        prob = make_power_law_problem(2.0, 0.5, 1500)
        lam = prob.spectrum.eigenvalues
        n = 120
        for reg in (0.0, 1e-3, 0.05):
            report = ridge_bound(prob, n, reg)
            k = report.k_star
            assert reg + lam[k:].sum() / n >= 2.0 * lam[k] - 1e-15
            if k > 0:
                assert reg + lam[k - 1:].sum() / n < 2.0 * lam[k - 1]
