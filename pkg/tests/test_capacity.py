import math

import numpy as np
import pytest

from stegcap import DegenerateMessage, DomainError
from stegcap.capacity import (
    CapacityQuery,
    detection_bounds,
    embedding_factor_bounds_from_pe,
    max_embedding_rate,
    optimal_codebook_params,
    srl_bound,
)
from stegcap.gaussmodel import (
    Ar1Toeplitz,
    Dense,
    GaussianModel,
    ScaledIdentity,
    kl_gaussian,
    kl_gaussian_reverse,
)

from oracles import bisect_reverse_scale, newton_embedding_factor
from test_gaussmodel import random_spd_model


# ------------------------------------------------------------------ queries

def test_query_requires_exactly_one_mode():
    with pytest.raises(DomainError):
        CapacityQuery(n=10)
    with pytest.raises(DomainError):
        CapacityQuery(n=10, epsilon=0.1, p_e_avg=0.1)


def test_query_range_validation():
    with pytest.raises(DomainError):
        CapacityQuery(n=0, epsilon=0.1)
    with pytest.raises(DomainError):
        CapacityQuery(n=10, epsilon=1.5)
    with pytest.raises(DomainError):
        CapacityQuery(n=10, epsilon=-0.1)
    with pytest.raises(DomainError):
        CapacityQuery(n=10, p_e_avg=0.6)
    with pytest.raises(DomainError):
        CapacityQuery(n=10, epsilon=0.1, units="trits")


# -------------------------------------------------------------- rate values

def test_rate_epsilon_point_one_n_100():
    res = max_embedding_rate(CapacityQuery(n=100, epsilon=0.1))
    assert math.isclose(res.embedding_factor, 1.0285515640873392, rel_tol=1e-12)
    assert math.isclose(res.rate_total, 1.4075782043669623, rel_tol=1e-12)
    assert math.isclose(res.gamma, 4e-4, rel_tol=1e-15)
    assert math.isclose(res.srl_bound, 2.0, rel_tol=1e-15)
    assert res.rate_total <= res.srl_bound
    assert math.isclose(res.rate_per_element, res.rate_total / 100,
                        rel_tol=1e-15)
    assert res.mode == "epsilon"


def test_rate_pe_mode_paper_operating_point():
    # P_E = 0.1 at n = 2^18: eps_eff = 0.8
    res = max_embedding_rate(CapacityQuery(n=2 ** 18, p_e_avg=0.1))
    assert res.mode == "pe-lower-bound"
    assert math.isclose(res.epsilon_effective, 0.8, rel_tol=1e-15)
    assert math.isclose(res.embedding_factor, 1.0044259301953575, rel_tol=1e-12)
    assert math.isclose(res.rate_total, 578.83552256589962, rel_tol=1e-12)
    bits_per_element = res.rate_per_element / math.log(2.0)
    assert math.isclose(bits_per_element, 0.0031855893627, rel_tol=1e-9)


def test_rate_zero_budget_endpoints():
    res = max_embedding_rate(CapacityQuery(n=1000, epsilon=0.0))
    assert res.embedding_factor == 1.0
    assert res.rate_total == 0.0
    # blind-detector P_E = 0.5 is the same endpoint in the other mode
    res2 = max_embedding_rate(CapacityQuery(n=1000, p_e_avg=0.5))
    assert res2.rate_total == 0.0
    # and the limit is continuous: tiny epsilon gives a vanishing rate
    tiny = max_embedding_rate(CapacityQuery(n=100, epsilon=1e-16))
    assert abs(tiny.rate_total) <= 1e-12


def test_rate_total_consistent_with_factor():
    for eps, n in [(0.05, 10), (0.3, 1000), (1.0, 3)]:
        res = max_embedding_rate(CapacityQuery(n=n, epsilon=eps))
        assert math.isclose(res.rate_total, 0.5 * n * math.log(res.embedding_factor),
                            rel_tol=1e-12)
        oracle_a = newton_embedding_factor(4.0 * eps * eps / n)
        assert math.isclose(res.embedding_factor, oracle_a, rel_tol=1e-10)


def test_rate_monotone_in_epsilon_and_n():
    rates_eps = [max_embedding_rate(CapacityQuery(n=50, epsilon=e)).rate_total
                 for e in [0.05, 0.1, 0.2, 0.4, 0.8]]
    assert all(b > a for a, b in zip(rates_eps, rates_eps[1:]))
    rates_n = [max_embedding_rate(CapacityQuery(n=n, epsilon=0.2)).rate_total
               for n in [1, 10, 100, 1000, 10 ** 4]]
    assert all(b > a for a, b in zip(rates_n, rates_n[1:]))


def test_per_element_rate_vanishes():
    per = [max_embedding_rate(CapacityQuery(n=n, epsilon=0.5)).rate_per_element
           for n in [10, 10 ** 3, 10 ** 5, 10 ** 7]]
    assert all(b < a for a, b in zip(per, per[1:]))
    assert per[-1] < 1e-3


def test_srl_dominance_on_grid():
    for eps in [0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 1.0]:
        for n in [1, 2, 5, 10, 100, 10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6]:
            res = max_embedding_rate(CapacityQuery(n=n, epsilon=eps))
            assert res.rate_total <= 2.0 * eps * math.sqrt(n)


def test_sqrt_scaling_of_total_rate():
    # quadrupling n doubles the rate asymptotically; the ratio approaches 2
    # from above (the subtracted constant -2*eps^2/3 shrinks relatively).
    for eps in [0.01, 0.1, 0.5]:
        for n in [10 ** 4, 10 ** 5, 10 ** 6]:
            r1 = max_embedding_rate(CapacityQuery(n=n, epsilon=eps)).rate_total
            r4 = max_embedding_rate(CapacityQuery(n=4 * n, epsilon=eps)).rate_total
            ratio = r4 / r1
            assert 2.0 < ratio <= 2.005


# ------------------------------------------------------------ codebook params

def test_codebook_params_iid_cover():
    cover = GaussianModel.iid(100, sigma2=1.0)
    msg = optimal_codebook_params(cover, CapacityQuery(n=100, epsilon=0.1))
    assert isinstance(msg.covariance, ScaledIdentity)
    assert math.isclose(msg.covariance.sigma2, 0.0285515640873392, rel_tol=1e-10)
    np.testing.assert_array_equal(msg.mean, np.zeros(100))


def test_codebook_params_preserve_ar1_structure():
    cover = GaussianModel.ar1(64, 1.0, 0.9)
    msg = optimal_codebook_params(cover, CapacityQuery(n=64, epsilon=0.25))
    assert isinstance(msg.covariance, Ar1Toeplitz)
    assert msg.covariance.rho == 0.9
    a = max_embedding_rate(CapacityQuery(n=64, epsilon=0.25)).embedding_factor
    assert math.isclose(msg.covariance.sigma2, a - 1.0, rel_tol=1e-12)


def test_codebook_params_degenerate_at_zero_epsilon():
    cover = GaussianModel.iid(10)
    with pytest.raises(DegenerateMessage):
        optimal_codebook_params(cover, CapacityQuery(n=10, epsilon=0.0))
    with pytest.raises(DegenerateMessage):
        optimal_codebook_params(cover, CapacityQuery(n=10, p_e_avg=0.5))


def test_codebook_params_dim_mismatch():
    with pytest.raises(DomainError):
        optimal_codebook_params(GaussianModel.iid(5),
                                CapacityQuery(n=6, epsilon=0.1))


def test_constraint_saturated_randomized_covers():
    # stego = cover + optimal message meets the KL budget with equality
    rng = np.random.default_rng(902)
    eps = 0.3
    budget = 2.0 * eps * eps
    for _ in range(20):
        n = int(rng.integers(1, 17))
        cover = random_spd_model(rng, n)
        msg = optimal_codebook_params(cover, CapacityQuery(n=n, epsilon=eps))
        stego = GaussianModel(
            n, cover.mean + msg.mean,
            Dense(cover.covariance.materialize(n) + msg.covariance.materialize(n)))
        kl = kl_gaussian(stego, cover)
        assert abs(kl - budget) <= 1e-9 * (1.0 + budget)


def test_reverse_kl_recovers_same_factor():
    # solving the reverse-divergence equation for a must agree with a*
    rng = np.random.default_rng(903)
    eps = 0.3
    for _ in range(20):
        n = int(rng.integers(1, 17))
        cover = random_spd_model(rng, n)
        q = CapacityQuery(n=n, epsilon=eps)
        a_star = max_embedding_rate(q).embedding_factor
        msg = optimal_codebook_params(cover, q)
        stego = GaussianModel(
            n, cover.mean,
            Dense(cover.covariance.materialize(n) + msg.covariance.materialize(n)))
        d_rev = kl_gaussian_reverse(cover, stego)
        a_hat = bisect_reverse_scale(2.0 * d_rev / n)
        assert abs(a_hat - a_star) <= 1e-6 * a_star


# ----------------------------------------------------------------- SRL bound

def test_srl_bound_values():
    assert math.isclose(srl_bound(0.5, 4), 2.0, rel_tol=1e-15)
    assert math.isclose(srl_bound(0.2, 400), 2.0 * srl_bound(0.2, 100),
                        rel_tol=1e-15)


def test_srl_bound_domain():
    with pytest.raises(DomainError):
        srl_bound(0.0, 10)
    with pytest.raises(DomainError):
        srl_bound(1.5, 10)
    with pytest.raises(DomainError):
        srl_bound(0.5, 0)


# ----------------------------------------------------------- detection bounds

def test_detection_bounds_values():
    b = detection_bounds(0.0)
    assert (b.p_d_max, b.p_e_min, b.p_e_avg_min, b.clamped) == (0.0, 1.0, 0.5, False)
    b = detection_bounds(0.02)
    assert math.isclose(b.p_d_max, 0.1, rel_tol=1e-12)
    assert math.isclose(b.p_e_min, 0.9, rel_tol=1e-12)
    assert math.isclose(b.p_e_min + b.p_d_max, 1.0, rel_tol=1e-15)
    b = detection_bounds(8.0)
    assert b.p_d_max == 1.0 and b.clamped


def test_detection_bounds_domain():
    with pytest.raises(DomainError):
        detection_bounds(-0.1)


# --------------------------------------------------------------- P_E bounds

def test_pe_bound_blind_detector():
    assert embedding_factor_bounds_from_pe(0.5, 100).a_lower == 1.0


def test_pe_bound_paper_point():
    bound = embedding_factor_bounds_from_pe(0.1, 2 ** 18)
    assert math.isclose(bound.a_lower, 1.0044259301953575, rel_tol=1e-12)
    assert "a_lower" in bound.note


def test_pe_bound_monotone():
    n = 10 ** 4
    a01 = embedding_factor_bounds_from_pe(0.1, n).a_lower
    a02 = embedding_factor_bounds_from_pe(0.2, n).a_lower
    assert a02 < a01


def test_pe_bound_domain():
    with pytest.raises(DomainError):
        embedding_factor_bounds_from_pe(0.6, 10)
    with pytest.raises(DomainError):
        embedding_factor_bounds_from_pe(-0.1, 10)
    with pytest.raises(DomainError):
        embedding_factor_bounds_from_pe(0.1, 0)
