import itertools
import math

import numpy as np
import pytest
from scipy.special import zeta as scipy_zeta

from gensets.errors import DomainError, ExhaustionError, ResourceCapError, TruncationError
from gensets.korobov_core import (
    IndexSet,
    KorobovParams,
    SigmaSequence,
    cross_cardinality_bound,
    enumerate_cross,
    ensure_contains_first_m,
    hinf_bound_holds,
    kernel_eval,
    korobov_superset,
    korobov_remainders,
    mu,
    power_sum,
    r_alpha_gamma,
    riemann_zeta,
    sigma_decay_profile,
    tail_sums,
    take_first_m,
    unweighted_cross_cardinality,
)


def brute_cross(params, M, box):
    found = []
    for h in itertools.product(range(-box, box + 1), repeat=params.d):
        if r_alpha_gamma(h, params) <= M:
            found.append(h)
    return set(found)


# ---------------------------------------------------------------------------
# Parameters and r_{alpha,gamma}
# ---------------------------------------------------------------------------

def test_r_of_zero_is_inverse_empty_weight():
    params = KorobovParams.from_subsets(2, 1.5, {(): 0.5, (1,): 0.5, (2,): 0.5, (1, 2): 0.25})
    assert r_alpha_gamma((0, 0), params) == pytest.approx(2.0)


def test_r_unit_weights():
    assert r_alpha_gamma((2, 3), KorobovParams.unweighted(2, 1.0)) == pytest.approx(6.0)


def test_r_weighted_coordinate():
    params = KorobovParams.from_subsets(2, 2.0, {(): 1.0, (1,): 0.5, (2,): 1.0, (1, 2): 0.5})
    assert r_alpha_gamma((-2, 0), params) == pytest.approx(8.0)


def test_product_weights_are_exact_products():
    params = KorobovParams.product(3, 2.0, [0.5, 0.25, 0.8])
    assert params.gamma(()) == 1.0
    assert params.gamma((1, 3)) == 0.5 * 0.8
    assert params.gamma((1, 2, 3)) == 0.5 * 0.25 * 0.8


@pytest.mark.parametrize("alpha", [0.5, 0.3, -1.0])
def test_alpha_must_exceed_half(alpha):
    with pytest.raises(DomainError):
        KorobovParams.unweighted(1, alpha)


def test_weights_outside_unit_interval_rejected():
    with pytest.raises(DomainError):
        KorobovParams.product(2, 2.0, [1.5, 0.5])


def test_missing_subset_weight_rejected():
    with pytest.raises(DomainError):
        KorobovParams.from_subsets(2, 2.0, {(): 1.0, (1,): 0.5})


# ---------------------------------------------------------------------------
# Hyperbolic crosses
# ---------------------------------------------------------------------------

def test_cross_unit_radius_is_the_cube():
    cross = enumerate_cross(KorobovParams.unweighted(2, 1.0), 1.5)
    assert set(cross.keys()) == set(itertools.product((-1, 0, 1), repeat=2))
    assert cross.tail_radius == 1.5


def test_cross_below_one_is_empty():
    cross = enumerate_cross(KorobovParams.unweighted(1, 1.0), 0.5)
    assert cross.m == 0


def test_weighted_cross_matches_box_scan():
    params = KorobovParams.product(2, 2.0, [0.8, 0.8])
    cross = enumerate_cross(params, 6.0)
    assert set(cross.keys()) == brute_cross(params, 6.0, 3)
    assert len(set(cross.keys())) == cross.m


def test_cross_is_sorted_by_sigma_then_hinf_then_lex():
    cross = enumerate_cross(KorobovParams.product(2, 1.5, [1.0, 0.7]), 12.0)
    assert np.all(np.diff(cross.sigmas) <= 0)
    keys = cross.keys()
    for a, b, sa, sb in zip(keys, keys[1:], cross.sigmas, cross.sigmas[1:]):
        if sa == sb:
            assert (max(map(abs, a)), a) < (max(map(abs, b)), b)


def test_cross_respects_cap():
    with pytest.raises(ResourceCapError):
        enumerate_cross(KorobovParams.unweighted(3, 1.0), 1000.0, cap=100)


@pytest.mark.parametrize("d,M,expected", [(1, 3.7, 7), (3, 1.9, 27), (2, 0.5, 0), (1, 1.0, 3)])
def test_unweighted_cardinality(d, M, expected):
    assert unweighted_cross_cardinality(d, M) == expected


@pytest.mark.parametrize("d,M", [(2, 4.0), (2, 17.5), (3, 9.0)])
def test_unweighted_cardinality_matches_enumeration(d, M):
    assert unweighted_cross_cardinality(d, M) == enumerate_cross(KorobovParams.unweighted(d, 1.0), M).m


def test_cardinality_bound_dominates():
    params = KorobovParams.product(2, 2.0, [1.0, 0.5])
    for M in (2.0, 10.0, 50.0):
        assert enumerate_cross(params, M).m <= cross_cardinality_bound(params, M, 1.25)


# ---------------------------------------------------------------------------
# Ordering
# ---------------------------------------------------------------------------

def test_first_index_is_zero(sobolev_1d):
    assert take_first_m(sobolev_1d, 1).keys() == [(0,)]


def test_tie_break_in_first_three(sobolev_1d):
    assert take_first_m(sobolev_1d, 3).keys() == [(0,), (-1,), (1,)]


def test_first_nine_equal_unit_cube():
    seq = SigmaSequence.korobov(KorobovParams.unweighted(2, 1.0))
    first = take_first_m(seq, 9)
    assert set(first.keys()) == set(enumerate_cross(seq.params, 1.5).keys())


def test_take_first_m_tail_radius(sobolev_1d):
    first = take_first_m(sobolev_1d, 4)
    # h_5 = 2, r = 4
    assert first.tail_radius == pytest.approx(4.0)


def test_explicit_sequence_order_and_exhaustion():
    seq = SigmaSequence.explicit(1, {(2,): 0.1, (0,): 1.0, (1,): 0.5, (-1,): 0.5})
    assert take_first_m(seq, 3).keys() == [(0,), (-1,), (1,)]
    with pytest.raises(ExhaustionError):
        take_first_m(seq, 5)


def test_korobov_ordering_satisfies_hinf_bound():
    seq = SigmaSequence.korobov(KorobovParams.product(2, 1.5, [1.0, 0.6]))
    assert hinf_bound_holds(take_first_m(seq, 60), 1.0, 1.0)


def test_sigma_decay_profile_is_bounded():
    prof = sigma_decay_profile(KorobovParams.unweighted(1, 2.0), [5, 11, 51])
    assert prof[0] == pytest.approx(25.0 / 4.0)
    assert prof[1] == pytest.approx(121.0 / 25.0)
    assert np.all((prof > 0.5) & (prof < 10.0))


# ---------------------------------------------------------------------------
# Zeta, mu, kernel
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("s", [1.1, 1.5, 2.0, 3.0, 8.0])
def test_zeta_matches_scipy(s):
    assert riemann_zeta(s) == pytest.approx(float(scipy_zeta(s)), abs=1e-10)


def test_zeta_domain():
    with pytest.raises(DomainError):
        riemann_zeta(1.0)


def test_mu_one_dimensional():
    assert mu(1.0, KorobovParams.unweighted(1, 2.0)) == pytest.approx(1.0 + math.pi ** 2 / 3.0, rel=1e-10)


def test_mu_product_weights():
    two_zeta = 2.0 * float(scipy_zeta(2.0))
    expected = 1.0 + 2.0 * 0.5 * two_zeta + 0.25 * two_zeta ** 2
    assert mu(1.0, KorobovParams.product(2, 2.0, [0.5, 0.5])) == pytest.approx(expected, rel=1e-10)


def test_mu_vanishing_weights_tends_to_one():
    params = KorobovParams.from_subsets(2, 2.0, {(): 1.0, (1,): 1e-12, (2,): 1e-12, (1, 2): 1e-12})
    assert mu(1.0, params) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("lam", [0.5, 2.0, 3.0])
def test_mu_lambda_range(lam):
    with pytest.raises(DomainError):
        mu(lam, KorobovParams.unweighted(1, 2.0))


def test_kernel_diagonal_and_half_shift():
    J = IndexSet(np.array([[0], [-1], [1]]), np.ones(3))
    assert kernel_eval([0.3], [0.3], J) == pytest.approx(3.0)
    assert kernel_eval([0.5], [0.0], J).real == pytest.approx(-1.0)


def test_kernel_hermitian():
    J = enumerate_cross(KorobovParams.unweighted(2, 1.5), 8.0)
    rng = np.random.default_rng(1)
    x, y = rng.random(2), rng.random(2)
    assert kernel_eval(x, y, J) == pytest.approx(np.conj(kernel_eval(y, x, J)), abs=1e-12)


# ---------------------------------------------------------------------------
# Tail sums
# ---------------------------------------------------------------------------

def test_tail_sum_direct(sobolev_1d):
    J = enumerate_cross(sobolev_1d.params, 100.0)
    ts = tail_sums(sobolev_1d, 1, 0.5, 1.0, J)
    direct = sum(2.0 / h ** 4 for h in range(1, 11))
    assert ts.S2 == pytest.approx(direct, rel=1e-12)
    assert ts.sigma_m1 == 1.0
    assert ts.remainder2 > 0


def test_tail_remainders_shrink_with_J(sobolev_1d):
    small = tail_sums(sobolev_1d, 1, 0.5, 1.0, enumerate_cross(sobolev_1d.params, 50.0))
    large = tail_sums(sobolev_1d, 1, 0.5, 1.0, enumerate_cross(sobolev_1d.params, 100.0))
    assert small.remainder2 >= large.remainder2
    assert small.remainder4 >= large.remainder4


def test_tail_remainder_bounds_true_tail(sobolev_1d):
    J = enumerate_cross(sobolev_1d.params, 100.0)
    ts = tail_sums(sobolev_1d, 1, 0.5, 1.0, J)
    true_tail = 2.0 * (float(scipy_zeta(4.0)) - sum(1.0 / h ** 4 for h in range(1, 11)))
    assert ts.remainder2 >= true_tail


def test_explicit_table_has_empty_tail():
    seq = SigmaSequence.explicit(1, {(0,): 1.0, (1,): 0.5})
    J = korobov_superset(seq, 0.0)
    ts = tail_sums(seq, 2, 0.5, 1.0, J)
    assert ts.S2 == 0.0 and ts.total2 == 0.0 and ts.total4w == 0.0


def test_truncation_detected(sobolev_1d):
    J = IndexSet(np.array([[0], [1]]), np.array([1.0, 1.0]))
    with pytest.raises(TruncationError):
        ensure_contains_first_m(sobolev_1d, 2, J)
    with pytest.raises(TruncationError):
        ensure_contains_first_m(sobolev_1d, 3, J)


def test_tail_sums_raise_domain_error_on_truncated_J(sobolev_1d):
    J = IndexSet(np.array([[0], [1]]), np.array([1.0, 1.0]))
    with pytest.raises(DomainError):
        tail_sums(sobolev_1d, 2, 0.5, 1.0, J)


def test_power_sum_closed_form_and_domain():
    params = KorobovParams.product(2, 2.0, [0.5, 0.5])
    total, err = power_sum(params, 2.0)
    assert total == pytest.approx((1 + 0.25 * 2 * float(scipy_zeta(4.0))) ** 2, rel=1e-12)
    assert 0 < err < 1e-10
    with pytest.raises(DomainError):
        power_sum(KorobovParams.unweighted(1, 1.0), 1.0)


def product_tail(gammas, alpha, M, p, q=0.0, B=1000):
    """sum of sigma^p prod|h_j|^q over h outside A(M), d = 2 product weights, box [-B, B]^2."""
    g1, g2 = gammas
    h = np.arange(1, B + 1, dtype=float)
    total = 0.0
    for g in (g1, g2):
        r = h ** alpha / g
        total += 2 * np.sum((r ** -p * h ** q)[r > M])
    ab = np.multiply.outer(h, h)
    r = ab ** alpha / (g1 * g2)
    total += 4 * np.sum((r ** -p * ab ** q)[r > M])
    return float(total)


@pytest.mark.parametrize("M", [5.0, 20.0, 50.0, 200.0])
def test_remainders_match_brute_force_tails(M):
    params = KorobovParams.product(2, 2.0, [0.5, 0.5])
    J = enumerate_cross(params, M)
    rem2, _, rem4h = korobov_remainders(params, J, 0.5, 1.0)
    brute2 = product_tail((0.5, 0.5), 2.0, M, 2.0)
    assert brute2 <= rem2 <= brute2 * (1 + 1e-5) + 1e-9
    # the S4h remainder runs on prod |h_j| >= ||h||_inf
    brute4 = product_tail((0.5, 0.5), 2.0, M, 4.0, 0.5)
    assert brute4 <= rem4h <= brute4 * (1 + 1e-5) + 1e-9


def test_remainders_are_monotone_in_J(korobov_2d):
    previous = None
    for M in (2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 400.0):
        J = enumerate_cross(korobov_2d.params, M)
        current = korobov_remainders(korobov_2d.params, J, 0.5, 1.0)
        if previous is not None:
            assert all(c <= p * (1 + 1e-12) for c, p in zip(current, previous))
        previous = current


def test_tail_sum_totals_do_not_depend_much_on_J(sobolev_1d):
    totals = [tail_sums(sobolev_1d, 3, 0.5, 1.0, enumerate_cross(sobolev_1d.params, M)).total2 for M in (10.0, 100.0, 1000.0)]
    exact = 2.0 * float(scipy_zeta(4.0)) - 2.0
    for t in totals:
        assert t >= exact and t == pytest.approx(exact, rel=1e-9)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def random_weighted_instance(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4))
    alpha = float(rng.uniform({1: 1.0, 2: 1.0, 3: 1.3}[d], 2.5))
    if seed % 2:
        params = KorobovParams.product(d, alpha, rng.uniform(0.2, 1.0, size=d).tolist())
    else:
        subsets = [u for k in range(d + 1) for u in itertools.combinations(range(1, d + 1), k)]
        weights = {u: (1.0 if not u else float(rng.uniform(0.2, 1.0))) for u in subsets}
        params = KorobovParams.from_subsets(d, alpha, weights)
    return params, float(rng.uniform(1.0, 30.0))


@pytest.mark.parametrize("seed", range(20))
def test_random_weighted_cross_matches_box_scan(seed):
    params, M = random_weighted_instance(seed)
    box = int(math.floor((M * params.gamma_max) ** (1.0 / params.alpha)))
    cross = enumerate_cross(params, M)
    assert set(cross.keys()) == brute_cross(params, M, box)
    assert cross.m == len(set(cross.keys()))


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("frac", [0.6, 0.9])
def test_cardinality_bound_on_random_instances(seed, frac):
    params, M = random_weighted_instance(seed)
    assert enumerate_cross(params, M).m <= cross_cardinality_bound(params, M, frac * params.alpha)


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("alpha", [1.0, 2.0])
def test_sigma_decay_is_bounded_over_the_range(d, alpha):
    i_values = np.unique(np.logspace(1, 4, 40).astype(int))
    prof = sigma_decay_profile(KorobovParams.unweighted(d, alpha), i_values)
    assert np.all(prof > 0)
    assert prof.max() / prof.min() < 50


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("M", [0.5, 1.0, 1.9, 2.0, 3.5, 7.0, 12.0, 20.0, 33.3, 50.0])
def test_recurrence_matches_enumeration(d, M):
    assert unweighted_cross_cardinality(d, M) == enumerate_cross(KorobovParams.unweighted(d, 1.0), M).m
