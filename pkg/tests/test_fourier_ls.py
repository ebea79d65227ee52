import numpy as np
import pytest

from gensets.errors import ShapeError
from gensets.fourier_ls import (
    FourierPolynomial,
    approximate,
    assemble,
    evaluate,
    evaluate_many,
    extreme_singular_values,
    l2_error,
    lattice_character_sums,
    sample,
    solve,
)
from gensets.korobov_core import IndexSet, KorobovParams, SigmaSequence, enumerate_cross, take_first_m
from gensets.pointsets import ContinuousGenerator, RationalGenerator, build_nodes


@pytest.fixture
def lattice5():
    return build_nodes(RationalGenerator([1], 5), 5)


@pytest.fixture
def five_freqs():
    return enumerate_cross(KorobovParams.unweighted(1, 1.0), 2.0)


def random_coeffs(rng, m):
    return rng.standard_normal(m) + 1j * rng.standard_normal(m)


def test_zero_frequency_column_is_ones():
    nodes = build_nodes(ContinuousGenerator([0.3, 0.9]), 6)
    phi = assemble(nodes, IndexSet(np.zeros((1, 2)), np.ones(1))).values
    assert np.allclose(phi, 1.0)


def test_single_origin_node_row_of_ones():
    nodes = build_nodes(RationalGenerator([5], 5), 1)
    J = enumerate_cross(KorobovParams.unweighted(1, 1.0), 3.0)
    assert np.allclose(assemble(nodes, J).values, 1.0)


def test_lattice_orthogonality(lattice5, five_freqs):
    gram = lattice_character_sums(lattice5, five_freqs)
    assert np.allclose(gram, 5.0 * np.eye(5), atol=1e-10)
    smin, smax = extreme_singular_values(assemble(lattice5, five_freqs))
    assert smin == pytest.approx(np.sqrt(5.0)) and smax == pytest.approx(np.sqrt(5.0))


def test_ones_column_singular_values():
    nodes = build_nodes(ContinuousGenerator([0.37]), 9)
    smin, smax = extreme_singular_values(assemble(nodes, IndexSet(np.zeros((1, 1)), np.ones(1))))
    assert smin == pytest.approx(3.0) and smax == pytest.approx(3.0)


def test_duplicated_nodes_match_dense_svd(sobolev_1d):
    nodes = build_nodes(ContinuousGenerator([0.5]), 4)
    matrix = assemble(nodes, take_first_m(sobolev_1d, 2))
    s = np.linalg.svd(matrix.values, compute_uv=False)
    smin, smax = extreme_singular_values(matrix)
    assert smin == pytest.approx(s[-1], abs=1e-12) and smax == pytest.approx(s[0])


def test_consistent_system_recovered():
    rng = np.random.default_rng(4)
    seq = SigmaSequence.korobov(KorobovParams.unweighted(2, 1.5))
    J = take_first_m(seq, 12)
    nodes = build_nodes(ContinuousGenerator(rng.random(2)), 60)
    matrix = assemble(nodes, J)
    c = random_coeffs(rng, J.m)
    result = solve(matrix, matrix.values @ c)
    assert not result.rank_deficient and result.rank == J.m
    assert np.allclose(result.polynomial.coeffs, c, rtol=1e-10, atol=1e-10)
    assert result.residual_norm < 1e-9


def test_orthogonal_samples_give_zero_coefficients():
    rng = np.random.default_rng(5)
    J = take_first_m(SigmaSequence.korobov(KorobovParams.unweighted(1, 2.0)), 5)
    nodes = build_nodes(ContinuousGenerator([0.6180339887]), 20)
    matrix = assemble(nodes, J)
    q, _ = np.linalg.qr(matrix.values)
    v = random_coeffs(rng, 20)
    b = v - q @ (q.conj().T @ v)
    result = solve(matrix, b)
    assert np.allclose(result.polynomial.coeffs, 0.0, atol=1e-10)
    assert result.residual_norm == pytest.approx(np.linalg.norm(b), rel=1e-10)


def test_normal_equation_defect():
    rng = np.random.default_rng(6)
    J = take_first_m(SigmaSequence.korobov(KorobovParams.product(2, 2.0, [1.0, 0.5])), 10)
    nodes = build_nodes(ContinuousGenerator(rng.random(2)), 40)
    matrix = assemble(nodes, J)
    b = random_coeffs(rng, 40)
    c = solve(matrix, b).polynomial.coeffs
    phi = matrix.values
    rhs = phi.conj().T @ b
    assert np.linalg.norm(phi.conj().T @ (phi @ c) - rhs) / np.linalg.norm(rhs) <= 1e-9
    assert np.allclose(c, np.linalg.lstsq(phi, b, rcond=None)[0], atol=1e-9)


def test_in_span_function_exact(lattice5, five_freqs):
    rng = np.random.default_rng(7)
    f = FourierPolynomial(five_freqs, random_coeffs(rng, 5))
    result = approximate(f, lattice5, five_freqs)
    assert l2_error(f, result.polynomial) < 1e-10
    assert result.residual_norm <= 1e-9


def test_aliased_frequency_lands_on_its_representative(lattice5, five_freqs):
    f = FourierPolynomial(IndexSet(np.array([[3]]), np.ones(1)), [1.0])
    coeffs = approximate(f, lattice5, five_freqs).polynomial.coeffs
    pos = five_freqs.position((-2,))
    assert abs(coeffs[pos]) == pytest.approx(1.0)
    assert np.allclose(np.delete(coeffs, pos), 0.0, atol=1e-12)


def test_zero_function(lattice5, five_freqs):
    f = FourierPolynomial(five_freqs, np.zeros(5))
    assert np.allclose(approximate(f, lattice5, five_freqs).polynomial.coeffs, 0.0)


def test_degenerate_generator_is_rank_deficient(sobolev_1d):
    nodes = build_nodes(ContinuousGenerator([0.0]), 10)
    J = take_first_m(sobolev_1d, 3)
    result = solve(assemble(nodes, J), np.ones(10))
    assert result.rank_deficient and result.rank == 1


def test_shape_errors(lattice5, five_freqs):
    matrix = assemble(lattice5, five_freqs)
    with pytest.raises(ShapeError):
        solve(matrix, np.ones(4))
    small = build_nodes(RationalGenerator([1], 5), 3)
    with pytest.raises(ShapeError):
        solve(assemble(small, five_freqs), np.ones(3))
    with pytest.raises(ShapeError):
        FourierPolynomial(five_freqs, np.ones(3))


def test_evaluation():
    J = enumerate_cross(KorobovParams.unweighted(2, 1.0), 2.0)
    rng = np.random.default_rng(8)
    poly = FourierPolynomial(J, random_coeffs(rng, J.m))
    assert evaluate(poly, [0.0, 0.0]) == pytest.approx(np.sum(poly.coeffs))
    const = FourierPolynomial(IndexSet(np.zeros((1, 2)), np.ones(1)), [2.5 - 1j])
    assert evaluate(const, rng.random(2)) == pytest.approx(2.5 - 1j)
    nodes = build_nodes(ContinuousGenerator(rng.random(2)), 7)
    assert np.allclose(evaluate_many(poly, nodes.points), sample(poly, nodes), atol=1e-12)


def test_conjugate_symmetric_coefficients_give_real_values(five_freqs):
    c = np.zeros(5, dtype=complex)
    for i, (h,) in enumerate(five_freqs.keys()):
        c[i] = 0.3 + 0.1j * h
    poly = FourierPolynomial(five_freqs, c)
    assert abs(evaluate(poly, [0.173]).imag) < 1e-12


def test_norms(five_freqs):
    poly = FourierPolynomial(five_freqs, five_freqs.sigmas)
    assert poly.hsigma_norm() == pytest.approx(np.sqrt(5.0))
    assert poly.l2_norm() == pytest.approx(np.linalg.norm(five_freqs.sigmas))
    frame = poly.to_frame()
    assert list(frame.columns) == ["h_1", "re", "im"]


@pytest.mark.parametrize("seed", range(100))
def test_perturbing_the_solution_never_lowers_the_residual(seed):
    rng = np.random.default_rng(1000 + seed)
    d = int(rng.integers(1, 3))
    m = int(rng.integers(1, 21))
    n = int(rng.integers(2 * m, 3 * m + 5))
    J = take_first_m(SigmaSequence.korobov(KorobovParams.unweighted(d, 1.5)), m)
    matrix = assemble(build_nodes(ContinuousGenerator(rng.random(d)), n), J)
    b = random_coeffs(rng, n)
    result = solve(matrix, b)
    assert not result.rank_deficient
    c = result.polynomial.coeffs
    for _ in range(20):
        delta = random_coeffs(rng, m)
        delta *= 1e-3 / np.linalg.norm(delta)
        assert np.linalg.norm(matrix.values @ (c + delta) - b) >= result.residual_norm


def test_random_generators_give_full_rank():
    rng = np.random.default_rng(11)
    J = take_first_m(SigmaSequence.korobov(KorobovParams.product(2, 2.0, [1.0, 0.5])), 20)
    for _ in range(100):
        matrix = assemble(build_nodes(ContinuousGenerator(rng.random(2)), 40), J)
        assert not solve(matrix, np.ones(40)).rank_deficient
