import math
from fractions import Fraction

import numpy as np
import pytest

from gensets.errors import DomainError
from gensets.pointsets import (
    ContinuousGenerator,
    RationalGenerator,
    build_generated_set,
    build_nodes,
    build_rational_generated_set,
    continuous_from_rational,
    group_closed,
    is_rank1_lattice,
)


def test_half_generator():
    nodes = build_generated_set(ContinuousGenerator([0.5]), 3)
    assert nodes.points[:, 0].tolist() == [0.5, 0.0, 0.5]


def test_single_node_is_generator():
    nodes = build_generated_set(ContinuousGenerator([0.3, 0.7]), 1)
    assert nodes.points[0].tolist() == [0.3, 0.7]


def test_irrational_generator_nodes_in_unit_cube():
    nodes = build_nodes(ContinuousGenerator([math.sqrt(2) - 1, math.sqrt(3) - 1]), 20)
    assert nodes.n == 20 and nodes.d == 2
    assert np.all((nodes.points >= 0) & (nodes.points < 1))


def test_node_precision_large_k():
    zeta = 0.1234567890123
    nodes = build_generated_set(ContinuousGenerator([zeta]), 1_000_000)
    exact = Fraction(zeta)
    for k in (1, 999, 123_457, 999_999, 1_000_000):
        v = k * exact
        expected = float(v - math.floor(v))
        assert abs(nodes.points[k - 1, 0] - expected) < 1e-14


@pytest.mark.parametrize("zeta", [[1.0], [-0.1], [float("nan")], []])
def test_invalid_continuous_generator(zeta):
    with pytest.raises(DomainError):
        ContinuousGenerator(zeta)


def test_five_point_lattice():
    nodes = build_rational_generated_set(RationalGenerator([1], 5), 5)
    assert nodes.points[:, 0].tolist() == [0.2, 0.4, 0.6, 0.8, 0.0]
    assert is_rank1_lattice(nodes)
    assert group_closed(nodes)
    assert not nodes.wrapping


def test_rational_numerators_exact():
    nodes = build_rational_generated_set(RationalGenerator([3, 4], 7), 7)
    for k in range(1, 8):
        assert nodes.numerators[k - 1].tolist() == [(3 * k) % 7, (4 * k) % 7]
    assert np.all(np.rint(nodes.points * 7) == nodes.numerators)


def test_wrapping_flag():
    nodes = build_nodes(RationalGenerator([2], 5), 8)
    assert nodes.wrapping and nodes.n == 8
    assert not is_rank1_lattice(nodes)


def test_partial_lattice_is_not_closed():
    nodes = build_nodes(RationalGenerator([1, 2], 11), 4)
    assert not group_closed(nodes)


def test_large_modulus_numerators():
    N = 2 ** 61 - 1
    nodes = build_nodes(RationalGenerator([N - 1], N), 3)
    assert nodes.numerators[:, 0].tolist() == [N - 1, N - 2, N - 3]


@pytest.mark.parametrize("z,N", [([1], 8), ([0], 7), ([8], 7)])
def test_invalid_rational_generator(z, N):
    with pytest.raises(DomainError):
        RationalGenerator(z, N)


def test_continuous_from_rational():
    gen = continuous_from_rational(RationalGenerator([7, 3], 7))
    assert gen.zeta.tolist() == [0.0, 3.0 / 7.0]


def test_frames():
    cont = build_nodes(ContinuousGenerator([0.25, 0.5]), 4).to_frame()
    assert list(cont.columns) == ["k", "x_1", "x_2"]
    rat = build_nodes(RationalGenerator([1, 2], 5), 5).to_frame()
    assert list(rat.columns) == ["k", "x_1", "x_2", "num_1", "num_2", "N"]
    assert rat["N"].tolist() == [5] * 5


def torus_gap(a, b):
    gap = np.abs(np.asarray(a) - np.asarray(b)) % 1.0
    return np.minimum(gap, 1.0 - gap)


@pytest.mark.parametrize("N", [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31])
def test_full_rational_sets_are_groups(N):
    for z in range(1, N + 1):
        assert group_closed(build_nodes(RationalGenerator([z], N), N))
    rng = np.random.default_rng(N)
    for _ in range(5):
        z = rng.integers(1, N + 1, size=2)
        assert group_closed(build_nodes(RationalGenerator(z, N), N))


@pytest.mark.parametrize("N", [7, 101, 1009, 9973])
def test_continuous_and_rational_sets_agree(N):
    rng = np.random.default_rng(N)
    gen = RationalGenerator(rng.integers(1, N + 1, size=3), N)
    cont = continuous_from_rational(gen)
    for n in (1, N // 3 + 1, N):
        gap = torus_gap(build_generated_set(cont, n).points, build_rational_generated_set(gen, n).points)
        assert gap.max() <= 1e-12


def test_consecutive_nodes_differ_by_the_generator():
    zeta = np.random.default_rng(3).random(3)
    nodes = build_generated_set(ContinuousGenerator(zeta), 5000)
    steps = np.diff(nodes.points, axis=0)
    assert torus_gap(steps, zeta[None, :]).max() <= 1e-12
