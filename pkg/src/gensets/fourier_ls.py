"""
Fourier sampling matrix Phi[k, i] = exp(2 pi i h_i . x_k), SVD-based least squares, and evaluation
of the resulting trigonometric polynomial.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy.linalg as spla

from . import config as cfg
from .errors import ShapeError
from .korobov_core import IndexSet
from .pointsets import NodeList


@dataclass(frozen=True, eq=False)
class FourierMatrix:
    values: np.ndarray
    nodes: NodeList
    index_set: IndexSet

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True, eq=False)
class FourierPolynomial:
    """sum_i coeffs_i exp(2 pi i h_i . x) over index_set."""

    index_set: IndexSet
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if coeffs.size != self.index_set.m:
            raise ShapeError("{} coefficients for {} indices".format(coeffs.size, self.index_set.m))
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def hsigma_norm(self) -> float:
        """||f||_{H_sigma} = (sum |f_i|^2 / sigma_i^2)^{1/2}."""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2 / self.index_set.sigmas ** 2)))

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def to_frame(self) -> pd.DataFrame:
        """CSV layout: h_1..h_d, re, im."""
        frame = self.index_set.to_frame().drop(columns=["sigma"])
        frame["re"] = self.coeffs.real
        frame["im"] = self.coeffs.imag
        return frame


@dataclass(frozen=True, eq=False)
class LSResult:
    polynomial: FourierPolynomial
    sigma_min: float
    sigma_max: float
    residual_norm: float
    rank_deficient: bool
    rank: int


def _rational_phase(nodes: NodeList, index_set: IndexSet) -> np.ndarray:
    N = nodes.generator.N
    z = [int(x) for x in nodes.generator.z]
    # a_i = h_i . z mod N, then k a_i mod N, all exact
    a = np.array([sum(int(hj) * zj for hj, zj in zip(h, z)) % N for h in index_set.vectors], dtype=np.int64)
    n = nodes.n
    if n * N < 2 ** 62:
        k = np.arange(1, n + 1, dtype=np.int64)[:, None]
        num = (k * a[None, :]) % N
    else:
        num = np.array([[(k * int(ai)) % N for ai in a] for k in range(1, n + 1)], dtype=np.int64)
    return num.astype(float) / N


def assemble(nodes: NodeList, index_set: IndexSet) -> FourierMatrix:
    """
    n x m matrix exp(2 pi i h_i . x_k). For rational nodes the phase k (h.z mod N)/N is reduced in
    integer arithmetic before the exponential.
    """
    if index_set.m and index_set.d != nodes.d:
        raise ShapeError("index dimension {} does not match node dimension {}".format(index_set.d, nodes.d))
    if nodes.is_rational:
        phase = _rational_phase(nodes, index_set)
    else:
        phase = nodes.points @ index_set.vectors.T.astype(float)
        phase = phase - np.floor(phase)
    values = np.exp(2j * np.pi * phase)
    values.setflags(write=False)
    return FourierMatrix(values=values, nodes=nodes, index_set=index_set)


def _svd(a: np.ndarray):
    try:
        return spla.svd(a, full_matrices=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        return spla.svd(a, full_matrices=False, lapack_driver="gesvd")


def solve(matrix: FourierMatrix, samples: Sequence[complex], rank_tol: Optional[float] = None) -> LSResult:
    """
    Least-squares coefficients minimizing ||Phi c - samples||_2 via the SVD of Phi.
    Singular values below rank_tol * sigma_max are dropped and rank_deficient is set.
    """
    if rank_tol is None:
        rank_tol = cfg.RANK_TOL
    phi = matrix.values
    n, m = phi.shape
    b = np.asarray(samples, dtype=complex).reshape(-1)
    if b.size != n:
        raise ShapeError("{} samples for a matrix with {} rows".format(b.size, n))
    if n < m:
        raise ShapeError("least squares needs n >= m, got n={} m={}".format(n, m))
    u, s, vh = _svd(phi)
    sigma_max = float(s[0]) if s.size else 0.0
    sigma_min = float(s[-1]) if s.size else 0.0
    keep = s > rank_tol * sigma_max
    rank = int(np.count_nonzero(keep))
    coeffs = vh[:rank].conj().T @ ((u[:, :rank].conj().T @ b) / s[:rank])
    residual = float(np.linalg.norm(phi @ coeffs - b))
    return LSResult(
        polynomial=FourierPolynomial(matrix.index_set, coeffs),
        sigma_min=sigma_min,
        sigma_max=sigma_max,
        residual_norm=residual,
        rank_deficient=rank < m,
        rank=rank,
    )


def sample(f: FourierPolynomial, nodes: NodeList) -> np.ndarray:
    """f(x_k), k = 1..n, through the exact-phase matrix of f's own support."""
    if f.index_set.m == 0:
        return np.zeros(nodes.n, dtype=complex)
    return assemble(nodes, f.index_set).values @ f.coeffs


def approximate(f: FourierPolynomial, nodes: NodeList, index_set: IndexSet, rank_tol: Optional[float] = None) -> LSResult:
    """LS_m(f): sample f at the nodes, then solve on index_set."""
    return solve(assemble(nodes, index_set), sample(f, nodes), rank_tol)


def evaluate(poly: FourierPolynomial, x: Sequence[float]) -> complex:
    x = np.asarray(x, dtype=float).reshape(-1)
    phase = poly.index_set.vectors.astype(float) @ x
    return complex(np.sum(poly.coeffs * np.exp(2j * np.pi * phase)))


def evaluate_many(poly: FourierPolynomial, xs: np.ndarray) -> np.ndarray:
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    phase = xs @ poly.index_set.vectors.T.astype(float)
    return np.exp(2j * np.pi * phase) @ poly.coeffs


def extreme_singular_values(matrix: FourierMatrix) -> Tuple[float, float]:
    """(sigma_min, sigma_max) of the matrix."""
    s = spla.svdvals(matrix.values)
    if s.size == 0:
        return 0.0, 0.0
    return float(s[-1]), float(s[0])


def lattice_character_sums(nodes: NodeList, index_set: IndexSet) -> np.ndarray:
    """Phi* Phi; equals n I on a rank-1 lattice whose index set has no aliasing pairs."""
    phi = assemble(nodes, index_set).values
    return phi.conj().T @ phi


def l2_error(f: FourierPolynomial, g: FourierPolynomial) -> float:
    """||f - g||_{L2} via Parseval on the union of supports."""
    coeffs = {}
    for key, c in zip(f.index_set.keys(), f.coeffs):
        coeffs[key] = coeffs.get(key, 0j) + c
    for key, c in zip(g.index_set.keys(), g.coeffs):
        coeffs[key] = coeffs.get(key, 0j) - c
    return float(np.sqrt(sum(abs(c) ** 2 for c in coeffs.values())))
