"""
Generated node lists: frac(k * zeta) for a continuous generator and (k z mod N)/N for a rational one,
k = 1..n. The origin (k = 0) is excluded and duplicates are kept so the Fourier matrix has n rows.
"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import pandas as pd

from .errors import DomainError
from .primes import is_prime

_SPLIT = 134217729.0  # 2^27 + 1


@dataclass(frozen=True, eq=False)
class ContinuousGenerator:
    zeta: np.ndarray

    def __post_init__(self):
        zeta = np.array(self.zeta, dtype=float).reshape(-1)
        if zeta.size == 0:
            raise DomainError("generator must have at least one component")
        if np.any(zeta < 0.0) or np.any(zeta >= 1.0) or not np.all(np.isfinite(zeta)):
            raise DomainError("generator components must lie in [0, 1), got {}".format(zeta.tolist()))
        zeta.setflags(write=False)
        object.__setattr__(self, "zeta", zeta)

    @property
    def d(self) -> int:
        return int(self.zeta.size)


@dataclass(frozen=True, eq=False)
class RationalGenerator:
    z: np.ndarray
    N: int

    def __post_init__(self):
        z = np.array(self.z, dtype=np.int64).reshape(-1)
        N = int(self.N)
        if not is_prime(N):
            raise DomainError("modulus N must be prime, got {}".format(N))
        if np.any(z < 1) or np.any(z > N):
            raise DomainError("generating vector entries must lie in 1..{}, got {}".format(N, z.tolist()))
        z.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "N", N)

    @property
    def d(self) -> int:
        return int(self.z.size)


Generator = Union[ContinuousGenerator, RationalGenerator]


@dataclass(frozen=True, eq=False)
class NodeList:
    """
    Ordered nodes x_k, k = 1..n (row k-1 of `points`).
    Rational provenance also carries the exact numerators k z mod N; `wrapping` marks n > N.
    """

    points: np.ndarray
    generator: Generator
    numerators: Optional[np.ndarray] = None
    wrapping: bool = False

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    @property
    def d(self) -> int:
        return int(self.points.shape[1])

    @property
    def is_rational(self) -> bool:
        return isinstance(self.generator, RationalGenerator)

    def to_frame(self) -> pd.DataFrame:
        """CSV layout: k, x_1..x_d; rational nodes add num_1..num_d, N."""
        frame = pd.DataFrame({"k": np.arange(1, self.n + 1)})
        for j in range(self.d):
            frame["x_{}".format(j + 1)] = self.points[:, j]
        if self.is_rational:
            for j in range(self.d):
                frame["num_{}".format(j + 1)] = self.numerators[:, j]
            frame["N"] = self.generator.N
        return frame


def _two_product(a: np.ndarray, b: np.ndarray):
    # Dekker: a * b = p + err exactly
    p = a * b
    t = _SPLIT * a
    a_hi = t - (t - a)
    a_lo = a - a_hi
    t = _SPLIT * b
    b_hi = t - (t - b)
    b_lo = b - b_hi
    err = ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo
    return p, err


def build_generated_set(gen: ContinuousGenerator, n: int) -> NodeList:
    """
    nodes[k] = frac(k * zeta), evaluated per k as a double-double product reduced mod 1,
    so node error stays below 1e-14 for k <= NODE_PRECISION_K_MAX.
    """
    if n < 1:
        raise DomainError("n must be positive, got {}".format(n))
    k = np.arange(1, n + 1, dtype=float)[:, None]
    p, err = _two_product(k, gen.zeta[None, :])
    frac = (p - np.floor(p)) + err
    frac = np.where(frac < 0.0, frac + 1.0, frac)
    frac = np.where(frac >= 1.0, frac - 1.0, frac)
    frac.setflags(write=False)
    return NodeList(points=frac, generator=gen)


def _rational_numerators(z: np.ndarray, N: int, n: int) -> np.ndarray:
    if n * N < 2 ** 62:
        k = np.arange(1, n + 1, dtype=np.int64)[:, None]
        return (k * (z[None, :] % N)) % N
    rows = [[(k * int(zj)) % N for zj in z] for k in range(1, n + 1)]
    return np.array(rows, dtype=np.int64)


def build_rational_generated_set(gen: RationalGenerator, n: int) -> NodeList:
    """nodes[k] = (k z mod N) / N from exact integer numerators; n > N is allowed and flagged as wrapping."""
    if n < 1:
        raise DomainError("n must be positive, got {}".format(n))
    num = _rational_numerators(gen.z, gen.N, n)
    points = num.astype(float) / gen.N
    num.setflags(write=False)
    points.setflags(write=False)
    return NodeList(points=points, generator=gen, numerators=num, wrapping=n > gen.N)


def build_nodes(gen: Generator, n: int) -> NodeList:
    if isinstance(gen, RationalGenerator):
        return build_rational_generated_set(gen, n)
    return build_generated_set(gen, n)


def is_rank1_lattice(nodes: NodeList) -> bool:
    """Rational nodes with n = N: the full rank-1 lattice (origin appears at k = N)."""
    return nodes.is_rational and nodes.n == nodes.generator.N


def group_closed(nodes: NodeList) -> bool:
    """Whether {nodes} together with the origin is closed under addition mod 1 (exact, rational only)."""
    if not nodes.is_rational:
        return False
    N = nodes.generator.N
    members = {tuple(int(x) for x in row) for row in nodes.numerators}
    members.add(tuple([0] * nodes.d))
    for a in members:
        for b in members:
            if tuple((x + y) % N for x, y in zip(a, b)) not in members:
                return False
    return True


def continuous_from_rational(gen: RationalGenerator) -> ContinuousGenerator:
    """Floating generator z/N (z_j = N maps to 0)."""
    return ContinuousGenerator((gen.z % gen.N).astype(float) / gen.N)
