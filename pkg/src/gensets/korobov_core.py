"""
Function-space data for H_sigma: Korobov weights, sigma sequences, weighted hyperbolic crosses,
the deterministic frequency ordering, and space-level quantities (mu(lambda), kernel, tail sums).

Ordering: i -> h_i sorts by sigma descending (r_{alpha,gamma} ascending), then ||h||_inf ascending,
then lexicographically on the components. Every enumeration in the package uses this key.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from . import config as cfg
from .errors import DomainError, ExhaustionError, ResourceCapError, TruncationError
from .logging_system import log_cross_built


# ---------------------------------------------------------------------------
# Korobov parameters
# ---------------------------------------------------------------------------

def _mask_of(u: Iterable[int]) -> int:
    mask = 0
    for j in u:
        mask |= 1 << (int(j) - 1)
    return mask


@dataclass(frozen=True)
class KorobovParams:
    """
    Weighted Korobov space: dimension d, smoothness alpha > 1/2 and subset weights gamma_u in (0, 1].

    weights[mask] is gamma_u for the subset u whose 1-based coordinates are the set bits of mask
    (bit j-1 for coordinate j), so weights[0] is gamma_emptyset.
    """

    d: int
    alpha: float
    weights: Tuple[float, ...]

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise DomainError("d must be a positive integer, got {}".format(self.d))
        if not self.alpha > 0.5:
            raise DomainError("alpha must exceed 1/2, got {}".format(self.alpha))
        if len(self.weights) != 1 << self.d:
            raise DomainError("expected {} subset weights, got {}".format(1 << self.d, len(self.weights)))
        for mask, g in enumerate(self.weights):
            if not (0.0 < g <= 1.0):
                raise DomainError("gamma for subset {} must lie in (0, 1], got {}".format(_subset_of(mask), g))

    @classmethod
    def product(cls, d: int, alpha: float, gammas: Sequence[float]) -> "KorobovParams":
        """Product weights gamma_u = prod_{j in u} gamma_j, gamma_emptyset = 1."""
        if len(gammas) != d:
            raise DomainError("expected {} coordinate weights, got {}".format(d, len(gammas)))
        for g in gammas:
            if not (0.0 < g <= 1.0):
                raise DomainError("coordinate weights must lie in (0, 1], got {}".format(g))
        weights = []
        for mask in range(1 << d):
            w = 1.0
            for j in range(d):
                if mask >> j & 1:
                    w *= float(gammas[j])
            weights.append(w)
        return cls(d=d, alpha=float(alpha), weights=tuple(weights))

    @classmethod
    def unweighted(cls, d: int, alpha: float) -> "KorobovParams":
        return cls(d=d, alpha=float(alpha), weights=tuple([1.0] * (1 << d)))

    @classmethod
    def from_subsets(cls, d: int, alpha: float, gamma: Mapping[Tuple[int, ...], float]) -> "KorobovParams":
        """General weights from a map {tuple of 1-based coordinates: gamma_u}; every subset must be present."""
        weights = [None] * (1 << d)
        for u, g in gamma.items():
            if any(j < 1 or j > d for j in u):
                raise DomainError("subset {} is not contained in 1..{}".format(tuple(u), d))
            weights[_mask_of(u)] = float(g)
        missing = [_subset_of(mask) for mask, w in enumerate(weights) if w is None]
        if missing:
            raise DomainError("missing weights for subsets {}".format(missing[:5]))
        return cls(d=d, alpha=float(alpha), weights=tuple(weights))

    def gamma(self, u: Iterable[int]) -> float:
        return self.weights[_mask_of(u)]

    @property
    def gamma_empty(self) -> float:
        return self.weights[0]

    @property
    def gamma_max(self) -> float:
        return max(self.weights)


def _subset_of(mask: int) -> Tuple[int, ...]:
    return tuple(j + 1 for j in range(mask.bit_length()) if mask >> j & 1)


def r_alpha_gamma(h: Sequence[int], params: KorobovParams) -> float:
    """
    r_{alpha,gamma}(h) = gamma_{supp(h)}^{-1} prod_{j in supp(h)} |h_j|^alpha; 1/gamma_emptyset for h = 0.

    The product of |h_j| is formed in exact integer arithmetic before the power, so permuted
    vectors with equal weights produce bit-identical values (ties in the ordering stay ties).
    """
    mask = 0
    prod = 1
    for j, hj in enumerate(h):
        hj = int(hj)
        if hj != 0:
            mask |= 1 << j
            prod *= abs(hj)
    return float(prod) ** params.alpha / params.weights[mask]


def _order_key(r: float, h: Tuple[int, ...]):
    return (r, max((abs(x) for x in h), default=0), h)


# ---------------------------------------------------------------------------
# Index sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class IndexSet:
    """
    Ordered list of distinct frequency vectors h_i with their sigma_i.

    tail_radius is a lower bound on r_{alpha,gamma}(h) for every h NOT in the set (Korobov-built
    sets only; nan otherwise). A cross A(M) has tail_radius M.
    """

    vectors: np.ndarray
    sigmas: np.ndarray
    tail_radius: float = float("nan")

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=np.int64)
        if vectors.ndim != 2:
            raise ValueError("vectors must be a 2-d integer array")
        sigmas = np.asarray(self.sigmas, dtype=float)
        if sigmas.shape != (vectors.shape[0],):
            raise ValueError("one sigma per vector required")
        vectors.setflags(write=False)
        sigmas.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "sigmas", sigmas)

    @property
    def m(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def d(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return self.m

    def keys(self) -> List[Tuple[int, ...]]:
        return [tuple(int(x) for x in row) for row in self.vectors]

    def hinf(self) -> np.ndarray:
        """||h_i||_inf per entry."""
        if self.m == 0:
            return np.zeros(0, dtype=np.int64)
        return np.abs(self.vectors).max(axis=1)

    def head(self, m: int) -> "IndexSet":
        return IndexSet(self.vectors[:m], self.sigmas[:m], float("nan"))

    def position(self, h: Sequence[int]) -> Optional[int]:
        """0-based position of h, or None."""
        target = tuple(int(x) for x in h)
        for i, key in enumerate(self.keys()):
            if key == target:
                return i
        return None

    def to_frame(self) -> pd.DataFrame:
        """CSV layout: h_1..h_d, sigma."""
        cols = {"h_{}".format(j + 1): self.vectors[:, j] for j in range(self.d)}
        frame = pd.DataFrame(cols)
        frame["sigma"] = self.sigmas
        return frame


def _index_set_from_keys(keys: List[Tuple[int, ...]], sigmas: List[float], d: int, tail_radius: float) -> IndexSet:
    vectors = np.array(keys, dtype=np.int64).reshape(len(keys), d)
    return IndexSet(vectors, np.array(sigmas, dtype=float), tail_radius)


# ---------------------------------------------------------------------------
# Sigma sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SigmaSequence:
    """
    Source of sigma_h: either a Korobov space (sigma_h = 1/r_{alpha,gamma}(h), infinite support)
    or an explicit finite table h -> sigma_h > 0. Enumeration follows the package ordering.
    """

    params: Optional[KorobovParams] = None
    table: Tuple[Tuple[Tuple[int, ...], float], ...] = field(default=())
    dim: int = 0

    @classmethod
    def korobov(cls, params: KorobovParams) -> "SigmaSequence":
        return cls(params=params, table=(), dim=params.d)

    @classmethod
    def explicit(cls, d: int, sigma: Mapping[Sequence[int], float]) -> "SigmaSequence":
        entries = []
        for h, s in sigma.items():
            key = tuple(int(x) for x in h)
            if len(key) != d:
                raise DomainError("index {} does not have dimension {}".format(key, d))
            if not s > 0:
                raise DomainError("sigma must be positive, got {} at {}".format(s, key))
            entries.append((key, float(s)))
        entries.sort(key=lambda e: _order_key(1.0 / e[1], e[0]))
        return cls(params=None, table=tuple(entries), dim=d)

    @property
    def is_korobov(self) -> bool:
        return self.params is not None

    @property
    def d(self) -> int:
        return self.dim

    def sigma(self, h: Sequence[int]) -> float:
        if self.params is not None:
            return 1.0 / r_alpha_gamma(h, self.params)
        key = tuple(int(x) for x in h)
        for k, s in self.table:
            if k == key:
                return s
        return 0.0


# ---------------------------------------------------------------------------
# Hyperbolic crosses
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _unweighted_count(d: int, K: int) -> int:
    # |A_d(M)| depends on M only through K = floor(M)
    if K < 1:
        return 0
    if d == 0:
        return 1
    total = _unweighted_count(d - 1, K)
    h = 1
    while h <= K:
        q = K // h
        h_last = K // q  # every h in [h, h_last] shares floor(K/h) = q
        total += 2 * (h_last - h + 1) * _unweighted_count(d - 1, q)
        h = h_last + 1
    return total


def unweighted_cross_cardinality(d: int, M: float) -> int:
    """
    |A_d(M)| for the unweighted cross {h : prod_{h_j != 0} |h_j| <= M}, via
    |A_{d+1}(M)| = |A_d(M)| + 2 sum_{h=1}^{floor(M)} |A_d(M/h)| without enumerating vectors.
    """
    if d < 1:
        raise DomainError("d must be positive, got {}".format(d))
    if M < 1:
        return 0
    return _unweighted_count(int(d), int(math.floor(M)))


def enumerate_cross(params: KorobovParams, M: float, cap: Optional[int] = None) -> IndexSet:
    """
    The weighted hyperbolic cross A_{d,alpha,gamma}(M) = {h : r_{alpha,gamma}(h) <= M} in package order.

    Depth-first over coordinates; a branch with partial product P (of |h_j|^alpha over chosen nonzero
    coordinates) is pruned once P > M * max_u gamma_u, which bounds |h_j| <= (M max gamma / P)^{1/alpha}.
    """
    if cap is None:
        cap = cfg.CROSS_CARDINALITY_CAP
    if M < 0:
        raise DomainError("M must be nonnegative, got {}".format(M))
    d, alpha = params.d, params.alpha
    r_limit = M * params.gamma_max
    predicted = unweighted_cross_cardinality(d, r_limit ** (1.0 / alpha)) if r_limit >= 1 else 0
    if predicted > cap:
        raise ResourceCapError("cross of radius {} may hold up to {} indices (cap {})".format(M, predicted, cap))

    found: List[Tuple[float, Tuple[int, ...]]] = []
    h = [0] * d

    def recurse(j: int, int_prod: int):
        if j == d:
            key = tuple(h)
            r = r_alpha_gamma(key, params)
            if r <= M:
                found.append((r, key))
            return
        h[j] = 0
        recurse(j + 1, int_prod)
        k = 1
        while float(int_prod * k) ** alpha <= r_limit:
            for s in (-k, k):
                h[j] = s
                recurse(j + 1, int_prod * k)
            k += 1
        h[j] = 0

    if r_limit >= 1:
        recurse(0, 1)
    found.sort(key=lambda e: _order_key(e[0], e[1]))
    log_cross_built(d, M, len(found))
    return _index_set_from_keys([k for _, k in found], [1.0 / r for r, _ in found], d, float(M))


def cross_cardinality_bound(params: KorobovParams, M: float, lam: float, tol: Optional[float] = None) -> float:
    """The alternative cardinality bound |A_{d,alpha,gamma}(M)| <= M^{1/lambda} mu(lambda), lambda < alpha."""
    return M ** (1.0 / lam) * mu(lam, params, tol)


def take_first_m(seq: SigmaSequence, m: int) -> IndexSet:
    """The first m indices of the ordering; the last kept sigma is >= every excluded sigma."""
    if m < 1:
        raise DomainError("m must be positive, got {}".format(m))
    if not seq.is_korobov:
        if len(seq.table) < m:
            raise ExhaustionError("explicit sigma table has {} entries, {} requested".format(len(seq.table), m))
        keys = [k for k, _ in seq.table[:m]]
        sig = [s for _, s in seq.table[:m]]
        return _index_set_from_keys(keys, sig, seq.d, float("nan"))

    params = seq.params
    M = 1.0 / params.gamma_empty
    cross = enumerate_cross(params, M)
    while cross.m < m + 1:
        M *= 2.0
        cross = enumerate_cross(params, M)
    keys = cross.keys()[:m]
    sig = list(cross.sigmas[:m])
    # everything outside the first m has r >= r(h_{m+1})
    tail_radius = 1.0 / float(cross.sigmas[m])
    return _index_set_from_keys(keys, sig, seq.d, tail_radius)


def korobov_superset(seq: SigmaSequence, M: float) -> IndexSet:
    """Surrogate superset J: the cross A(M) for Korobov sources, the whole table for explicit ones."""
    if seq.is_korobov:
        return enumerate_cross(seq.params, M)
    keys = [k for k, _ in seq.table]
    sig = [s for _, s in seq.table]
    return _index_set_from_keys(keys, sig, seq.d, float("nan"))


def hinf_bound_holds(index_set: IndexSet, C1: float = 1.0, r: float = 1.0) -> bool:
    """||h_i||_inf <= C1 * i^r for i = 1..|index_set| (1-based positions)."""
    if index_set.m == 0:
        return True
    i = np.arange(1, index_set.m + 1, dtype=float)
    return bool(np.all(index_set.hinf() <= C1 * i ** r + 1e-12))


def sigma_decay_profile(params: KorobovParams, i_values: Sequence[int]) -> np.ndarray:
    """sigma_i * i^alpha / log^{alpha(d-1)}(max(i, 2)) at the requested 1-based positions."""
    i_max = int(max(i_values))
    first = take_first_m(SigmaSequence.korobov(params), i_max)
    out = []
    for i in i_values:
        s = first.sigmas[int(i) - 1]
        out.append(s * i ** params.alpha / math.log(max(i, 2)) ** (params.alpha * (params.d - 1)))
    return np.array(out)


# ---------------------------------------------------------------------------
# Zeta and mu(lambda)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=256)
def _zeta(s: float, tol: float) -> float:
    # partial sum + integral remainder with Euler-Maclaurin corrections;
    # truncation error <= s(s+1)(s+2) K^{-(s+3)} / 720
    K = cfg.ZETA_MIN_TERMS
    while s * (s + 1) * (s + 2) * K ** (-(s + 3)) / 720.0 > tol and K < cfg.ZETA_MAX_TERMS:
        K *= 2
    K = min(K, cfg.ZETA_MAX_TERMS)
    k = np.arange(1, K, dtype=float)
    partial = float(np.sum((k ** -s)[::-1]))
    tail = K ** (1.0 - s) / (s - 1.0) + 0.5 * K ** -s + s * K ** (-s - 1.0) / 12.0
    return partial + tail


def riemann_zeta(s: float, tol: Optional[float] = None) -> float:
    """Riemann zeta for real s > 1 to absolute accuracy tol."""
    if tol is None:
        tol = cfg.ZETA_TOL
    if not s > 1:
        raise DomainError("zeta needs s > 1, got {}".format(s))
    return _zeta(float(s), float(tol))


def mu(lam: float, params: KorobovParams, tol: Optional[float] = None) -> float:
    """
    mu(lambda) = sum_{u subset 1..d} gamma_u^{1/lambda} (2 zeta(alpha/lambda))^{|u|},
    defined for 1/2 < lambda < alpha.
    """
    if not (0.5 < lam < params.alpha):
        raise DomainError("lambda must lie in (1/2, alpha={}), got {}".format(params.alpha, lam))
    two_zeta = 2.0 * riemann_zeta(params.alpha / lam, tol)
    total = 0.0
    for mask, g in enumerate(params.weights):
        total += g ** (1.0 / lam) * two_zeta ** bin(mask).count("1")
    return total


def lambda_grid(alpha: float, size: Optional[int] = None) -> List[float]:
    """Interior grid of (1/2, alpha) used to minimize analytic remainder bounds."""
    if size is None:
        size = cfg.TAIL_LAMBDA_GRID
    return [0.5 + (alpha - 0.5) * k / (size + 1) for k in range(1, size + 1)]


# ---------------------------------------------------------------------------
# Kernel and tail sums
# ---------------------------------------------------------------------------

def kernel_eval(x: Sequence[float], y: Sequence[float], index_set: IndexSet) -> complex:
    """Truncated reproducing kernel sum_i sigma_i^2 exp(2 pi i h_i . (x - y))."""
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    phase = index_set.vectors.astype(float) @ diff
    return complex(np.sum(index_set.sigmas ** 2 * np.exp(2j * np.pi * phase)))


@dataclass(frozen=True)
class TailSums:
    """
    Tail ingredients of the theorem bounds, over the surrogate J plus analytic remainders for the
    indices outside J. S4w carries the weight i^{r eps}, S4h the weight ||h_i||_inf^eps.
    """

    S2: float
    S4w: float
    S4h: float
    remainder2: float
    remainder4: float
    remainder4h: float
    sigma_m1: float
    hinf_max_m: int

    @property
    def total2(self) -> float:
        return self.S2 + self.remainder2

    @property
    def total4w(self) -> float:
        return self.S4w + self.remainder4

    @property
    def total4h(self) -> float:
        return self.S4h + self.remainder4h


def complement_radius(params: KorobovParams, J: IndexSet) -> float:
    """Lower bound on r_{alpha,gamma}(h) over h not in J (exact minimum when computable)."""
    if J.m == 0:
        return 1.0 / params.gamma_empty
    if not math.isnan(J.tail_radius):
        return J.tail_radius
    r_max = 1.0 / float(J.sigmas.min())
    keys = set(J.keys())
    cross = enumerate_cross(params, r_max)
    for key, s in zip(cross.keys(), cross.sigmas):
        if key not in keys:
            return 1.0 / float(s)
    return r_max


def power_sum(params: KorobovParams, p: float, q: float = 0.0, tol: Optional[float] = None) -> Tuple[float, float]:
    """
    sum over all h in Z^d of sigma_h^p prod_{j in supp(h)} |h_j|^q
      = sum_u gamma_u^p (2 zeta(alpha p - q))^{|u|},
    with an absolute error bound inherited from the zeta evaluation. Needs alpha p - q > 1.
    """
    if tol is None:
        tol = cfg.ZETA_TOL
    s = params.alpha * p - q
    if not s > 1:
        raise DomainError("power sum diverges: alpha p - q = {} <= 1".format(s))
    two_zeta = 2.0 * riemann_zeta(s, tol)
    total = err = 0.0
    for mask, g in enumerate(params.weights):
        k = bin(mask).count("1")
        total += g ** p * two_zeta ** k
        if k:
            err += g ** p * k * (two_zeta + 2.0 * tol) ** (k - 1) * 2.0 * tol
    return total, err


def _support_products(J: IndexSet) -> np.ndarray:
    """prod_{j in supp(h)} |h_j| per entry of J (1 for h = 0)."""
    if J.m == 0:
        return np.zeros(0)
    a = np.abs(J.vectors).astype(float)
    return np.where(a == 0.0, 1.0, a).prod(axis=1)


def complement_sum(params: KorobovParams, J: IndexSet, p: float, q: float = 0.0, tol: Optional[float] = None) -> float:
    """
    Upper bound on sum_{h not in J} sigma_h^p prod_{j in supp(h)} |h_j|^q: the closed-form total over
    Z^d minus the exact sum over J, plus the zeta error and a rounding allowance.
    """
    total, err = power_sum(params, p, q, tol)
    if J.m:
        inside = math.fsum((J.sigmas ** p * _support_products(J) ** q).tolist())
    else:
        inside = 0.0
    rounding = 8.0 * np.finfo(float).eps * total
    return max(total - inside, 0.0) + err + rounding


def korobov_remainders(params: KorobovParams, J: IndexSet, eps: float, r: float, tol: Optional[float] = None) -> Tuple[float, float, float]:
    """
    Bounds for the indices outside J (J a prefix of the ordering):
      sum sigma^2                 exact complement of the closed-form total
      sum ||h||_inf^eps sigma^4   via ||h||_inf <= prod_{j in supp(h)} |h_j|
      sum i^{r eps} sigma^4       via i <= |A(r(h_i))| <= sigma_i^{-1/lambda} mu(lambda), minimized over lambda
    """
    rem2 = complement_sum(params, J, 2.0, 0.0, tol)
    rem4h = complement_sum(params, J, 4.0, eps, tol)
    if r * eps == 0:
        return rem2, complement_sum(params, J, 4.0, 0.0, tol), rem4h
    rem4 = math.inf
    for lam in lambda_grid(params.alpha):
        p = 4.0 - r * eps / lam
        if params.alpha * p > 1:
            rem4 = min(rem4, mu(lam, params, tol) ** (r * eps) * complement_sum(params, J, p, 0.0, tol))
    return rem2, rem4, rem4h


def tail_sums(seq: SigmaSequence, m: int, eps: float, r: float, J: IndexSet, tol: Optional[float] = None) -> TailSums:
    """
    S2 = sum_{m<i<=|J|} sigma_i^2, S4w = sum_{m<i<=|J|} i^{r eps} sigma_i^4 and S4h over J, plus
    remainders for indices outside J (Korobov sources; zero for explicit tables).
    Raises TruncationError, a DomainError, unless J begins with the first m indices.
    """
    if m < 1:
        raise DomainError("m must be positive, got {}".format(m))
    ensure_contains_first_m(seq, m, J)
    tail = J.sigmas[m:]
    i = np.arange(m + 1, J.m + 1, dtype=float)
    hinf = J.hinf()
    S2 = float(np.sum(tail ** 2))
    S4w = float(np.sum(i ** (r * eps) * tail ** 4))
    S4h = float(np.sum(hinf[m:].astype(float) ** eps * tail ** 4))
    if seq.is_korobov:
        rem2, rem4, rem4h = korobov_remainders(seq.params, J, eps, r, tol)
        sigma_m1 = float(J.sigmas[m]) if J.m > m else 1.0 / complement_radius(seq.params, J)
    else:
        rem2 = rem4 = rem4h = 0.0
        sigma_m1 = float(J.sigmas[m]) if J.m > m else 0.0
    return TailSums(
        S2=S2, S4w=S4w, S4h=S4h,
        remainder2=rem2, remainder4=rem4, remainder4h=rem4h,
        sigma_m1=sigma_m1,
        hinf_max_m=int(hinf[:m].max()) if m > 0 else 0,
    )


def ensure_contains_first_m(seq: SigmaSequence, m: int, J: IndexSet):
    """Raise TruncationError unless J starts with the first m indices of the ordering."""
    if J.m < m:
        raise TruncationError("J holds {} indices, fewer than m = {}".format(J.m, m))
    first = take_first_m(seq, m)
    if set(first.keys()) != set(J.keys()[:m]):
        raise TruncationError("J does not begin with the first {} indices of the ordering".format(m))
