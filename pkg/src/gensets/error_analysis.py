"""
Worst-case error on a truncated space H_sigma restricted to J, the divisor constant C_eps, and the
generated-set error bounds (continuous, regular, rational, and the Korobov corollaries).

Infeasible bounds are returned as values with feasible=False; the numeric value is still reported
(inf when a radicand is non-positive).
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterator, Optional, Tuple

import numpy as np
import scipy.linalg as spla
from scipy.sparse.linalg import LinearOperator, svds

from . import config as cfg
from .errors import DomainError, PreconditionError
from .fourier_ls import assemble
from .korobov_core import (
    IndexSet,
    KorobovParams,
    SigmaSequence,
    TailSums,
    complement_radius,
    enumerate_cross,
    ensure_contains_first_m,
    hinf_bound_holds,
    korobov_remainders,
    mu,
    tail_sums,
)
from .pointsets import NodeList
from .primes import is_prime, next_prime_at_least


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SurrogateSpace:
    """H_sigma truncated to the finite superset J; tail2 bounds sum_{h not in J} sigma_h^2."""

    seq: SigmaSequence
    J: IndexSet
    tail2: float

    @classmethod
    def build(cls, seq: SigmaSequence, J: IndexSet) -> "SurrogateSpace":
        if seq.is_korobov:
            tail2 = korobov_remainders(seq.params, J, 0.0, 0.0)[0]
        else:
            tail2 = 0.0
        return cls(seq=seq, J=J, tail2=tail2)

    def sigma_after(self, m: int) -> float:
        """sigma_{m+1}."""
        if self.J.m > m:
            return float(self.J.sigmas[m])
        if self.seq.is_korobov:
            return 1.0 / complement_radius(self.seq.params, self.J)
        return 0.0


@dataclass(frozen=True)
class DivisorConstant:
    epsilon: float
    n_max: int
    value: float


@dataclass(frozen=True, eq=False)
class BoundResult:
    value: float
    feasible: bool
    reason: str = ""
    details: Dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class KorobovBound:
    M: float
    m: int
    bound: float
    feasible: bool
    lam: float
    mu: float
    sharp_bound: float
    N: Optional[int] = None
    reason: str = ""


@dataclass(frozen=True, eq=False)
class WceReport:
    """
    condition_diag keys: sigma_min_sq, tail_op_sq, and when thresholds were supplied
    threshold_min_sv_sq, threshold_tail_op_sq, min_sv_pass, tail_pass, cond_pass.
    maximizer holds the Fourier coefficients (over J) of a unit-norm function attaining wce_surrogate.
    """

    n: int
    m: int
    wce_surrogate: float
    wce_upper: float
    sigma_m_plus_1: float
    sigma_min: float
    rank_deficient: bool
    condition_diag: Dict[str, float]
    bound_theorem: Optional[float] = None
    maximizer: Optional[np.ndarray] = None


# ---------------------------------------------------------------------------
# Divisor constant
# ---------------------------------------------------------------------------

def divisor_sum(n: int) -> int:
    """Number of nonzero i in [-n, n] dividing n, i.e. 2 d(n)."""
    if n < 1:
        raise DomainError("divisor_sum needs n >= 1, got {}".format(n))
    count = 0
    i = 1
    while i * i <= n:
        if n % i == 0:
            count += 1 if i * i == n else 2
        i += 1
    return 2 * count


@lru_cache(maxsize=16)
def _divisor_counts(n_max: int) -> np.ndarray:
    counts = np.zeros(n_max + 1, dtype=np.int64)
    for i in range(1, n_max + 1):
        counts[i::i] += 1
    counts.setflags(write=False)
    return counts


def c_epsilon(eps: float, n_max: Optional[int] = None) -> DivisorConstant:
    """C_eps(n_max) = max_{n <= n_max} 2 d(n) / n^eps, exact over the finite range."""
    if n_max is None:
        n_max = cfg.C_EPS_DEFAULT_N_MAX
    if not eps > 0:
        raise DomainError("eps must be positive, got {}".format(eps))
    if n_max < 1:
        raise DomainError("n_max must be positive, got {}".format(n_max))
    counts = _divisor_counts(int(n_max))[1:]
    n = np.arange(1, n_max + 1, dtype=float)
    value = float(np.max(2.0 * counts / n ** eps))
    return DivisorConstant(epsilon=float(eps), n_max=int(n_max), value=value)


def _check_eps(eps: float):
    if not (0.0 < eps <= 1.0):
        raise DomainError("eps must lie in (0, 1], got {}".format(eps))


# ---------------------------------------------------------------------------
# Tail operator and worst-case error
# ---------------------------------------------------------------------------

def _tail_blocks(nodes: NodeList, J: IndexSet, start: int) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """(Phi block, sigma block) over columns start.. of J, WCE_BLOCK columns at a time."""
    for a in range(start, J.m, cfg.WCE_BLOCK):
        b = min(a + cfg.WCE_BLOCK, J.m)
        block = IndexSet(J.vectors[a:b], J.sigmas[a:b])
        yield assemble(nodes, block).values, J.sigmas[a:b]


def tail_operator_sq(nodes: NodeList, m: int, J: IndexSet, gram: Optional[np.ndarray] = None) -> float:
    """
    ||Phi_{P, J minus first m} D_sigma||_2^2 as the top eigenvalue of the n x n Gram sum.
    gram: that Gram sum when the caller has already accumulated it.
    """
    if J.m <= m:
        return 0.0
    n = nodes.n
    if gram is None:
        gram = np.zeros((n, n), dtype=complex)
        for phi, sig in _tail_blocks(nodes, J, m):
            scaled = phi * sig[None, :]
            gram += scaled @ scaled.conj().T
    top = spla.eigvalsh(gram, subset_by_index=[n - 1, n - 1])
    return max(float(top[0]), 0.0)


def _pinv_parts(phi_m: np.ndarray, rank_tol: float):
    u, s, vh = spla.svd(phi_m, full_matrices=False)
    keep = s > rank_tol * (s[0] if s.size else 0.0)
    k = int(np.count_nonzero(keep))
    pinv = (vh[:k].conj().T / s[:k][None, :]) @ u[:, :k].conj().T
    return pinv, s, k


def worst_case_error_exact(
    nodes: NodeList,
    m: int,
    space: SurrogateSpace,
    rank_tol: Optional[float] = None,
    thresholds: Optional[Tuple[float, float]] = None,
) -> WceReport:
    """
    wce_surrogate = || (I_J - R^T Phi_m^+ Phi_J) D_sigma ||_2, the exact worst-case L2 error of LS_m
    over the unit ball of H_sigma restricted to J. wce_upper adds sqrt(n tail2)/sigma_min + sqrt(tail2)
    for the frequencies outside J.

    thresholds: optional (threshold_min_sv_sq, threshold_tail_op_sq) filled into condition_diag.
    """
    if rank_tol is None:
        rank_tol = cfg.RANK_TOL
    if m < 1:
        raise DomainError("m must be positive, got {}".format(m))
    J = space.J
    ensure_contains_first_m(space.seq, m, J)
    n = nodes.n
    if n < m:
        raise DomainError("worst-case error needs n >= m, got n={} m={}".format(n, m))

    phi_m = assemble(nodes, J.head(m)).values
    pinv, s, rank = _pinv_parts(phi_m, rank_tol)
    sig_m = J.sigmas[:m]
    top_left = np.diag(sig_m).astype(complex) - (pinv @ phi_m) * sig_m[None, :]
    tail_cols = []
    gram = np.zeros((n, n), dtype=complex)
    for phi, sig in _tail_blocks(nodes, J, m):
        scaled = phi * sig[None, :]
        gram += scaled @ scaled.conj().T
        tail_cols.append(-(pinv @ scaled))
    coupling = np.hstack(tail_cols) if tail_cols else np.zeros((m, 0), dtype=complex)
    sig_t = J.sigmas[m:]
    T = sig_t.size

    if J.m <= cfg.WCE_DENSE_MAX:
        B = np.zeros((m + T, m + T), dtype=complex)
        B[:m, :m] = top_left
        B[:m, m:] = coupling
        B[m:, m:] = np.diag(sig_t)
        _, sv, vh = spla.svd(B)
        wce = float(sv[0])
        x = vh[0].conj()
    else:
        def matvec(v):
            v = np.asarray(v).reshape(-1)
            top = top_left @ v[:m] + coupling @ v[m:]
            return np.concatenate([top, sig_t * v[m:]])

        def rmatvec(y):
            y = np.asarray(y).reshape(-1)
            head = top_left.conj().T @ y[:m]
            rest = coupling.conj().T @ y[:m] + sig_t * y[m:]
            return np.concatenate([head, rest])

        op = LinearOperator((m + T, m + T), matvec=matvec, rmatvec=rmatvec, dtype=complex)
        _, sv, vh = svds(op, k=1, v0=np.ones(m + T, dtype=complex))
        wce = float(sv[0])
        x = vh[0].conj()

    sigma_min = float(s[-1]) if s.size else 0.0
    rank_deficient = rank < m
    if sigma_min > 0 and not rank_deficient:
        upper = wce + math.sqrt(n * space.tail2) / sigma_min + math.sqrt(space.tail2)
    else:
        upper = math.inf

    tail_op = tail_operator_sq(nodes, m, J, gram=gram)
    diag = {"sigma_min_sq": sigma_min ** 2, "tail_op_sq": tail_op}
    if thresholds is not None:
        diag.update(evaluate_conditions(sigma_min ** 2, tail_op, thresholds[0], thresholds[1]))

    return WceReport(
        n=n,
        m=m,
        wce_surrogate=wce,
        wce_upper=upper,
        sigma_m_plus_1=space.sigma_after(m),
        sigma_min=sigma_min,
        rank_deficient=rank_deficient,
        condition_diag=diag,
        maximizer=J.sigmas * x,
    )


def evaluate_conditions(sigma_min_sq: float, tail_op_sq: float, thr_min: float, thr_tail: float) -> Dict[str, float]:
    """Both acceptance comparisons, with ACCEPT_RTOL slack for equality cases (e.g. the all-ones column)."""
    slack = cfg.ACCEPT_RTOL
    min_pass = sigma_min_sq >= thr_min - slack * max(abs(thr_min), 1.0)
    tail_pass = tail_op_sq <= thr_tail + slack * max(abs(thr_tail), 1.0)
    return {
        "threshold_min_sv_sq": thr_min,
        "threshold_tail_op_sq": thr_tail,
        "min_sv_pass": bool(min_pass),
        "tail_pass": bool(tail_pass),
        "min_sv_vacuous": bool(thr_min <= 0),
        "cond_pass": bool(min_pass and tail_pass),
    }


def error_quotient(sigma_m1: float, sigma_min_sq: float, tail_op_sq: float) -> float:
    """sigma_{m+1} + ||Phi_tail D|| / sigma_min(Phi_m), the quantity the bounds majorize."""
    if sigma_min_sq <= 0:
        return math.inf
    return sigma_m1 + math.sqrt(max(tail_op_sq, 0.0) / sigma_min_sq)


# ---------------------------------------------------------------------------
# Theorem bounds
# ---------------------------------------------------------------------------

def _first_m_contains_zero(J: IndexSet, m: int) -> bool:
    return bool(np.any(np.all(J.vectors[:m] == 0, axis=1)))


def general_thresholds(n: int, m: int, eps: float, ts: TailSums, c_eps: DivisorConstant) -> Tuple[float, float]:
    """
    (n - sqrt(6 C n^{1+eps} m max_{i<=m} ||h_i||^eps),
     sum_{i>m} sigma_i^2 + sqrt(6 C n^{1+eps} sum_{i>m} sigma_i^4 ||h_i||^eps)), remainders included.
    """
    C = c_eps.value
    thr_min = n - math.sqrt(6.0 * C * n ** (1.0 + eps) * m * float(ts.hinf_max_m) ** eps)
    thr_tail = ts.total2 + math.sqrt(6.0 * C * n ** (1.0 + eps) * ts.total4h)
    return thr_min, thr_tail


def theorem_bound_general(n: int, m: int, eps: float, space: SurrogateSpace, c_eps: DivisorConstant) -> BoundResult:
    """sigma_{m+1} + sqrt(threshold_tail) / sqrt(threshold_min); infeasible when threshold_min <= 0."""
    _check_eps(eps)
    if m > n:
        raise DomainError("theorem bound needs m <= n, got n={} m={}".format(n, m))
    ts = tail_sums(space.seq, m, eps, 1.0, space.J)
    thr_min, thr_tail = general_thresholds(n, m, eps, ts, c_eps)
    details = {"threshold_min_sv_sq": thr_min, "threshold_tail_op_sq": thr_tail, "sigma_m1": ts.sigma_m1}
    if not _first_m_contains_zero(space.J, m):
        return BoundResult(math.inf, False, "0 is not among the first m indices", details)
    if thr_min <= 0:
        return BoundResult(math.inf, False, "denominator radicand is not positive", details)
    return BoundResult(ts.sigma_m1 + math.sqrt(thr_tail) / math.sqrt(thr_min), True, "", details)


def mbound_holds(n: int, m: int, eps: float, C1: float, r: float, c_eps: DivisorConstant) -> bool:
    """n^{1-eps} >= 24 C_eps C1^eps m^{1 + r eps}."""
    return n ** (1.0 - eps) >= 24.0 * c_eps.value * C1 ** eps * m ** (1.0 + r * eps)


def theorem_bound_regular(
    n: int, m: int, eps: float, C1: float, r: float, space: SurrogateSpace, c_eps: DivisorConstant
) -> BoundResult:
    """
    sigma_{m+1} + sqrt((2/n) sum sigma_i^2 + sqrt(24 C C1^eps n^{eps-1} sum i^{r eps} sigma_i^4)).
    details["m_only"] holds the weaker form with 1/m and 1/m^{1+r eps} in place of the n factors.
    """
    _check_eps(eps)
    ts = tail_sums(space.seq, m, eps, r, space.J)
    C = c_eps.value
    value = ts.sigma_m1 + math.sqrt(
        2.0 / n * ts.total2 + math.sqrt(24.0 * C * C1 ** eps * n ** (eps - 1.0) * ts.total4w)
    )
    m_only = ts.sigma_m1 + math.sqrt(ts.total2 / m + math.sqrt(ts.total4w / m ** (1.0 + r * eps)))
    details = {"m_only": m_only, "sigma_m1": ts.sigma_m1}
    if not hinf_bound_holds(space.J, C1, r):
        return BoundResult(value, False, "||h_i||_inf <= C1 i^r fails", details)
    if not mbound_holds(n, m, eps, C1, r, c_eps):
        return BoundResult(value, False, "n^(1-eps) >= 24 C C1^eps m^(1+r eps) fails", details)
    if not _first_m_contains_zero(space.J, m):
        return BoundResult(value, False, "0 is not among the first m indices", details)
    return BoundResult(value, True, "", details)


def first_n_bound_holds(N: int, n: int, index_set: IndexSet, m: int) -> bool:
    """N > 4 n ||h_i||_inf for all i <= m."""
    if m == 0:
        return True
    return bool(N > 4 * n * int(index_set.hinf()[:m].max()))


def rational_theorem_bound(
    n: int, m: int, eps: float, C1: float, r: float, N: int, space: SurrogateSpace, c_eps: DivisorConstant
) -> BoundResult:
    """
    sigma_{m+1} + sqrt(2 Z + (2/n) S2 + sqrt(24 C C1^eps n^{eps-1} S4w + (24/n) S2 W)) where
    Z sums sigma_i^2 over i > m with h_i = 0 mod N and W over i > m with 2 n ||h_i||_inf > N;
    contributions from outside J enter Z and W through the sigma^2 remainder.
    """
    _check_eps(eps)
    if not is_prime(N):
        raise PreconditionError("modulus N must be prime, got {}".format(N))
    J = space.J
    ts = tail_sums(space.seq, m, eps, r, J)
    tail_vec = J.vectors[m:]
    tail_sig2 = J.sigmas[m:] ** 2
    zero_mod = np.all(tail_vec % N == 0, axis=1) if tail_vec.size else np.zeros(0, dtype=bool)
    wide = 2 * n * J.hinf()[m:] > N
    Z = float(np.sum(tail_sig2[zero_mod])) + ts.remainder2
    W = float(np.sum(tail_sig2[wide])) + ts.remainder2
    C = c_eps.value
    inner = 24.0 * C * C1 ** eps * n ** (eps - 1.0) * ts.total4w + 24.0 / n * ts.total2 * W
    value = ts.sigma_m1 + math.sqrt(2.0 * Z + 2.0 / n * ts.total2 + math.sqrt(inner))
    details = {"aliased_sum": Z, "wide_sum": W, "sigma_m1": ts.sigma_m1}
    if not first_n_bound_holds(N, n, J, m):
        return BoundResult(value, False, "N > 4 n ||h_i||_inf fails for some i <= m", details)
    if not hinf_bound_holds(J, C1, r):
        return BoundResult(value, False, "||h_i||_inf <= C1 i^r fails", details)
    if not mbound_holds(n, m, eps, C1, r, c_eps):
        return BoundResult(value, False, "n^(1-eps) >= 24 C C1^eps m^(1+r eps) fails", details)
    if not _first_m_contains_zero(J, m):
        return BoundResult(value, False, "0 is not among the first m indices", details)
    return BoundResult(value, True, "", details)


def reference_rate_bound(m: int, space: SurrogateSpace) -> float:
    """sigma_{m+1} + sqrt((1/m) sum_{i>m} sigma_i^2), the benchmark rate for unstructured optimal points."""
    ts = tail_sums(space.seq, m, 1.0, 0.0, space.J)
    return ts.sigma_m1 + math.sqrt(ts.total2 / m)


# ---------------------------------------------------------------------------
# Korobov corollaries
# ---------------------------------------------------------------------------

def korobov_bound(
    n: int, eps: float, lam: float, params: KorobovParams, c_eps: DivisorConstant, tol: Optional[float] = None
) -> KorobovBound:
    """
    M = (n^{1-eps} / (24 C))^{lambda/(1+eps)} mu^{-lambda}, m = |A(M)|, feasible iff
    m^lambda mu^{-lambda} > 1/gamma_emptyset; bound = 3 (24 C mu n^{-(1-eps)/(1+eps)})^lambda.
    sharp_bound carries the intermediate constant 3 (24 C)^{(lambda - eps lambda/(4 alpha) + eps/4)/(1+eps)}.
    """
    _check_eps(eps)
    mu_val = mu(lam, params, tol)
    C = c_eps.value
    M = (n ** (1.0 - eps) / (24.0 * C)) ** (lam / (1.0 + eps)) * mu_val ** (-lam)
    m = enumerate_cross(params, M).m
    rate = n ** (-(1.0 - eps) / (1.0 + eps))
    bound = 3.0 * (24.0 * C * mu_val * rate) ** lam
    sharp_exp = (lam - eps * lam / (4.0 * params.alpha) + eps / 4.0) / (1.0 + eps)
    sharp = 3.0 * (24.0 * C) ** sharp_exp * rate ** lam * mu_val ** lam
    feasible = m > 0 and m ** lam * mu_val ** (-lam) > 1.0 / params.gamma_empty
    reason = "" if feasible else "n too small: |A(M)|^lambda mu^-lambda <= 1/gamma_emptyset"
    return KorobovBound(M=M, m=m, bound=bound, feasible=feasible, lam=lam, mu=mu_val, sharp_bound=sharp, reason=reason)


def korobov_modulus(n: int, alpha: float, lam: float) -> int:
    """Smallest prime N >= 2 n^{2 + 1/(2 alpha - alpha/lambda)}."""
    return next_prime_at_least(2.0 * n ** (2.0 + 1.0 / (2.0 * alpha - alpha / lam)))


def korobov_rational_bound(
    n: int, eps: float, lam: float, params: KorobovParams, c_eps: DivisorConstant, tol: Optional[float] = None
) -> KorobovBound:
    """As korobov_bound with the constant 4 and the prime modulus N attached."""
    cont = korobov_bound(n, eps, lam, params, c_eps, tol)
    return KorobovBound(
        M=cont.M,
        m=cont.m,
        bound=cont.bound * 4.0 / 3.0,
        feasible=cont.feasible,
        lam=lam,
        mu=cont.mu,
        sharp_bound=cont.sharp_bound * 4.0 / 3.0,
        N=korobov_modulus(n, params.alpha, lam),
        reason=cont.reason,
    )


def sobolev_rate_prediction(alpha: float, beta: float, r: float, eps: float) -> float:
    """Predicted decay exponent alpha (1-eps)/(1+r eps); the log power beta is reported separately."""
    if not alpha > 0.5:
        raise DomainError("alpha must exceed 1/2, got {}".format(alpha))
    _check_eps(eps)
    return alpha * (1.0 - eps) / (1.0 + r * eps)


def sobolev_rational_modulus(n: int, m: int, alpha: float, r: float) -> int:
    """Smallest prime N > 4 n m^{2 alpha r/(2 alpha - 1)}."""
    x = 4.0 * n * m ** (2.0 * alpha * r / (2.0 * alpha - 1.0))
    return next_prime_at_least(math.floor(x) + 1)


def choose_m(
    n: int, eps: float, C1: float = 1.0, r: float = 1.0, c_eps: Optional[DivisorConstant] = None,
    rule: Optional[str] = None, scale: Optional[float] = None,
) -> int:
    """
    "mbound":  m = floor(n^{(1-eps)/(1+r eps)} / (24 C C1^eps)^{1/(1+r eps)})
    "scaling": m = floor(scale * n^{(1-eps)/(1+r eps)})
    Clamped to 1 <= m <= n.
    """
    if rule is None:
        rule = cfg.M_RULE
    if scale is None:
        scale = cfg.M_SCALE
    _check_eps(eps)
    expo = (1.0 - eps) / (1.0 + r * eps)
    if rule == "mbound":
        if c_eps is None:
            c_eps = c_epsilon(eps, max(n, 1))
        raw = n ** expo / (24.0 * c_eps.value * C1 ** eps) ** (1.0 / (1.0 + r * eps))
    elif rule == "scaling":
        raw = scale * n ** expo
    else:
        raise DomainError("unknown m rule '{}'".format(rule))
    return int(min(n, max(1, math.floor(raw + 1e-12))))
