"""
Moments of ||A* t||^2 and ||A t||^2 for A = [a_i exp(2 pi i k h_i . zeta)]_{k<=n, i}: closed-form
expectations, variance bounds, exhaustive averages over rational z in {1..N}^d, and seeded Monte Carlo
over uniform zeta.

Monte Carlo trials are cut into fixed blocks of MC_BLOCK; block b draws from
Philox(SeedSequence(seed, spawn_key=(b,))), so the estimate does not depend on the worker count.
"""

import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import config as cfg
from .errors import DomainError, ResourceCapError, ShapeError
from .error_analysis import DivisorConstant
from .primes import is_prime

WHICH = ("A_star", "A")


@dataclass(frozen=True, eq=False)
class WeightedSystem:
    """Non-increasing weights a_i >= 0 on distinct frequencies h_i, with n rows."""

    a: np.ndarray
    h: np.ndarray
    n: int

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).reshape(-1)
        h = np.asarray(self.h, dtype=np.int64)
        if h.ndim == 1:
            h = h.reshape(-1, 1)
        if h.shape[0] != a.size:
            raise ShapeError("{} weights for {} frequencies".format(a.size, h.shape[0]))
        if np.any(a < 0) or np.any(np.diff(a) > 0):
            raise DomainError("weights must be nonnegative and non-increasing")
        if len({tuple(row) for row in h.tolist()}) != h.shape[0]:
            raise DomainError("frequencies must be distinct")
        if int(self.n) < 1:
            raise DomainError("n must be positive, got {}".format(self.n))
        a.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[float, Sequence[int]]], n: int) -> "WeightedSystem":
        a = [p[0] for p in pairs]
        h = [list(np.atleast_1d(p[1])) for p in pairs]
        return cls(np.array(a), np.array(h, dtype=np.int64), n)

    @property
    def size(self) -> int:
        return int(self.a.size)

    @property
    def d(self) -> int:
        return int(self.h.shape[1])

    def hinf(self) -> np.ndarray:
        return np.abs(self.h).max(axis=1) if self.size else np.zeros(0, dtype=np.int64)

    def nonzero(self) -> np.ndarray:
        return np.any(self.h != 0, axis=1)


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    variance: float
    trials: int
    std_error: float


def _check_which(which: str):
    if which not in WHICH:
        raise DomainError("which must be one of {}, got '{}'".format(WHICH, which))


def _as_t(t, length: int) -> np.ndarray:
    t = np.asarray(t, dtype=complex).reshape(-1)
    if t.size != length:
        raise ShapeError("t has length {}, expected {}".format(t.size, length))
    return t


# ---------------------------------------------------------------------------
# Closed forms and bounds
# ---------------------------------------------------------------------------

def expected_A_star_t(system: WeightedSystem, t) -> float:
    """sum_i a_i^2 sum_{k,l} t_k conj(t_l) 1(k h_i = l h_i): ||t||^2 for h_i != 0, |sum t|^2 for h_i = 0."""
    t = _as_t(t, system.n)
    nz = system.nonzero()
    a2 = system.a ** 2
    return float(np.sum(a2[nz]) * np.vdot(t, t).real + np.sum(a2[~nz]) * abs(np.sum(t)) ** 2)


def expected_A_t(system: WeightedSystem, t) -> float:
    """n sum_i a_i^2 |t_i|^2."""
    t = _as_t(t, system.size)
    return float(system.n * np.sum(system.a ** 2 * np.abs(t) ** 2))


def variance_bound_A_star(system: WeightedSystem, eps: float, c_eps: DivisorConstant) -> float:
    """2 C n^{1+eps} sum_{h_i != 0} a_i^4 ||h_i||_inf^eps (unit t)."""
    if not eps > 0:
        raise DomainError("eps must be positive, got {}".format(eps))
    nz = system.nonzero()
    hinf = system.hinf().astype(float)
    return float(2.0 * c_eps.value * system.n ** (1.0 + eps) * np.sum(system.a[nz] ** 4 * hinf[nz] ** eps))


def variance_bound_A(system: WeightedSystem, eps: float, c_eps: DivisorConstant) -> float:
    """2 C n^{1+eps} max a_i^2 (sum a_i^2 ||h_i||^{2 eps})^{1/2} (sum a_i^2)^{1/2} (unit t)."""
    if not (0.0 < eps <= 1.0):
        raise DomainError("eps must lie in (0, 1], got {}".format(eps))
    a2 = system.a ** 2
    hinf = system.hinf().astype(float)
    return float(
        2.0 * c_eps.value * system.n ** (1.0 + eps) * a2.max()
        * math.sqrt(np.sum(a2 * hinf ** (2.0 * eps))) * math.sqrt(np.sum(a2))
    )


def expected_rational_A_star_t(system: WeightedSystem, t, N: int) -> float:
    """
    Exact E_z ||A* t||^2 over z uniform on {1..N}^d (N prime): h_i = 0 mod N contributes a_i^2 |sum t|^2,
    otherwise a_i^2 sum_c |sum_{k = c mod N} t_k|^2.
    """
    t = _as_t(t, system.n)
    aliased = np.all(system.h % N == 0, axis=1)
    k = np.arange(1, system.n + 1)
    residue_sums = np.bincount(k % N, weights=t.real, minlength=N) + 1j * np.bincount(k % N, weights=t.imag, minlength=N)
    a2 = system.a ** 2
    return float(np.sum(a2[aliased]) * abs(np.sum(t)) ** 2 + np.sum(a2[~aliased]) * np.sum(np.abs(residue_sums) ** 2))


def rational_variance_bound_A_star(system: WeightedSystem, eps: float, c_eps: DivisorConstant, N: int) -> float:
    """
    2 C n^{1+eps} sum_{h_i != 0 mod N} a_i^4 ||h_i||^eps
      + 2 n (sum_{h_i != 0 mod N} a_i^2)(sum_{h_j != 0 mod N, 2 n ||h_j|| >= N} a_j^2).
    """
    live = ~np.all(system.h % N == 0, axis=1)
    hinf = system.hinf().astype(float)
    a2 = system.a ** 2
    wide = live & (2 * system.n * system.hinf() >= N)
    first = 2.0 * c_eps.value * system.n ** (1.0 + eps) * np.sum(a2[live] ** 2 * hinf[live] ** eps)
    return float(first + 2.0 * system.n * np.sum(a2[live]) * np.sum(a2[wide]))


# ---------------------------------------------------------------------------
# Quadratic forms on batches of generators
# ---------------------------------------------------------------------------

def _forms(system: WeightedSystem, t: np.ndarray, phases: np.ndarray, which: str) -> np.ndarray:
    """phases: (B, I) values h_i . zeta mod 1 per generator; returns (B,) squared norms."""
    k = np.arange(1, system.n + 1, dtype=float)
    kp = phases[:, None, :] * k[None, :, None]
    E = np.exp(2j * np.pi * (kp - np.floor(kp))) * system.a[None, None, :]
    if which == "A_star":
        v = np.einsum("bki,k->bi", E.conj(), t)
    else:
        v = np.einsum("bki,i->bk", E, t)
    return np.sum(np.abs(v) ** 2, axis=1)


def _batch_size(system: WeightedSystem) -> int:
    return max(1, min(cfg.MC_BLOCK, 4_000_000 // max(1, system.n * system.size)))


def exhaustive_rational_moments(system: WeightedSystem, t, N: int, which: str) -> Tuple[float, float]:
    """Exact mean and (population) variance over every z in {1..N}^d."""
    _check_which(which)
    if not is_prime(N):
        raise DomainError("N must be prime, got {}".format(N))
    d = system.d
    total = N ** d
    if total > cfg.EXHAUSTIVE_CAP:
        raise ResourceCapError("N^d = {} exceeds the exhaustive cap {}".format(total, cfg.EXHAUSTIVE_CAP))
    t = _as_t(t, system.n if which == "A_star" else system.size)
    values = []
    step = _batch_size(system)
    h_mod = system.h % N
    for start in range(0, total, step):
        idx = np.arange(start, min(start + step, total), dtype=np.int64)
        z = np.stack(np.unravel_index(idx, (N,) * d), axis=1) + 1
        # exact h . z mod N before scaling to [0, 1)
        phases = ((z @ h_mod.T) % N).astype(float) / N
        values.append(_forms(system, t, phases, which))
    vals = np.concatenate(values)
    return float(np.mean(vals)), float(np.var(vals))


def outside_hypothesis(system: WeightedSystem, N: int, which: str) -> bool:
    """Whether N falls below the lemma's range (N > 2n for A*, N > 4 n max||h|| for A)."""
    if which == "A_star":
        return N <= 2 * system.n
    return N <= 4 * system.n * int(system.hinf().max(initial=0))


def _block_values(args) -> Tuple[int, np.ndarray]:
    block, count, seed, system, t, which = args
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))
    zeta = rng.random((count, system.d))
    phases = zeta @ system.h.T.astype(float)
    phases = phases - np.floor(phases)
    out = []
    step = _batch_size(system)
    for a in range(0, count, step):
        out.append(_forms(system, t, phases[a:a + step], which))
    return block, np.concatenate(out) if out else np.zeros(0)


def mc_samples(system: WeightedSystem, t, trials: int, seed: int, which: str, max_workers: Optional[int] = None) -> np.ndarray:
    """Sampled ||A* t||^2 or ||A t||^2 over uniform zeta, in deterministic block order."""
    _check_which(which)
    if max_workers is None:
        max_workers = cfg.WORKERS
    t = _as_t(t, system.n if which == "A_star" else system.size)
    args_list = []
    for block, start in enumerate(range(0, trials, cfg.MC_BLOCK)):
        args_list.append((block, min(cfg.MC_BLOCK, trials - start), int(seed), system, t, which))
    results: List[np.ndarray] = [None] * len(args_list)
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = {executor.submit(_block_values, a): a[0] for a in args_list}
        for future in as_completed(futures):
            block, vals = future.result()
            results[block] = vals
    return np.concatenate(results) if results else np.zeros(0)


def mc_moments(
    system: WeightedSystem, t, trials: Optional[int] = None, seed: int = 0, which: str = "A", max_workers: Optional[int] = None
) -> MomentEstimate:
    """Sample mean and variance of the chosen quadratic form; bitwise reproducible for a fixed seed."""
    if trials is None:
        trials = cfg.MC_DEFAULT_TRIALS
    if trials < cfg.MC_MIN_TRIALS:
        raise DomainError("need at least {} trials, got {}".format(cfg.MC_MIN_TRIALS, trials))
    return summarize(mc_samples(system, t, trials, seed, which, max_workers))


def summarize(values: np.ndarray) -> MomentEstimate:
    """Sample mean, unbiased variance and standard error of the mean."""
    values = np.asarray(values, dtype=float)
    trials = int(values.size)
    if trials < 2:
        raise DomainError("need at least 2 samples, got {}".format(trials))
    var = float(np.var(values, ddof=1))
    return MomentEstimate(mean=float(np.mean(values)), variance=var, trials=trials, std_error=math.sqrt(var / trials))


# ---------------------------------------------------------------------------
# Consequences used by the acceptance proof
# ---------------------------------------------------------------------------

def chebyshev_exceedance(values: np.ndarray, mean: float, variance_bound: float) -> float:
    """Fraction of samples at or above mean + sqrt(3 variance_bound); Chebyshev caps it at 1/3."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise DomainError("no samples")
    cut = mean + math.sqrt(3.0 * max(variance_bound, 0.0))
    return float(np.mean(values >= cut))


def variance_maximum(system: WeightedSystem, candidates: Sequence, N: int, which: str) -> Tuple[float, float]:
    """
    Largest exhaustive variance over the candidate t, and over their entrywise moduli |t|.
    Inside the lemma's range (see outside_hypothesis, and no h_i = 0 mod N for A_star) the second is
    never smaller: the fourth moment has nonnegative coefficients and the mean ignores phases.
    """
    best = best_real = 0.0
    for t in candidates:
        t = np.asarray(t, dtype=complex)
        best = max(best, exhaustive_rational_moments(system, t, N, which)[1])
        best_real = max(best_real, exhaustive_rational_moments(system, np.abs(t), N, which)[1])
    return best, best_real
