"""
Generator search: draw candidate generators, test the two acceptance conditions
(sigma_min(Phi_m)^2 above its threshold, tail operator norm^2 below its threshold) and return the
first accepted candidate, or the best-by-wce one when max_trials runs out.

Trial t draws from Philox(SeedSequence(seed, spawn_key=(t,))). Trials run in worker batches;
the accepted trial with the smallest index wins regardless of completion order.
"""

from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from . import config as cfg
from .errors import DomainError, PreconditionError
from .error_analysis import (
    DivisorConstant,
    SurrogateSpace,
    error_quotient,
    first_n_bound_holds,
    general_thresholds,
    worst_case_error_exact,
)
from .korobov_core import tail_sums
from .logging_system import log_generator_trial, log_search_done
from .pointsets import ContinuousGenerator, Generator, RationalGenerator, build_nodes
from .primes import is_prime


@dataclass(frozen=True)
class AcceptanceCriteria:
    n: int
    m: int
    eps: float
    threshold_min_sv_sq: float
    threshold_tail_op_sq: float

    @classmethod
    def build(cls, n: int, m: int, eps: float, space: SurrogateSpace, c_eps: DivisorConstant) -> "AcceptanceCriteria":
        """Thresholds from the tail sums over J plus their analytic remainders."""
        ts = tail_sums(space.seq, m, eps, 1.0, space.J)
        thr_min, thr_tail = general_thresholds(n, m, eps, ts, c_eps)
        return cls(n=n, m=m, eps=eps, threshold_min_sv_sq=thr_min, threshold_tail_op_sq=thr_tail)

    @property
    def vacuous(self) -> bool:
        """Non-positive min-sv threshold: only full rank is then required."""
        return self.threshold_min_sv_sq <= 0


@dataclass(frozen=True, eq=False)
class SearchResult:
    generator: Generator
    accepted: bool
    diagnostics: Dict[str, Any]
    trials_used: int

    def to_dict(self) -> Dict[str, Any]:
        """{type, zeta|z, N, accepted, trials_used, sigma_min_sq, tail_op_sq, wce_surrogate}."""
        gen = self.generator
        out: Dict[str, Any] = {}
        if isinstance(gen, RationalGenerator):
            out["type"] = "rational"
            out["z"] = [int(x) for x in gen.z]
            out["N"] = int(gen.N)
        else:
            out["type"] = "continuous"
            out["zeta"] = [float(x) for x in gen.zeta]
            out["N"] = None
        out["accepted"] = bool(self.accepted)
        out["trials_used"] = int(self.trials_used)
        out["sigma_min_sq"] = float(self.diagnostics["sigma_min_sq"])
        out["tail_op_sq"] = float(self.diagnostics["tail_op_sq"])
        out["wce_surrogate"] = float(self.diagnostics["wce_surrogate"])
        return out


def accept(generator: Generator, n: int, criteria: AcceptanceCriteria, space: SurrogateSpace, rank_tol: Optional[float] = None) -> SearchResult:
    """
    Build the nodes, measure sigma_min(Phi_m)^2, the tail operator norm^2 on J minus the first m, and
    wce_surrogate. Accepted iff Phi_m has full rank and both thresholds are met.
    """
    if criteria.n != n:
        raise DomainError("criteria were built for n={}, got n={}".format(criteria.n, n))
    nodes = build_nodes(generator, n)
    report = worst_case_error_exact(
        nodes, criteria.m, space, rank_tol,
        thresholds=(criteria.threshold_min_sv_sq, criteria.threshold_tail_op_sq),
    )
    diag = dict(report.condition_diag)
    diag["wce_surrogate"] = report.wce_surrogate
    diag["wce_upper"] = report.wce_upper
    diag["rank_deficient"] = report.rank_deficient
    diag["quotient"] = error_quotient(report.sigma_m_plus_1, diag["sigma_min_sq"], diag["tail_op_sq"])
    accepted = bool(diag["cond_pass"]) and not report.rank_deficient
    return SearchResult(generator=generator, accepted=accepted, diagnostics=diag, trials_used=1)


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(trial,))))


def _run_search(
    kind: str,
    draw: Callable[[np.random.Generator], Generator],
    n: int,
    criteria: AcceptanceCriteria,
    space: SurrogateSpace,
    max_trials: int,
    seed: int,
    rank_tol: Optional[float],
    max_workers: Optional[int],
) -> SearchResult:
    if max_trials < 1:
        raise DomainError("max_trials must be at least 1, got {}".format(max_trials))
    if max_workers is None:
        max_workers = cfg.WORKERS

    def run_trial(trial: int):
        gen = draw(_trial_rng(seed, trial))
        return trial, accept(gen, n, criteria, space, rank_tol)

    seen: List[Optional[SearchResult]] = [None] * max_trials
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        for start in range(0, max_trials, max_workers):
            batch = range(start, min(start + max_workers, max_trials))
            futures = {executor.submit(run_trial, t): t for t in batch}
            for future in as_completed(futures):
                trial, res = future.result()
                seen[trial] = res
            for t in batch:
                log_generator_trial(kind, t, seen[t].accepted, {
                    "sigma_min_sq": seen[t].diagnostics["sigma_min_sq"],
                    "tail_op_sq": seen[t].diagnostics["tail_op_sq"],
                })
            winners = [t for t in batch if seen[t].accepted]
            if winners:
                t = winners[0]
                log_search_done(kind, True, t + 1)
                return SearchResult(seen[t].generator, True, seen[t].diagnostics, t + 1)

    # best by wce, then by trial index
    ranked = sorted(range(max_trials), key=lambda t: (seen[t].diagnostics["wce_surrogate"], t))
    best = seen[ranked[0]]
    log_search_done(kind, False, max_trials)
    return SearchResult(best.generator, False, best.diagnostics, max_trials)


def search_continuous(
    n: int, criteria: AcceptanceCriteria, space: SurrogateSpace, max_trials: Optional[int] = None, seed: int = 0,
    rank_tol: Optional[float] = None, max_workers: Optional[int] = None,
) -> SearchResult:
    """Rejection sampling of zeta uniform on [0, 1)^d."""
    if max_trials is None:
        max_trials = cfg.SEARCH_MAX_TRIALS
    d = space.seq.d

    def draw(rng):
        return ContinuousGenerator(rng.random(d))

    return _run_search("continuous", draw, n, criteria, space, max_trials, seed, rank_tol, max_workers)


def search_rational(
    n: int, N: int, criteria: AcceptanceCriteria, space: SurrogateSpace, max_trials: Optional[int] = None, seed: int = 0,
    rank_tol: Optional[float] = None, max_workers: Optional[int] = None,
) -> SearchResult:
    """Rejection sampling of z uniform on {1..N}^d; N must be prime with N > 4 n ||h_i||_inf for i <= m."""
    if max_trials is None:
        max_trials = cfg.SEARCH_MAX_TRIALS
    if not is_prime(N):
        raise PreconditionError("modulus N must be prime, got {}".format(N))
    if not first_n_bound_holds(N, n, space.J, criteria.m):
        raise PreconditionError("N = {} violates N > 4 n ||h_i||_inf for some i <= {}".format(N, criteria.m))
    d = space.seq.d

    def draw(rng):
        return RationalGenerator(rng.integers(1, N + 1, size=d), N)

    return _run_search("rational", draw, n, criteria, space, max_trials, seed, rank_tol, max_workers)
