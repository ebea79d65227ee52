"""
Experiment orchestration for the CLI commands: cross, nodes, approx, wce, bound, search, convergence, verify.

Each cmd_* takes an ExperimentConfig and returns a CommandOutput (a table and/or a JSON summary).
Grid points run in a worker pool; rows come back in grid order. Logs go to stderr only, so a fixed
config and seed give byte-identical artifacts.
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd
from scipy.stats import norm

from . import config as cfg
from .errors import ConfigError, GensetsError
from .error_analysis import (
    SurrogateSpace,
    c_epsilon,
    choose_m,
    divisor_sum,
    first_n_bound_holds,
    korobov_bound,
    korobov_modulus,
    korobov_rational_bound,
    rational_theorem_bound,
    reference_rate_bound,
    sobolev_rate_prediction,
    sobolev_rational_modulus,
    theorem_bound_general,
    theorem_bound_regular,
    worst_case_error_exact,
)
from .experiment_config import ExperimentConfig
from .fourier_ls import FourierPolynomial, approximate, l2_error, lattice_character_sums
from .generator_search import AcceptanceCriteria, search_continuous, search_rational
from .korobov_core import (
    IndexSet,
    SigmaSequence,
    cross_cardinality_bound,
    enumerate_cross,
    take_first_m,
    unweighted_cross_cardinality,
    KorobovParams,
)
from .logging_system import log_check_result, log_grid_point, log_info, log_run_done, log_run_start
from .pointsets import (
    ContinuousGenerator,
    RationalGenerator,
    build_nodes,
    group_closed,
    is_rank1_lattice,
)
from .primes import next_prime_at_least
from .probabilistic_checks import (
    WeightedSystem,
    chebyshev_exceedance,
    exhaustive_rational_moments,
    expected_A_star_t,
    expected_A_t,
    expected_rational_A_star_t,
    mc_samples,
    summarize,
    variance_bound_A,
    variance_bound_A_star,
    variance_maximum,
)

WCE_COLUMNS = [
    "n", "m", "eps", "lambda", "M", "N", "wce_surrogate", "wce_upper", "sigma_m1",
    "bound", "feasible", "sigma_min_sq", "tail_op_sq", "cond_pass",
]
CONVERGENCE_COLUMNS = WCE_COLUMNS + ["korobov_bound", "slope"]
BOUND_COLUMNS = [
    "n", "m", "eps", "lambda", "M", "N", "general", "general_feasible", "regular", "regular_m_only",
    "regular_feasible", "rational", "rational_feasible", "korobov", "korobov_sharp", "korobov_m",
    "korobov_feasible", "korobov_rational", "korobov_rational_N", "reference", "feasible",
]
CHECK_KEYS = ["lemma", "part", "params", "closed_form", "estimate", "std_error", "bound", "pass"]
REPRESENTER_POINT = 0.25


@dataclass
class CommandOutput:
    """frame: tabular artifact (CSV rows); summary: JSON fields; feasible_any drives exit code 3."""

    frame: Optional[pd.DataFrame] = None
    summary: Dict[str, Any] = field(default_factory=dict)
    feasible_any: bool = True


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _clean(value):
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def render(out: CommandOutput, fmt: str) -> str:
    """CSV (17 significant digits, '\\n' endings) when a table exists and fmt == 'csv', JSON otherwise."""
    if fmt == "csv" and out.frame is not None:
        return out.frame.to_csv(index=False, float_format=cfg.CSV_FLOAT_FORMAT, lineterminator=cfg.CSV_LINE_TERMINATOR)
    data = dict(out.summary)
    if out.frame is not None:
        data["rows"] = out.frame.to_dict(orient="records")
    return json.dumps(_clean(data), indent=2) + "\n"


# ---------------------------------------------------------------------------
# Shared pieces
# ---------------------------------------------------------------------------

def _point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence(int(seed), spawn_key=(index,)).generate_state(1, dtype=np.uint64)[0])


def _run_grid(items: List[Any], fn: Callable[[int, Any], Dict[str, Any]], max_workers: int) -> List[Dict[str, Any]]:
    rows: List[Optional[Dict[str, Any]]] = [None] * len(items)
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = {executor.submit(fn, i, item): i for i, item in enumerate(items)}
        for future in as_completed(futures):
            rows[futures[future]] = future.result()
    return rows


def choose_m_for(conf: ExperimentConfig, n: int, c_eps) -> int:
    if conf.m is not None:
        return min(conf.m, n)
    return choose_m(n, conf.eps, conf.C1, conf.r, c_eps, conf.m_rule, conf.m_scale)


def surrogate_for(conf: ExperimentConfig, seq: SigmaSequence, m: int) -> SurrogateSpace:
    """J = cross(j_radius or j_radius_mult * r(h_m)), cut to its first j_index_cap indices."""
    first = take_first_m(seq, m)
    radius = conf.j_radius if conf.j_radius is not None else conf.j_radius_mult / float(first.sigmas[-1])
    cross = enumerate_cross(seq.params, radius)
    if cross.m < m:
        cross = first
    cap = max(conf.j_index_cap, m)
    if cross.m > cap:
        cross = IndexSet(cross.vectors[:cap], cross.sigmas[:cap], 1.0 / float(cross.sigmas[cap]))
    return SurrogateSpace.build(seq, cross)


def make_test_function(kind: str, J: IndexSet, seed: int) -> FourierPolynomial:
    """
    representer: f_h = sigma_h^2 exp(-2 pi i h . x0) at x0 = (0.25, ..., 0.25), scaled to unit H_sigma norm.
    random:      f_h = sigma_h g_h / ||g|| with seeded complex normal g (unit H_sigma norm).
    zero:        f = 0.
    """
    if kind == "zero":
        return FourierPolynomial(J, np.zeros(J.m, dtype=complex))
    if kind == "representer":
        x0 = np.full(J.d, REPRESENTER_POINT)
        coeffs = J.sigmas ** 2 * np.exp(-2j * np.pi * (J.vectors.astype(float) @ x0))
    else:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
        g = rng.standard_normal(J.m) + 1j * rng.standard_normal(J.m)
        coeffs = J.sigmas * g
    poly = FourierPolynomial(J, coeffs)
    norm = poly.hsigma_norm()
    return FourierPolynomial(J, coeffs / norm) if norm > 0 else poly


def configured_generator(conf: ExperimentConfig):
    """The generator named in the config, or None."""
    if conf.z is not None:
        if conf.N is None:
            raise ConfigError("a rational generator needs N", field="N")
        try:
            return RationalGenerator(conf.z, conf.N)
        except GensetsError as e:
            raise ConfigError(str(e), field="z")
    if conf.zeta is not None:
        try:
            return ContinuousGenerator(conf.zeta)
        except GensetsError as e:
            raise ConfigError(str(e), field="zeta")
    return None


def rational_modulus_for(conf: ExperimentConfig, n: int, m: int, J: IndexSet) -> int:
    """conf.N, else the Korobov modulus, raised to the smallest prime meeting N > 4 n ||h_i|| (i <= m)."""
    if conf.N is not None:
        return conf.N
    N = korobov_modulus(n, conf.alpha, conf.lam_value())
    if not first_n_bound_holds(N, n, J, m):
        N = next_prime_at_least(4 * n * int(J.hinf()[:m].max()) + 1)
    return N


def _search(conf: ExperimentConfig, n: int, m: int, space: SurrogateSpace, c_eps, seed: int):
    criteria = AcceptanceCriteria.build(n, m, conf.eps, space, c_eps)
    if conf.rational:
        N = rational_modulus_for(conf, n, m, space.J)
        return search_rational(n, N, criteria, space, conf.max_trials, seed, max_workers=conf.workers), criteria
    return search_continuous(n, criteria, space, conf.max_trials, seed, max_workers=conf.workers), criteria


def _generator_for(conf: ExperimentConfig, n: int, m: int, space: SurrogateSpace, c_eps, seed: int):
    gen = configured_generator(conf)
    if gen is not None:
        return gen, None
    result, _ = _search(conf, n, m, space, c_eps, seed)
    return result.generator, result


def _wce_row(conf, n, m, space, c_eps, gen) -> Dict[str, Any]:
    criteria = AcceptanceCriteria.build(n, m, conf.eps, space, c_eps)
    nodes = build_nodes(gen, n)
    report = worst_case_error_exact(nodes, m, space, thresholds=(criteria.threshold_min_sv_sq, criteria.threshold_tail_op_sq))
    general = theorem_bound_general(n, m, conf.eps, space, c_eps)
    kb = korobov_bound(n, conf.eps, conf.lam_value(), space.seq.params, c_eps)
    diag = report.condition_diag
    return {
        "n": n,
        "m": m,
        "eps": conf.eps,
        "lambda": conf.lam_value(),
        "M": kb.M,
        "N": int(gen.N) if isinstance(gen, RationalGenerator) else None,
        "wce_surrogate": report.wce_surrogate,
        "wce_upper": report.wce_upper,
        "sigma_m1": report.sigma_m_plus_1,
        "bound": general.value,
        "feasible": bool(general.feasible),
        "sigma_min_sq": diag["sigma_min_sq"],
        "tail_op_sq": diag["tail_op_sq"],
        "cond_pass": bool(diag["cond_pass"]),
        "_nodes": nodes,
        "_korobov": kb,
    }


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_cross(conf: ExperimentConfig) -> CommandOutput:
    """Rows h_1..h_d, sigma of A(M); the summary carries |A(M)| and M^{1/lambda} mu(lambda)."""
    log_run_start("cross", conf.seed)
    params = conf.params()
    cross = enumerate_cross(params, conf.M)
    lam = conf.lam_value()
    bounds = {
        "{:.6g}".format(l): cross_cardinality_bound(params, conf.M, l)
        for l in (0.6 * params.alpha, 0.9 * params.alpha, lam) if 0.5 < l < params.alpha
    }
    summary = {"d": params.d, "alpha": params.alpha, "M": conf.M, "cardinality": cross.m, "cardinality_bounds": bounds}
    log_info("cross cardinality", summary)
    log_run_done("cross", cross.m)
    return CommandOutput(frame=cross.to_frame(), summary=summary)


def cmd_nodes(conf: ExperimentConfig) -> CommandOutput:
    """Node list for the configured generator at n = n_grid[0]."""
    log_run_start("nodes", conf.seed)
    gen = configured_generator(conf)
    if gen is None:
        raise ConfigError("nodes needs 'zeta' or 'z' with 'N'", field="zeta")
    n = conf.n_grid[0]
    nodes = build_nodes(gen, n)
    summary = {"n": n, "d": nodes.d, "type": "rational" if nodes.is_rational else "continuous"}
    if nodes.is_rational:
        summary["N"] = int(gen.N)
        summary["wrapping"] = bool(nodes.wrapping)
        summary["rank1_lattice"] = is_rank1_lattice(nodes)
        if n <= 2000:
            summary["group_closed"] = group_closed(nodes)
    log_run_done("nodes", n)
    return CommandOutput(frame=nodes.to_frame(), summary=summary)


def cmd_approx(conf: ExperimentConfig) -> CommandOutput:
    """LS_m of a shipped test function on J; writes the polynomial with its L2 error and H_sigma norm."""
    log_run_start("approx", conf.seed)
    n = conf.n_grid[0]
    seq = conf.sequence()
    c_eps = c_epsilon(conf.eps, conf.c_eps_range())
    m = choose_m_for(conf, n, c_eps)
    space = surrogate_for(conf, seq, m)
    gen, _ = _generator_for(conf, n, m, space, c_eps, _point_seed(conf.seed, 0))
    nodes = build_nodes(gen, n)
    f = make_test_function(conf.test_function, space.J, conf.seed)
    result = approximate(f, nodes, space.J.head(m))
    summary = {
        "n": n,
        "m": m,
        "test_function": conf.test_function,
        "hsigma_norm": f.hsigma_norm(),
        "l2_error": l2_error(f, result.polynomial),
        "residual_norm": result.residual_norm,
        "sigma_min": result.sigma_min,
        "sigma_max": result.sigma_max,
        "rank_deficient": result.rank_deficient,
    }
    log_run_done("approx", m)
    return CommandOutput(frame=result.polynomial.to_frame(), summary=summary)


def cmd_wce(conf: ExperimentConfig) -> CommandOutput:
    """One WceReport row per n in the grid, plus Phi* Phi diagnostics."""
    log_run_start("wce", conf.seed)
    seq = conf.sequence()
    c_eps = c_epsilon(conf.eps, conf.c_eps_range())

    def point(i, n):
        m = choose_m_for(conf, n, c_eps)
        space = surrogate_for(conf, seq, m)
        gen, _ = _generator_for(conf, n, m, space, c_eps, _point_seed(conf.seed, i))
        row = _wce_row(conf, n, m, space, c_eps, gen)
        gram = lattice_character_sums(row.pop("_nodes"), space.J.head(m))
        row.pop("_korobov")
        row["gram_offdiag_max"] = float(np.max(np.abs(gram - np.diag(np.diag(gram))))) if m > 1 else 0.0
        log_grid_point("wce", {"n": n, "m": m}, row["feasible"])
        return row

    rows = _run_grid(conf.n_grid, point, conf.workers)
    frame = pd.DataFrame(rows, columns=WCE_COLUMNS + ["gram_offdiag_max"])
    log_run_done("wce", len(rows))
    return CommandOutput(frame=frame, summary={"command": "wce"}, feasible_any=any(r["feasible"] for r in rows))


def cmd_bound(conf: ExperimentConfig) -> CommandOutput:
    """Every bound over the n-grid; `feasible` follows the regular form (the m-bound condition)."""
    log_run_start("bound", conf.seed)
    seq = conf.sequence()
    params = seq.params
    lam = conf.lam_value()
    c_eps = c_epsilon(conf.eps, conf.c_eps_range())

    def point(i, n):
        m = choose_m_for(conf, n, c_eps)
        space = surrogate_for(conf, seq, m)
        general = theorem_bound_general(n, m, conf.eps, space, c_eps)
        regular = theorem_bound_regular(n, m, conf.eps, conf.C1, conf.r, space, c_eps)
        N = conf.N if conf.N is not None else sobolev_rational_modulus(n, m, conf.alpha, conf.r)
        rational = rational_theorem_bound(n, m, conf.eps, conf.C1, conf.r, N, space, c_eps)
        kb = korobov_bound(n, conf.eps, lam, params, c_eps)
        kr = korobov_rational_bound(n, conf.eps, lam, params, c_eps)
        row = {
            "n": n, "m": m, "eps": conf.eps, "lambda": lam, "M": kb.M, "N": N,
            "general": general.value, "general_feasible": general.feasible,
            "regular": regular.value, "regular_m_only": regular.details["m_only"],
            "regular_feasible": regular.feasible,
            "rational": rational.value, "rational_feasible": rational.feasible,
            "korobov": kb.bound, "korobov_sharp": kb.sharp_bound, "korobov_m": kb.m,
            "korobov_feasible": kb.feasible,
            "korobov_rational": kr.bound, "korobov_rational_N": kr.N,
            "reference": reference_rate_bound(m, space),
            "feasible": regular.feasible,
        }
        log_grid_point("bound", {"n": n, "m": m}, row["feasible"])
        return row

    rows = _run_grid(conf.n_grid, point, conf.workers)
    frame = pd.DataFrame(rows, columns=BOUND_COLUMNS)
    log_run_done("bound", len(rows))
    return CommandOutput(frame=frame, summary={"command": "bound"}, feasible_any=any(r["feasible"] for r in rows))


def cmd_search(conf: ExperimentConfig) -> CommandOutput:
    """Search at n = n_grid[0]; reports the result, wce, and the matching theorem/Korobov bounds."""
    log_run_start("search", conf.seed)
    n = conf.n_grid[0]
    seq = conf.sequence()
    c_eps = c_epsilon(conf.eps, conf.c_eps_range())
    m = choose_m_for(conf, n, c_eps)
    space = surrogate_for(conf, seq, m)
    result, criteria = _search(conf, n, m, space, c_eps, _point_seed(conf.seed, 0))
    lam = conf.lam_value()
    kb = korobov_bound(n, conf.eps, lam, seq.params, c_eps)
    kr = korobov_rational_bound(n, conf.eps, lam, seq.params, c_eps)
    if conf.rational:
        theorem = rational_theorem_bound(n, m, conf.eps, conf.C1, conf.r, int(result.generator.N), space, c_eps)
    else:
        theorem = theorem_bound_general(n, m, conf.eps, space, c_eps)
    summary = {
        "n": n,
        "m": m,
        "eps": conf.eps,
        "lambda": lam,
        "search": result.to_dict(),
        "wce_upper": result.diagnostics["wce_upper"],
        "threshold_min_sv_sq": criteria.threshold_min_sv_sq,
        "threshold_tail_op_sq": criteria.threshold_tail_op_sq,
        "theorem_bound": theorem.value,
        "theorem_feasible": theorem.feasible,
        "korobov_bound": kb.bound,
        "korobov_rational_bound": kr.bound,
        "korobov_rational_N": kr.N,
    }
    log_run_done("search", 1)
    return CommandOutput(frame=None, summary=summary, feasible_any=result.accepted)


def _slope(ns: List[int], values: List[float]) -> float:
    pts = [(math.log(n), math.log(v)) for n, v in zip(ns, values) if v is not None and v > 0 and math.isfinite(v)]
    if len(pts) < 2:
        return float("nan")
    x, y = zip(*pts)
    return float(np.polyfit(np.array(x), np.array(y), 1)[0])


def cmd_convergence(conf: ExperimentConfig) -> CommandOutput:
    """
    Per n: choose m, search a generator, measure wce and tabulate the bounds. `slope` is the
    least-squares slope of log(wce_surrogate) against log(n) over the rows so far.
    """
    log_run_start("convergence", conf.seed)
    seq = conf.sequence()
    c_eps = c_epsilon(conf.eps, conf.c_eps_range())

    def point(i, n):
        try:
            m = choose_m_for(conf, n, c_eps)
            space = surrogate_for(conf, seq, m)
            gen, result = _generator_for(conf, n, m, space, c_eps, _point_seed(conf.seed, i))
            row = _wce_row(conf, n, m, space, c_eps, gen)
            row.pop("_nodes")
            row["korobov_bound"] = row.pop("_korobov").bound
            if result is not None:
                row["feasible"] = bool(result.accepted)
        except GensetsError as e:
            row = {"n": n, "feasible": False}
            log_info("convergence point failed", {"n": n, "error": str(e)})
        log_grid_point("convergence", {"n": n, "m": row.get("m")}, row["feasible"])
        return row

    rows = _run_grid(conf.n_grid, point, conf.workers)
    for i, row in enumerate(rows):
        row["slope"] = _slope(
            [r["n"] for r in rows[: i + 1]],
            [r.get("wce_surrogate") for r in rows[: i + 1]],
        )
    frame = pd.DataFrame(rows, columns=CONVERGENCE_COLUMNS)
    r = conf.r
    summary = {
        "command": "convergence",
        "predicted_slope": -sobolev_rate_prediction(conf.alpha, 0.0, r, conf.eps),
        "fitted_slope": rows[-1]["slope"],
    }
    log_run_done("convergence", len(rows))
    return CommandOutput(frame=frame, summary=summary, feasible_any=any(r["feasible"] for r in rows))


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

def _check(lemma, part, params, closed_form, estimate, std_error, bound, passed) -> Dict[str, Any]:
    entry = dict(zip(CHECK_KEYS, [lemma, part, params, closed_form, estimate, std_error, bound, bool(passed)]))
    log_check_result("{} {}".format(lemma, part), bool(passed), {"closed_form": closed_form, "estimate": estimate})
    return entry


def _unit(rng: np.random.Generator, size: int) -> np.ndarray:
    t = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return t / np.linalg.norm(t)


def _verify_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(stream,))))


def _family_band(band: float, count: int) -> float:
    """Per-comparison band keeping the family-wise miss rate of `count` checks at that of one check at `band`."""
    return float(norm.isf(norm.sf(band) / max(count, 1)))


def box_scan_cross(params: KorobovParams, M: float) -> set:
    """Brute-force A(M): every h in the box |h_j| <= (M max gamma)^{1/alpha}, kept when r(h) <= M."""
    r_limit = M * params.gamma_max
    if r_limit < 1:
        return set()
    B = int(math.floor(r_limit ** (1.0 / params.alpha)))
    axis = np.arange(-B, B + 1, dtype=np.int64)
    grid = np.stack(np.meshgrid(*([axis] * params.d), indexing="ij"), axis=-1).reshape(-1, params.d)
    nz = grid != 0
    mask = (nz * (1 << np.arange(params.d))).sum(axis=1)
    prod = np.where(nz, np.abs(grid), 1).prod(axis=1)
    r = prod.astype(float) ** params.alpha / np.asarray(params.weights)[mask]
    return {tuple(int(x) for x in row) for row in grid[r <= M]}


def random_cross_instance(rng: np.random.Generator) -> KorobovParams:
    """d <= 3, alpha in [1, 2.5]; product weights or general subset weights with gamma_emptyset = 1."""
    d = int(rng.integers(1, 4))
    alpha = float(rng.uniform(1.0, 2.5))
    if rng.random() < 0.5:
        return KorobovParams.product(d, alpha, rng.uniform(0.2, 1.0, size=d).tolist())
    weights = [1.0] + rng.uniform(0.2, 1.0, size=(1 << d) - 1).tolist()
    return KorobovParams(d=d, alpha=alpha, weights=tuple(weights))


def random_system(rng: np.random.Generator) -> WeightedSystem:
    """1-4 distinct nonzero frequencies in [-5, 5]^d (d <= 2), n in 2..6, decreasing weights."""
    d = int(rng.integers(1, 3))
    size = int(rng.integers(1, 5))
    n = int(rng.integers(2, 7))
    a = np.sort(rng.uniform(0.1, 1.0, size=size))[::-1]
    keys: List[tuple] = []
    while len(keys) < size:
        h = tuple(int(x) for x in rng.integers(-5, 6, size=d))
        if any(h) and h not in keys:
            keys.append(h)
    return WeightedSystem(a, np.array(keys, dtype=np.int64), n)


def _moment_checks(s: int, system: WeightedSystem, conf: ExperimentConfig, rng, tamper, band: float) -> List[Dict[str, Any]]:
    """Mean, variance and Chebyshev checks for both quadratic forms of one system."""
    out = []
    forms = (
        ("A_star", system.n, expected_A_star_t, variance_bound_A_star),
        ("A", system.size, expected_A_t, variance_bound_A),
    )
    for offset, (which, length, expected, variance_bound) in enumerate(forms, start=1):
        t = _unit(rng, length)
        samples = mc_samples(system, t, conf.trials, _point_seed(conf.seed, 2 * s + offset), which, conf.workers)
        est = summarize(samples)
        params = {"system": s, "n": system.n, "size": system.size, "d": system.d, "trials": conf.trials}
        closed = tamper("{}_mean".format(which), expected(system, t))
        out.append(_check("sampling_lemma", "{}_mean".format(which), params, closed, est.mean, est.std_error, None,
                          abs(est.mean - closed) <= band * est.std_error))
        for eps in (0.5, 1.0):
            bound = variance_bound(system, eps, c_epsilon(eps, system.n))
            out.append(_check("sampling_lemma", "{}_variance".format(which), dict(params, eps=eps), None, est.variance, None,
                              bound, est.variance <= bound))
        bound = variance_bound(system, 0.5, c_epsilon(0.5, system.n))
        frac = chebyshev_exceedance(samples, closed, bound)
        out.append(_check("sampling_lemma", "{}_chebyshev".format(which), dict(params, eps=0.5), 1.0 / 3.0, frac, None,
                          1.0 / 3.0 + 0.05, frac <= 1.0 / 3.0 + 0.05))
    return out


def cmd_verify(conf: ExperimentConfig, tamper: Optional[Callable[[str, float], float]] = None) -> CommandOutput:
    """
    Runs the divisor and cross oracles, the moment checks for both sampling lemmas on a fixed system
    plus VERIFY_SYSTEMS random ones, and the exhaustive rational checks.
    tamper(name, value) may rewrite a closed form before comparison (negative control).
    """
    log_run_start("verify", conf.seed)
    if tamper is None:
        tamper = lambda name, value: value  # noqa: E731
    checks = []

    # divisor oracle
    brute_ok = all(
        divisor_sum(n) == sum(1 for i in range(-n, n + 1) if i != 0 and n % i == 0) for n in range(1, 301)
    )
    checks.append(_check("divisor_bound", "divisor_sum", {"n_max": 300}, None, None, None, None, brute_ok))
    counts = np.array([divisor_sum(n) for n in range(1, 10_001)], dtype=float)
    for eps in (0.25, 0.5, 1.0):
        ce = c_epsilon(eps, 10_000)
        ok = bool(np.all(counts <= ce.value * np.arange(1, 10_001, dtype=float) ** eps * (1 + 1e-12)))
        checks.append(_check("divisor_bound", "c_epsilon", {"eps": eps, "n_max": 10_000}, ce.value, None, None, None, ok))

    # unweighted cross oracle
    for d in (1, 2, 3):
        params = KorobovParams.unweighted(d, 1.0)
        for M, expected in ((0.5, 0), (1.0, 3 ** d), (1.9, 3 ** d)):
            got = enumerate_cross(params, M).m
            closed = tamper("cross_d{}_M{}".format(d, M), float(expected))
            ok = got == closed and unweighted_cross_cardinality(d, M) == got
            checks.append(_check("hyperbolic_cross", "cardinality", {"d": d, "M": M}, closed, got, None, None, ok))

    # weighted cross oracle and the alternative cardinality bound
    cross_rng = _verify_rng(conf.seed, 997)
    for k in range(cfg.VERIFY_CROSS_INSTANCES):
        params = random_cross_instance(cross_rng)
        M = float(cross_rng.uniform(1.0, 30.0))
        cross = enumerate_cross(params, M)
        info = {"instance": k, "d": params.d, "alpha": params.alpha, "M": M}
        checks.append(_check("hyperbolic_cross", "box_scan", info, None, cross.m, None, None,
                             set(cross.keys()) == box_scan_cross(params, M)))
        for frac in (0.6, 0.9):
            lam = frac * params.alpha
            bound = cross_cardinality_bound(params, M, lam)
            checks.append(_check("hyperbolic_cross", "cardinality_bound", dict(info, lam=lam), None, cross.m, None, bound,
                                 cross.m <= bound))

    # continuous lemma on a fixed system and random ones
    rng = _verify_rng(conf.seed, 999)
    systems = [WeightedSystem.from_pairs([(1.0, [1]), (0.5, [2])], n=3)]
    systems += [random_system(rng) for _ in range(cfg.VERIFY_SYSTEMS)]
    band = _family_band(cfg.STD_ERROR_BAND, 2 * len(systems))
    for s, system in enumerate(systems):
        checks.extend(_moment_checks(s, system, conf, rng, tamper, band))

    # rational lemma, exhaustive
    rsys = WeightedSystem.from_pairs([(1.0, [1]), (0.7, [-2])], n=3)
    tr = np.array([0.6, 0.8])
    mean, _ = exhaustive_rational_moments(rsys, tr, 31, "A")
    closed = tamper("rational_A_mean", expected_A_t(rsys, tr))
    checks.append(_check("rational_lemma", "A_mean", {"N": 31, "n": 3}, closed, mean, 0.0, None, abs(mean - closed) <= 1e-12 * max(1.0, closed)))
    ts = _unit(rng, rsys.n)
    mean, _ = exhaustive_rational_moments(rsys, ts, 31, "A_star")
    closed = tamper("rational_A_star_mean", expected_rational_A_star_t(rsys, ts, 31))
    checks.append(_check("rational_lemma", "A_star_mean", {"N": 31, "n": 3}, closed, mean, 0.0, None, abs(mean - closed) <= 1e-12 * max(1.0, closed)))

    # variance maximum is reached on nonnegative real t
    for which, length in (("A_star", rsys.n), ("A", rsys.size)):
        candidates = [_unit(rng, length) for _ in range(6)]
        best, best_real = variance_maximum(rsys, candidates, 31, which)
        checks.append(_check("rational_lemma", "{}_real_maximizer".format(which), {"N": 31, "candidates": 6}, best, best_real,
                             None, None, best_real >= best * (1 - 1e-12) - 1e-15))

    all_pass = all(c["pass"] for c in checks)
    log_run_done("verify", len(checks))
    return CommandOutput(frame=None, summary={"seed": conf.seed, "all_pass": all_pass, "checks": checks}, feasible_any=True)


COMMANDS = {
    "cross": cmd_cross,
    "nodes": cmd_nodes,
    "approx": cmd_approx,
    "wce": cmd_wce,
    "bound": cmd_bound,
    "search": cmd_search,
    "convergence": cmd_convergence,
    "verify": cmd_verify,
}
