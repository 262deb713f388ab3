"""
Monte Carlo experiments over random instances and the worst-case operation counts.
"""
from typing import Dict, Iterable, List, Optional, Sequence, Tuple
import logging
import math
import numpy as np
from app.core.config import settings
from app.core.exceptions import InvalidParameterError, TopologyOptimizerError
from app.schemas.common import build_model
from app.schemas.experiment import CellSummary, ComplexityRow, InstanceSpec, TrialResult
from app.schemas.flow import FlowSet
from app.schemas.optimizer import Algorithm, BoundMode, EnergyBudget, SearchResult
from app.schemas.topology import LabeledTree, TreeTopology
from app.services.optimizer_service import brute_force_oracle, optimize, optimize_bnb, optimize_greedy
from app.services.trie_service import assign_prefix_labels, random_tree

logger = logging.getLogger(__name__)

Instance = Tuple[LabeledTree, FlowSet, EnergyBudget]

# fixed report order, so rows come out the same however algorithms are listed
ALGORITHM_ORDER = [Algorithm.GREEDY, Algorithm.OPTIMAL, Algorithm.ORACLE]
SANDWICH_TOLERANCE = 1e-9


def make_spec(n: int, h_max: int, seed: int, total_flow: Optional[float] = None) -> InstanceSpec:
    if total_flow is None:
        total_flow = settings.DEFAULT_TOTAL_FLOW
    return build_model(InstanceSpec, InvalidParameterError, n=n, h_max=h_max, seed=seed, total_flow=total_flow)


def generate_instance(spec: InstanceSpec) -> Instance:
    """
    Uniform random labeled tree with a uniformly drawn root, flows on every
    ordered pair drawn uniform(0, 1) and scaled to the total, integer hop budgets
    uniform on 0..h_max. Budgets come from one uniform variate per node drawn
    after everything else, so instances for different h_max share tree and flows
    and their budgets are nested.
    """
    rng = np.random.default_rng(spec.seed)
    tree = random_tree(spec.n, rng)
    root = int(rng.integers(0, spec.n))
    tree = tree.reroot(root)

    pairs = [(src, dst) for src in range(spec.n) for dst in range(spec.n) if src != dst]
    weights = rng.uniform(0.0, 1.0, size=len(pairs))
    rates = weights / weights.sum() * spec.total_flow
    flows = FlowSet.create({pair: float(rate) for pair, rate in zip(pairs, rates)})

    draws = rng.uniform(0.0, 1.0, size=spec.n)
    hops = np.minimum(np.floor(draws * (spec.h_max + 1)), spec.h_max).astype(int)
    budgets = EnergyBudget.create({node: int(hops[node]) for node in range(spec.n)})
    return assign_prefix_labels(tree), flows, budgets


def _ordered(algorithms: Iterable[Algorithm]) -> List[Algorithm]:
    chosen = {Algorithm(algorithm) for algorithm in algorithms}
    if not chosen:
        raise InvalidParameterError("At least one algorithm is required")
    return [algorithm for algorithm in ALGORITHM_ORDER if algorithm in chosen]


def _check_counts(trials: int, values: Sequence[int], name: str) -> None:
    if trials < 1:
        raise InvalidParameterError(f"trials must be at least 1, got {trials}")
    if not values:
        raise InvalidParameterError(f"No {name} given")


def _check_sandwich(spec: InstanceSpec, roots: int, results: Dict[Algorithm, float], initial: float) -> None:
    chain = [results.get(Algorithm.OPTIMAL), results.get(Algorithm.GREEDY), initial]
    present = [value for value in chain if value is not None]
    for low, high in zip(present, present[1:]):
        if low > high + SANDWICH_TOLERANCE:
            raise TopologyOptimizerError(
                f"Traffic ordering violated for n={spec.n} h_max={spec.h_max} seed={spec.seed} "
                f"roots={roots}: {chain}"
            )


def _trial(spec: InstanceSpec, algorithm: Algorithm, result: SearchResult, roots: int,
           traffic_final: float, explored: int, pruned: int, elapsed: float) -> TrialResult:
    return TrialResult(
        spec=spec,
        algorithm=algorithm.value,
        roots_considered=roots,
        traffic_initial=result.traffic_initial,
        traffic_final=traffic_final,
        explored=explored,
        pruned=pruned,
        wall_time_ms=elapsed,
    )


def run_sweep(sizes: Sequence[int], h_max_values: Sequence[int], trials: int,
              algorithms: Iterable[Algorithm], seed: int = 0, total_flow: Optional[float] = None,
              optimal_max_n: Optional[int] = None, bound: Optional[BoundMode] = None) -> List[TrialResult]:
    """One row per (n, h_max, trial, algorithm); trial t uses seed + t in every cell"""
    _check_counts(trials, sizes, "sizes")
    _check_counts(trials, h_max_values, "h_max values")
    algorithms = _ordered(algorithms)
    if optimal_max_n is None:
        optimal_max_n = settings.OPTIMAL_MAX_N

    rows: List[TrialResult] = []
    for n in sizes:
        for h_max in h_max_values:
            for trial in range(trials):
                spec = make_spec(n, h_max, seed + trial, total_flow)
                initial, flows, budgets = generate_instance(spec)
                traffic: Dict[Algorithm, float] = {}
                for algorithm in algorithms:
                    if algorithm != Algorithm.GREEDY and n > optimal_max_n:
                        continue
                    result = optimize(initial, flows, budgets, algorithm, bound)
                    traffic[algorithm] = result.traffic
                    rows.append(_trial(spec, algorithm, result, 1, result.traffic, result.nodes_explored,
                                       result.nodes_pruned, result.wall_time_ms))
                _check_sandwich(spec, 1, traffic, rows[-1].traffic_initial if traffic else 0.0)
            logger.info(f"Sweep cell n={n} h_max={h_max} finished ({trials} trials)")
    return rows


def run_multi_root(n: int, h_max: int, roots_considered: Sequence[int], trials: int,
                   algorithms: Iterable[Algorithm], seed: int = 0, total_flow: Optional[float] = None,
                   bound: Optional[BoundMode] = None) -> List[TrialResult]:
    """
    Per trial, evaluate each algorithm from several roots and keep the minimum.
    The roots for k candidates are the first k of one random permutation, so
    candidate sets are nested as k grows.
    """
    _check_counts(trials, roots_considered, "root counts")
    bad = sorted(k for k in roots_considered if k < 1 or k > n)
    if bad:
        raise InvalidParameterError(f"Root counts {bad} must lie between 1 and n={n}")
    algorithms = _ordered(algorithms)
    widest = max(roots_considered)

    rows: List[TrialResult] = []
    for trial in range(trials):
        spec = make_spec(n, h_max, seed + trial, total_flow)
        initial, flows, budgets = generate_instance(spec)
        roots = [int(root) for root in np.random.default_rng((spec.seed, 1)).permutation(n)[:widest]]
        per_root: Dict[Algorithm, List[SearchResult]] = {}
        for algorithm in algorithms:
            per_root[algorithm] = [
                optimize(assign_prefix_labels(initial.topology.reroot(root)), flows, budgets, algorithm, bound)
                for root in roots
            ]
        for k in roots_considered:
            traffic: Dict[Algorithm, float] = {}
            for algorithm in algorithms:
                considered = per_root[algorithm][:k]
                best = min(result.traffic for result in considered)
                traffic[algorithm] = best
                rows.append(_trial(
                    spec, algorithm, considered[0], k, best,
                    sum(result.nodes_explored for result in considered),
                    sum(result.nodes_pruned for result in considered),
                    math.fsum(result.wall_time_ms for result in considered),
                ))
            _check_sandwich(spec, k, traffic, rows[-1].traffic_initial)
    logger.info(f"Multi-root run n={n} h_max={h_max} roots={list(roots_considered)} finished ({trials} trials)")
    return rows


def summarize(rows: Iterable[TrialResult]) -> List[CellSummary]:
    """Means per (n, h_max, algorithm, roots) cell, in first-seen order"""
    cells: Dict[Tuple[int, int, str, int], List[TrialResult]] = {}
    for row in rows:
        cells.setdefault((row.spec.n, row.spec.h_max, row.algorithm, row.roots_considered), []).append(row)
    summaries = []
    for (n, h_max, algorithm, roots), members in cells.items():
        finals = np.array([row.traffic_final for row in members])
        summaries.append(CellSummary(
            n=n,
            h_max=h_max,
            algorithm=algorithm,
            roots_considered=roots,
            trials=len(members),
            mean_traffic_initial=float(np.mean([row.traffic_initial for row in members])),
            mean_traffic_final=float(np.mean(finals)),
            std_traffic_final=float(np.std(finals, ddof=1)) if len(members) > 1 else 0.0,
            mean_explored=float(np.mean([row.explored for row in members])),
        ))
    return summaries


def worst_case_instance(n: int) -> Instance:
    """Star around node 0, equal flow on every ordered pair, budgets large enough for any slot"""
    if n < 2:
        raise InvalidParameterError(f"Worst-case instance needs n >= 2, got {n}")
    star = TreeTopology.create(0, {node: 0 for node in range(1, n)}, range(n))
    rate = 1.0 / (n * (n - 1))
    flows = FlowSet.create({(src, dst): rate for src in range(n) for dst in range(n) if src != dst})
    budgets = EnergyBudget.uniform(range(n), 2 * n)
    return assign_prefix_labels(star), flows, budgets


def greedy_worst_case(n: int) -> int:
    return sum(i * (n - i) for i in range(1, n))


def optimal_worst_case(n: int) -> int:
    return math.factorial(n - 1) ** 2


def complexity_probe(sizes: Sequence[int], optimal_max_n: Optional[int] = None,
                     oracle_max_n: Optional[int] = None) -> List[ComplexityRow]:
    """Greedy evaluation count and branch-and-bound counters on the worst-case instance"""
    if not sizes:
        raise InvalidParameterError("No sizes given")
    if optimal_max_n is None:
        optimal_max_n = settings.BENCH_OPTIMAL_MAX_N
    if oracle_max_n is None:
        oracle_max_n = settings.BENCH_ORACLE_MAX_N
    rows = []
    for n in sizes:
        if n < 3:
            raise InvalidParameterError(f"Complexity probe needs n >= 3, got {n}")
        initial, flows, budgets = worst_case_instance(n)
        greedy = optimize_greedy(initial, flows, budgets)
        row = ComplexityRow(
            n=n,
            greedy_evaluations=greedy.nodes_explored,
            greedy_worst_case=greedy_worst_case(n),
            optimal_worst_case=optimal_worst_case(n),
        )
        if n <= optimal_max_n:
            bnb = optimize_bnb(initial, flows, budgets)
            row = row.model_copy(update={"bnb_leaves": bnb.leaves_explored, "bnb_explored": bnb.nodes_explored})
        if n <= oracle_max_n:
            oracle = brute_force_oracle(initial, flows, budgets)
            row = row.model_copy(update={"oracle_leaves": oracle.leaves_explored})
        logger.info(f"Complexity probe n={n}: greedy {row.greedy_evaluations} evaluations")
        rows.append(row)
    return rows
