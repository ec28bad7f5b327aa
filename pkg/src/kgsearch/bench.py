"""Benchmark harness: random queries, quality metrics, CSV reporting.

Tree sizes are edge counts. Approximation error is measured against the
exact dynamic-programming optimum where the budget allows, which is stricter
than best-of-systems. Queries that return nothing contribute an infinite
error to the effective mean so that a failing variant can never look better
than one that answers.
"""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .graph import KeywordQuery, VIEW_ABOX
from .oracle import OracleUnavailable, bfs_distances, connected_components, exact_steiner_tree
from .pipeline import RunConfig, compute_st

CSV_HEADER = "query_id,k,system,size,elapsed_ms,app_er"

SYSTEM_FULL = "full"
SYSTEM_NO_PATCHUP = "no_patchup"
SYSTEM_NO_PATHSEL = "no_pathsel"
SYSTEM_ORACLE = "oracle"


def approximation_error(size: int, min_size: int) -> float:
    """Relative excess over the minimum, (size - min) / min."""
    if min_size < 1:
        raise ValueError("minimum size must be >= 1")
    return (size - min_size) / min_size


def result_coverage(counts: dict, current: str, cap: int = 10) -> float:
    """Share of minimum-size trees found, counts capped at ``cap`` per system."""
    capped = {sys: min(c, cap) for sys, c in counts.items()}
    best = max(capped.values(), default=0)
    if best == 0:
        return 0.0
    return capped.get(current, 0) / best


@dataclass
class BenchConfig:
    queries_per_k: int = 10
    k_values: tuple[int, ...] = (2, 4)
    seed: int = 0
    systems: tuple[str, ...] = (SYSTEM_FULL,)
    with_oracle: bool = True
    oracle_max_terminals: int = 8
    oracle_max_vertices: int = 500
    max_pair_distance: int | None = None  # None: same component suffices
    stable_output: bool = False
    run: RunConfig = field(default_factory=RunConfig)


@dataclass
class BenchRow:
    query_id: int
    k: int
    system: str
    size: int | None
    elapsed_ms: float
    app_er: float | None

    def csv(self, stable: bool) -> str:
        size = "" if self.size is None else str(self.size)
        ms = "0.000" if stable else f"{self.elapsed_ms:.3f}"
        if self.app_er is None:
            err = ""
        elif math.isinf(self.app_er):
            err = "inf"
        else:
            err = f"{self.app_er:.6f}"
        return f"{self.query_id},{self.k},{self.system},{size},{ms},{err}"


@dataclass
class BenchReport:
    rows: list[BenchRow]
    config: BenchConfig

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        lines.extend(row.csv(self.config.stable_output) for row in self.rows)
        return "\n".join(lines) + "\n"

    def aggregate(self) -> dict:
        by_system: dict[str, dict] = {}
        for row in self.rows:
            agg = by_system.setdefault(
                row.system,
                {"queries": 0, "answered": 0, "errors": [], "effective_errors": []},
            )
            agg["queries"] += 1
            if row.size is not None:
                agg["answered"] += 1
            if row.system == SYSTEM_ORACLE:
                continue
            if row.app_er is not None:
                agg["effective_errors"].append(row.app_er)
                if not math.isinf(row.app_er):
                    agg["errors"].append(row.app_er)
        out = {}
        for system, agg in by_system.items():
            errs = agg["errors"]
            eff = agg["effective_errors"]
            out[system] = {
                "queries": agg["queries"],
                "answered": agg["answered"],
                "app_er_mean": float(np.mean(errs)) if errs else None,
                "app_er_median": float(np.median(errs)) if errs else None,
                "app_er_mean_effective": (float(np.mean(eff)) if eff else None),
            }
        return out

    def summary(self) -> str:
        agg = self.aggregate()
        lines = [f"{'system':<14}{'queries':>8}{'answered':>9}{'mean':>10}{'median':>10}{'eff.mean':>10}"]
        for system in sorted(agg):
            a = agg[system]

            def fmt(x):
                if x is None:
                    return "-"
                if math.isinf(x):
                    return "inf"
                return f"{x:.4f}"

            lines.append(
                f"{system:<14}{a['queries']:>8}{a['answered']:>9}"
                f"{fmt(a['app_er_mean']):>10}{fmt(a['app_er_median']):>10}"
                f"{fmt(a['app_er_mean_effective']):>10}"
            )
        return "\n".join(lines)


def generate_queries(g, count: int, k: int, rng, max_pair_distance: int | None = None):
    """Sample vertex-keyword queries from one connected component.

    Keywords come from the largest component; when ``max_pair_distance`` is
    set, every pair of sampled keywords lies within that many hops, which
    keeps the queries answerable by a radius-limited index.
    """
    comp = connected_components(g)
    counts = np.bincount(comp[comp >= 0]) if (comp >= 0).any() else np.zeros(1, np.int64)
    if counts.size == 0 or counts.max() < k:
        return []
    target = int(np.argmax(counts))
    pool = [int(v) for v in np.flatnonzero(comp == target)]
    queries = []
    attempts = 0
    while len(queries) < count and attempts < count * 200:
        attempts += 1
        if max_pair_distance is None:
            pick = sorted(rng.choice(len(pool), size=k, replace=False).tolist())
            kws = tuple(pool[i] for i in pick)
        else:
            anchor = pool[int(rng.integers(len(pool)))]
            dists = bfs_distances(g, anchor, max_depth=max_pair_distance)
            near = [v for v in pool if dists[v] > 0]
            if len(near) < k - 1:
                continue
            pick = rng.choice(len(near), size=k - 1, replace=False).tolist()
            kws = tuple(sorted([anchor] + [near[i] for i in pick]))
            if any(
                bfs_distances(g, t, max_depth=max_pair_distance)[u] < 0
                for t in kws for u in kws
            ):
                continue
        queries.append(KeywordQuery(kws))
    return queries


def run_bench(g, idx, queries, config: BenchConfig) -> BenchReport:
    """Run every configured system over the query list; one row per pair."""
    rows: list[BenchRow] = []
    for qid, query in enumerate(queries):
        k = len(query.vertex_keywords)
        oracle_size = None
        if config.with_oracle:
            t0 = time.perf_counter()
            try:
                tree = exact_steiner_tree(
                    g, query.vertex_keywords,
                    max_terminals=config.oracle_max_terminals,
                    max_vertices=config.oracle_max_vertices,
                )
            except OracleUnavailable:
                tree = None
            elapsed = (time.perf_counter() - t0) * 1000
            if tree is not None:
                oracle_size = tree.size
                rows.append(BenchRow(qid, k, SYSTEM_ORACLE, tree.size, elapsed, None))
        for system in config.systems:
            run_cfg = dataclasses.replace(config.run)
            if system == SYSTEM_NO_PATCHUP:
                run_cfg.use_patchup = False
            elif system == SYSTEM_NO_PATHSEL:
                run_cfg.use_path_selection = False
            t0 = time.perf_counter()
            tree = compute_st(g, idx, query, run_cfg)
            elapsed = (time.perf_counter() - t0) * 1000
            if tree is None:
                err = float("inf") if oracle_size else None
                rows.append(BenchRow(qid, k, system, None, elapsed, err))
                continue
            err = None
            if oracle_size is not None and oracle_size >= 1:
                err = approximation_error(tree.size, oracle_size)
            rows.append(BenchRow(qid, k, system, tree.size, elapsed, err))
    return BenchReport(rows, config)


def synthetic_graph(n_vertices: int, n_edges: int, n_labels: int, seed: int = 0,
                    type_share: float = 0.1, attr_share: float = 0.1):
    """Random labeled multigraph for scale tests, connected-ish and seeded."""
    from .graph import GraphBuilder

    rng = np.random.default_rng(seed)
    b = GraphBuilder()
    names = [f"urn:v{i}" for i in range(n_vertices)]
    labels = [f"urn:p{i}" for i in range(n_labels)]
    concepts = [f"urn:C{i}" for i in range(max(2, n_labels // 2))]
    # a spine keeps most of the graph in one component
    for i in range(1, n_vertices):
        j = int(rng.integers(max(0, i - 50), i))
        b.add(names[i], labels[int(rng.integers(n_labels))], names[j])
    extra = max(0, n_edges - (n_vertices - 1))
    n_type = int(extra * type_share)
    n_attr = int(extra * attr_share)
    n_role = extra - n_type - n_attr
    for _ in range(n_role):
        u = int(rng.integers(n_vertices))
        v = int(rng.integers(n_vertices))
        b.add(names[u], labels[int(rng.integers(n_labels))], names[v])
    for _ in range(n_type):
        u = int(rng.integers(n_vertices))
        c = int(rng.integers(len(concepts)))
        b.add(names[u], b.config.type_pred, concepts[c])
    for i in range(n_attr):
        u = int(rng.integers(n_vertices))
        b.add(names[u], labels[int(rng.integers(n_labels))], f"value {i}", literal_object=True)
    return b.build()
