"""Replication harness for null-distribution, calibration and power studies.

Every replicate draws from its own stream, keyed by
``(master_seed, table_id, n_index, purpose, replicate)``, and tables are
built by counting. Blocks of replicates have a fixed size that depends only on n,
so results are identical for any number of worker processes.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import io
import json
import math
import time

import numpy as np

from .manifolds import RP2, S2, SO3, ManifoldSpec, nu
from .sampling import FisherMixtureParams, RngSpec, sample_fisher_mixture, sample_uniform
from .sobolev import gine_fn, modified_statistic, score_path, select_from_path
from .specialfun import chi2_upper_quantile

__all__ = [
    "STATISTICS",
    "SimulationPlan",
    "SimulationTable",
    "replicate_statistics",
    "simulate_khat_distribution",
    "simulate_tail_probabilities",
    "simulate_power",
    "simulate",
    "monte_carlo_pvalues",
    "published_plan",
    "PUBLISHED_SAMPLE_SIZES",
    "FAST_REPLICATIONS",
]

STATISTICS = ("F_n", "S_khat", "S_star")
_ALIASES = {"gine_fn": "F_n", "fn": "F_n", "s_khat": "S_khat", "s_star": "S_star"}
PUBLISHED_SAMPLE_SIZES = (5, 10, 15, 20, 25, 30)
PUBLISHED_ALPHAS = (0.10, 0.05, 0.01)
FAST_REPLICATIONS = 2000


def _canonical_stat(name):
    name = _ALIASES.get(name.lower(), name) if name not in STATISTICS else name
    if name not in STATISTICS:
        raise ValueError(f"unknown statistic {name!r}; choose from {STATISTICS}")
    return name


@dataclass
class SimulationPlan:
    """What to simulate.

    ``khat_bucket`` merges orders >= that value into one histogram row, as
    in the published k_hat tables. ``table_id`` only enters the seeding.
    """

    manifold: ManifoldSpec
    sample_sizes: tuple
    replications: int
    alphas: tuple = PUBLISHED_ALPHAS
    K: int = 5
    alternative: FisherMixtureParams | None = None
    statistics: tuple = ("S_khat", "S_star")
    master_seed: int = 0
    table_id: int = 0
    khat_bucket: int | None = None
    fast: bool = False
    fn_threshold: str = "null_mc"

    def __post_init__(self):
        self.sample_sizes = tuple(int(n) for n in self.sample_sizes)
        self.alphas = tuple(float(a) for a in self.alphas)
        self.statistics = tuple(_canonical_stat(s) for s in self.statistics)
        self.validate()

    def validate(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.sample_sizes or min(self.sample_sizes) < 1:
            raise ValueError("sample sizes must be positive")
        if not all(0.0 < a < 1.0 for a in self.alphas):
            raise ValueError("every alpha must lie in (0, 1)")
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.fn_threshold not in ("null_mc", "chi2"):
            raise ValueError("fn_threshold must be 'null_mc' or 'chi2'")
        if self.khat_bucket is not None and not 1 <= self.khat_bucket <= self.K:
            raise ValueError("khat_bucket must lie in 1..K")
        on_s2 = self.manifold == S2
        if "F_n" in self.statistics and not on_s2:
            raise ValueError("Giné's F_n is only available on S^2")
        if self.alternative is not None and not on_s2:
            raise ValueError("the Fisher-mixture alternative is only defined on S^2")

    def to_dict(self):
        alt = None
        if self.alternative is not None:
            alt = {"kappa": self.alternative.kappa, "mu": list(self.alternative.mu)}
        return {
            "manifold": self.manifold.name,
            "sample_sizes": list(self.sample_sizes),
            "replications": self.replications,
            "alphas": list(self.alphas),
            "K": self.K,
            "alternative": alt,
            "statistics": list(self.statistics),
            "master_seed": self.master_seed,
            "table_id": self.table_id,
            "khat_bucket": self.khat_bucket,
            "fast": self.fast,
            "fn_threshold": self.fn_threshold,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d.pop("study", None)
        d["manifold"] = ManifoldSpec.parse(d["manifold"])
        alt = d.get("alternative")
        if alt is not None:
            d["alternative"] = FisherMixtureParams(alt["kappa"], tuple(alt.get("mu", (0.0, 0.0, 1.0))))
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown plan fields: {sorted(unknown)}")
        return cls(**d)


@dataclass
class SimulationTable:
    """Aggregated Monte Carlo output.

    For ``kind == "khat"`` the rows are k_hat values (the last possibly a
    merged bucket such as ``"5-10"``) and ``values`` holds counts. For
    ``"tail"`` and ``"power"`` the rows are ``(alpha, statistic)`` pairs
    and ``values`` holds rejection frequencies.
    """

    kind: str
    manifold: str
    sample_sizes: list
    rows: list
    values: np.ndarray
    replications: int
    meta: dict = field(default_factory=dict)

    @property
    def table_id(self):
        return self.meta.get("table_id", 0)

    def _header(self):
        first = ["khat"] if self.kind == "khat" else ["alpha", "statistic"]
        return first + [f"n={n}" for n in self.sample_sizes]

    def to_csv(self):
        buf = io.StringIO()
        buf.write(f"# table: {self.table_id}\n")
        buf.write(f"# kind: {self.kind}\n")
        buf.write(f"# manifold: {self.manifold}\n")
        buf.write(f"# replications: {self.replications}\n")
        for key in ("seed", "K", "kappa", "fn_threshold", "fast", "tolerance_scale"):
            if key in self.meta and self.meta[key] is not None:
                buf.write(f"# {key}: {self.meta[key]}\n")
        buf.write(",".join(self._header()) + "\n")
        for label, vals in zip(self.rows, self.values):
            if self.kind == "khat":
                cells = [str(label)] + [str(int(v)) for v in vals]
            else:
                alpha, stat = label
                cells = [f"{alpha:g}", stat] + [f"{v:.6f}" for v in vals]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()

    def to_dict(self):
        if self.kind == "khat":
            rows = [{"khat": str(l), "values": [int(v) for v in vals]} for l, vals in zip(self.rows, self.values)]
        else:
            rows = [
                {"alpha": l[0], "statistic": l[1], "values": [float(v) for v in vals]}
                for l, vals in zip(self.rows, self.values)
            ]
        return {
            "kind": self.kind,
            "manifold": self.manifold,
            "sample_sizes": list(self.sample_sizes),
            "replications": self.replications,
            "rows": rows,
            "meta": dict(self.meta),
        }

    def frequencies(self):
        """Values as proportions (k_hat counts divided by replications)."""
        if self.kind == "khat":
            return self.values / self.replications
        return np.asarray(self.values, dtype=float)

    def cell(self, row, n):
        """One value by row label (k_hat label, or ``(alpha, statistic)``) and n."""
        j = self.sample_sizes.index(n)
        for label, vals in zip(self.rows, self.values):
            if self.kind == "khat":
                if str(label) == str(row):
                    return vals[j]
            elif math.isclose(label[0], row[0]) and label[1] == _canonical_stat(row[1]):
                return vals[j]
        raise KeyError(row)


def _block_size(n):
    return max(1, min(500, 2_000_000 // (n * n)))


def _run_block(task):
    spec, n, K, seed, key, start, stop, alternative, want_fn = task
    draws = []
    for r in range(start, stop):
        gen = RngSpec(seed, key + (r,)).generator()
        if alternative is None:
            draws.append(sample_uniform(spec, n, gen))
        else:
            draws.append(sample_fisher_mixture(alternative, n, gen))
    samples = np.stack(draws)
    path = score_path(spec, samples, K)
    k_hat, _ = select_from_path(spec, path, n)
    S = np.take_along_axis(path, (k_hat - 1)[:, None], axis=-1)[:, 0]
    fn = gine_fn(samples) if want_fn else None
    return k_hat, S, fn


_MAIN, _FN_NULL = 0, 1


def replicate_statistics(plan, n_index, workers=1, null=False):
    """Per-replicate k_hat, S_khat, S_star (and F_n) for one sample size.

    Returns a dict of arrays of length ``plan.replications``. S_star is the
    cubic modification applied as published, without any range guard.
    With ``null=True`` the plan's alternative is ignored and a separate
    family of streams is used (for calibrating F_n).
    """
    n = plan.sample_sizes[n_index]
    key = (plan.table_id, n_index, _FN_NULL if null else _MAIN)
    alternative = None if null else plan.alternative
    size = _block_size(n)
    want_fn = "F_n" in plan.statistics
    tasks = [
        (plan.manifold, n, plan.K, plan.master_seed, key, s, min(s + size, plan.replications), alternative, want_fn)
        for s in range(0, plan.replications, size)
    ]
    if workers and workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_block, tasks))
    else:
        parts = [_run_block(t) for t in tasks]
    k_hat = np.concatenate([p[0] for p in parts])
    S = np.concatenate([p[1] for p in parts])
    out = {"k_hat": k_hat, "S_khat": S, "S_star": modified_statistic(plan.manifold, S, n)}
    if want_fn:
        out["F_n"] = np.concatenate([p[2] for p in parts])
    return out


def monte_carlo_pvalues(observed, null):
    """(1 + #{null >= t}) / (B + 1) for each observed t."""
    ordered = np.sort(np.asarray(null, dtype=float))
    exceed = ordered.size - np.searchsorted(ordered, observed, side="left")
    return (1.0 + exceed) / (ordered.size + 1.0)


def _khat_rows(plan):
    top = plan.khat_bucket or plan.K
    rows = [str(k) for k in range(1, top)]
    rows.append(str(top) if top == plan.K else f"{top}-{plan.K}")
    return rows, top


def _meta(plan, elapsed, **extra):
    meta = {
        "table_id": plan.table_id,
        "seed": plan.master_seed,
        "K": plan.K,
        "fast": plan.fast,
        "elapsed_seconds": round(elapsed, 3),
    }
    if plan.fast:
        meta["tolerance_scale"] = round(math.sqrt(10_000 / FAST_REPLICATIONS), 4)
    meta.update(extra)
    return meta


def simulate_khat_distribution(plan, workers=1):
    """Histogram of k_hat over uniform samples, one column per sample size."""
    if plan.alternative is not None:
        raise ValueError("k_hat distribution study is a null study; drop the alternative")
    t0 = time.perf_counter()
    rows, top = _khat_rows(plan)
    counts = np.zeros((len(rows), len(plan.sample_sizes)), dtype=np.int64)
    for j in range(len(plan.sample_sizes)):
        k_hat = replicate_statistics(plan, j, workers)["k_hat"]
        bucketed = np.minimum(k_hat, top)
        counts[:, j] = np.bincount(bucketed - 1, minlength=top)[:top]
    return SimulationTable(
        "khat", plan.manifold.name, list(plan.sample_sizes), rows, counts, plan.replications,
        _meta(plan, time.perf_counter() - t0),
    )


def _rejection_table(plan, kind, workers):
    t0 = time.perf_counter()
    df = nu(plan.manifold, 1)
    thresholds = {a: chi2_upper_quantile(a, df) for a in plan.alphas}
    rows = [(a, s) for a in plan.alphas for s in plan.statistics]
    freq = np.zeros((len(rows), len(plan.sample_sizes)))
    calibrate_fn = "F_n" in plan.statistics and plan.fn_threshold == "null_mc"
    for j in range(len(plan.sample_sizes)):
        stats = replicate_statistics(plan, j, workers)
        null_fn = replicate_statistics(plan, j, workers, null=True)["F_n"] if calibrate_fn else None
        for i, (a, s) in enumerate(rows):
            if s == "F_n" and calibrate_fn:
                reject = monte_carlo_pvalues(stats[s], null_fn) <= a
            else:
                reject = stats[s] >= thresholds[a]
            freq[i, j] = np.count_nonzero(reject) / plan.replications
    extra = {"df": df}
    if "F_n" in plan.statistics:
        extra["fn_threshold"] = plan.fn_threshold
    if plan.alternative is not None:
        extra["kappa"] = plan.alternative.kappa
    return SimulationTable(
        kind, plan.manifold.name, list(plan.sample_sizes), rows, freq, plan.replications,
        _meta(plan, time.perf_counter() - t0, **extra),
    )


def simulate_tail_probabilities(plan, workers=1):
    """Null frequencies of statistic >= upper-alpha chi-square(nu_1) quantile."""
    if plan.alternative is not None:
        raise ValueError("tail-probability study is a null study; drop the alternative")
    if not set(plan.statistics) & {"S_khat", "S_star"}:
        raise ValueError("tail-probability study needs S_khat and/or S_star")
    return _rejection_table(plan, "tail", workers)


def simulate_power(plan, workers=1):
    """Rejection frequencies under the Fisher-mixture alternative on S^2."""
    if plan.alternative is None:
        raise ValueError("power study needs an alternative")
    plan.validate()
    return _rejection_table(plan, "power", workers)


def simulate(plan, workers=1):
    """Dispatch on the plan: power if it has an alternative, k_hat histogram
    if it asks for no statistics, tail probabilities otherwise."""
    if plan.alternative is not None:
        return simulate_power(plan, workers)
    if not plan.statistics:
        return simulate_khat_distribution(plan, workers)
    return simulate_tail_probabilities(plan, workers)


# K per published table follows the widest merged k_hat bucket printed there.
_PUBLISHED_LAYOUT = {
    1: ("khat", S2, 10, 5),
    2: ("tail", S2, 10, None),
    3: ("khat", RP2, 8, 5),
    4: ("tail", RP2, 8, None),
    5: ("khat", SO3, 4, 3),
    6: ("tail", SO3, 4, None),
    7: ("power", S2, 10, None),
}


def published_plan(table_id, replications=10_000, master_seed=0, fast=False, sample_sizes=PUBLISHED_SAMPLE_SIZES):
    """The plan reproducing one of the seven published simulation tables."""
    if table_id not in _PUBLISHED_LAYOUT:
        raise ValueError(f"table id must be 1..7, got {table_id!r}")
    kind, spec, K, bucket = _PUBLISHED_LAYOUT[table_id]
    if fast:
        replications = FAST_REPLICATIONS
    stats = {"khat": (), "tail": ("S_khat", "S_star"), "power": ("F_n", "S_khat", "S_star")}[kind]
    return SimulationPlan(
        manifold=spec,
        sample_sizes=tuple(sample_sizes),
        replications=replications,
        K=K,
        alternative=FisherMixtureParams(2.0) if kind == "power" else None,
        statistics=stats,
        master_seed=master_seed,
        table_id=table_id,
        khat_bucket=bucket,
        fast=fast,
    )


def report_json(plan, tables, elapsed):
    """The JSON report: ``{schema, plan, tables, seed, elapsed_seconds}``."""
    return json.dumps(
        {
            "schema": 1,
            "plan": plan.to_dict(),
            "tables": [t.to_dict() for t in tables],
            "seed": plan.master_seed,
            "elapsed_seconds": round(elapsed, 3),
        },
        indent=2,
    )
