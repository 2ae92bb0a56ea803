"""Published simulation tables and cell-by-cell comparison with new runs."""

from functools import lru_cache
from importlib import resources
import json
import math

import numpy as np

from .montecarlo import SimulationTable

__all__ = ["load_reference", "compare", "format_comparison"]


@lru_cache(maxsize=None)
def _raw():
    text = resources.files("sobolev_uniformity").joinpath("data/published_tables.json").read_text()
    return json.loads(text)["tables"]


def load_reference(table_id):
    """One published table as a `SimulationTable` (k_hat tables hold counts)."""
    d = _raw().get(str(table_id))
    if d is None:
        raise KeyError(f"no published table {table_id}")
    if d["kind"] == "khat":
        rows = [r["khat"] for r in d["rows"]]
    else:
        rows = [(r["alpha"], r["statistic"]) for r in d["rows"]]
    values = np.array([r["values"] for r in d["rows"]])
    meta = {"table_id": int(table_id), "kappa": d.get("kappa")}
    return SimulationTable(d["kind"], d["manifold"], list(d["sample_sizes"]), rows, values, d["replications"], meta)


def _z(p1, r1, p2, r2):
    pooled = (p1 * r1 + p2 * r2) / (r1 + r2)
    var = pooled * (1.0 - pooled) * (1.0 / r1 + 1.0 / r2)
    if var == 0.0:
        return 0.0 if p1 == p2 else math.copysign(math.inf, p1 - p2)
    return (p1 - p2) / math.sqrt(var)


def compare(table, reference=None):
    """Per-cell two-sample z-scores of `table` against the published values.

    Cells are matched by row label and sample size; cells missing from
    either side are skipped. Returns a list of dicts with keys ``row``,
    ``n``, ``ours``, ``published`` and ``z`` (proportions, not counts).
    """
    if reference is None:
        reference = load_reference(table.table_id)
    ours, theirs = table.frequencies(), reference.frequencies()
    ref_index = {_key(reference.kind, r): i for i, r in enumerate(reference.rows)}
    out = []
    for i, row in enumerate(table.rows):
        ri = ref_index.get(_key(table.kind, row))
        if ri is None:
            continue
        for j, n in enumerate(table.sample_sizes):
            if n not in reference.sample_sizes:
                continue
            rj = reference.sample_sizes.index(n)
            p1, p2 = float(ours[i, j]), float(theirs[ri, rj])
            out.append({
                "row": row,
                "n": n,
                "ours": p1,
                "published": p2,
                "z": _z(p1, table.replications, p2, reference.replications),
            })
    return out


def _key(kind, row):
    if kind == "khat":
        return str(row)
    return (round(float(row[0]), 6), row[1])


def format_comparison(cells, flag=3.0):
    """Human-readable diff summary; cells with |z| > `flag` are marked."""
    lines = [f"{'row':<14}{'n':>4}{'ours':>10}{'published':>10}{'z':>8}"]
    for c in cells:
        row = c["row"] if isinstance(c["row"], str) else f"{c['row'][0]:g} {c['row'][1]}"
        mark = "  *" if abs(c["z"]) > flag else ""
        lines.append(f"{row:<14}{c['n']:>4}{c['ours']:>10.4f}{c['published']:>10.4f}{c['z']:>8.2f}{mark}")
    worst = max((abs(c["z"]) for c in cells), default=0.0)
    lines.append(f"{len(cells)} cells, max |z| = {worst:.2f}; * marks |z| > {flag:g}")
    return "\n".join(lines)
