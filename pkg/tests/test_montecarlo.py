import json

import numpy as np
import pytest

from sobolev_uniformity.manifolds import CIRCLE, RP2, S2, SO3
from sobolev_uniformity.montecarlo import (
    SimulationPlan,
    monte_carlo_pvalues,
    published_plan,
    replicate_statistics,
    report_json,
    simulate,
    simulate_khat_distribution,
    simulate_power,
    simulate_tail_probabilities,
)
from sobolev_uniformity.reference import compare, format_comparison, load_reference
from sobolev_uniformity.sampling import FisherMixtureParams


def small_plan(**kw):
    base = dict(manifold=S2, sample_sizes=(5, 10), replications=300, K=5, master_seed=11)
    base.update(kw)
    return SimulationPlan(**base)


def test_khat_histogram_conserves_replications():
    t = simulate_khat_distribution(small_plan(statistics=(), khat_bucket=3))
    assert t.rows == ["1", "2", "3-5"]
    assert np.all(t.values.sum(axis=0) == 300)
    assert t.values.dtype.kind == "i"


def test_tail_table_monotone_in_alpha():
    t = simulate_tail_probabilities(small_plan(alphas=(0.2, 0.1, 0.05, 0.01)))
    for stat in ("S_khat", "S_star"):
        col = np.array([[t.cell((a, stat), n) for n in (5, 10)] for a in (0.2, 0.1, 0.05, 0.01)])
        assert np.all(np.diff(col, axis=0) <= 0)


def test_alpha_near_one_rejects_almost_everything():
    t = simulate_tail_probabilities(small_plan(alphas=(0.999,), statistics=("S_khat",), sample_sizes=(20,)))
    assert t.cell((0.999, "S_khat"), 20) >= 0.99


def test_plan_validation():
    with pytest.raises(ValueError):
        small_plan(manifold=RP2, statistics=("F_n",))
    with pytest.raises(ValueError):
        small_plan(manifold=SO3, alternative=FisherMixtureParams(2.0))
    with pytest.raises(ValueError):
        small_plan(statistics=("bogus",))
    with pytest.raises(ValueError):
        small_plan(replications=0)
    with pytest.raises(ValueError):
        small_plan(alphas=(1.0,))
    with pytest.raises(ValueError):
        small_plan(fn_threshold="other")
    with pytest.raises(ValueError):
        simulate_tail_probabilities(small_plan(alternative=FisherMixtureParams(2.0)))
    with pytest.raises(ValueError):
        simulate_power(small_plan())


def test_plan_round_trip():
    plan = small_plan(alternative=FisherMixtureParams(2.0), statistics=("gine_fn", "S_khat"))
    assert plan.statistics == ("F_n", "S_khat")
    again = SimulationPlan.from_dict(json.loads(json.dumps(plan.to_dict())))
    assert again == plan
    with pytest.raises(ValueError):
        SimulationPlan.from_dict({**plan.to_dict(), "extra": 1})


def test_workers_do_not_change_results():
    plan = small_plan(sample_sizes=(40,), replications=2500)  # several blocks at n = 40
    one = replicate_statistics(plan, 0, workers=1)
    many = replicate_statistics(plan, 0, workers=3)
    for key in one:
        assert np.array_equal(one[key], many[key])
    t1 = simulate(plan, workers=1).to_csv()
    t3 = simulate(plan, workers=3).to_csv()
    assert t1 == t3


def test_seed_and_table_id_change_streams():
    a = replicate_statistics(small_plan(), 0)["S_khat"]
    b = replicate_statistics(small_plan(master_seed=12), 0)["S_khat"]
    c = replicate_statistics(small_plan(table_id=3), 0)["S_khat"]
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_fn_null_streams_are_separate():
    plan = small_plan(alternative=FisherMixtureParams(2.0), statistics=("F_n",))
    alt = replicate_statistics(plan, 0)["F_n"]
    null = replicate_statistics(plan, 0, null=True)["F_n"]
    assert not np.array_equal(alt, null)


def test_monte_carlo_pvalues():
    null = np.arange(1.0, 100.0)  # 99 values
    np.testing.assert_allclose(monte_carlo_pvalues([0.0, 50.0, 99.0, 1000.0], null), [1.0, 0.51, 0.02, 0.01])


def test_power_table_and_json_schema():
    plan = small_plan(alternative=FisherMixtureParams(2.0), statistics=("F_n", "S_khat", "S_star"), replications=200)
    t = simulate_power(plan)
    assert t.kind == "power"
    assert t.meta["kappa"] == 2.0 and t.meta["fn_threshold"] == "null_mc"
    d = json.loads(report_json(plan, [t], 1.23))
    assert set(d) == {"schema", "plan", "tables", "seed", "elapsed_seconds"}
    assert d["schema"] == 1 and d["seed"] == 11
    assert d["tables"][0]["rows"][0] == {"alpha": 0.1, "statistic": "F_n", "values": d["tables"][0]["rows"][0]["values"]}


def test_csv_layout():
    t = simulate(small_plan(statistics=(), khat_bucket=2))
    lines = t.to_csv().splitlines()
    assert lines[0] == "# table: 0"
    header = next(l for l in lines if not l.startswith("#"))
    assert header == "khat,n=5,n=10"
    assert "elapsed" not in t.to_csv()


def test_power_increases_with_n():
    plan = small_plan(sample_sizes=(10, 30), replications=2000, K=10,
                      alternative=FisherMixtureParams(2.0), statistics=("S_khat",), alphas=(0.05,))
    t = simulate_power(plan)
    assert t.cell((0.05, "S_khat"), 30) > t.cell((0.05, "S_khat"), 10)


def test_selection_concentrates_with_n():
    # P(k_hat = 1) is nondecreasing in n, up to Monte Carlo error
    t = simulate_khat_distribution(SimulationPlan(S2, (5, 10, 20, 40), 4000, K=6, statistics=(), master_seed=2))
    p1 = t.frequencies()[0]
    se = np.sqrt(p1 * (1 - p1) / 4000).max()
    assert np.all(np.diff(p1) >= -3 * se)
    assert p1[-1] > p1[0]


def test_published_plans():
    for tid in range(1, 8):
        plan = published_plan(tid, replications=10)
        assert plan.table_id == tid
    assert published_plan(7).alternative.kappa == 2.0
    assert published_plan(5).K == 4 and published_plan(5).khat_bucket == 3
    assert published_plan(2, fast=True).replications == 2000
    for bad in (0, 8, 9):
        with pytest.raises(ValueError):
            published_plan(bad)


def test_reference_tables_load():
    for tid in range(1, 8):
        ref = load_reference(tid)
        assert ref.replications == 10_000
        assert ref.sample_sizes == [5, 10, 15, 20, 25, 30]
        if ref.kind == "khat":
            assert np.all(ref.values.sum(axis=0) == 10_000)
    assert load_reference(1).cell("1", 30) == 9964
    assert load_reference(7).cell((0.05, "S_khat"), 30) == pytest.approx(0.171)
    with pytest.raises(KeyError):
        load_reference(9)


def test_compare_against_self_is_zero():
    ref = load_reference(2)
    cells = compare(ref, ref)
    assert cells and all(c["z"] == 0.0 for c in cells)
    text = format_comparison(cells)
    assert "max |z| = 0.00" in text


def test_compare_small_run():
    t = simulate(published_plan(5, replications=500, sample_sizes=(5, 30)))
    cells = compare(t)
    assert len(cells) == 2 * len(t.rows)
    assert all(np.isfinite(c["z"]) or c["published"] in (0.0, 1.0) for c in cells)


def test_circle_plan_runs():
    t = simulate(SimulationPlan(CIRCLE, (10,), 100, K=4, master_seed=1))
    assert t.manifold == "circle"
