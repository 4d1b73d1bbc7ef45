import math

import pytest

from tworoute.bench import (ExperimentSpec, box_stats, checkpoint_stats, is_optimal,
                            reference_summary, run_experiment)
from tworoute.formats import read_csv
from tworoute.sliding import SlidingParams, gap_percent, two_vrp_heuristic
from tworoute.two_tsp import TwoTspInstance
from tworoute.twovrp import map_2tsp_to_2vrp

from helpers import kalmanson_2tsp


def test_gap_basics():
    assert gap_percent(5.0, 5.0) == 0.0
    assert gap_percent(5.5, 5.0) == pytest.approx(10.0)
    assert math.isnan(gap_percent(5.0, None))


def test_gap_scale_invariant():
    g = kalmanson_2tsp(14, 6, 2)
    params = SlidingParams(2, 1)
    runs = []
    # powers of two scale every float exactly, so the search itself is unchanged
    for k in (1.0, 4.0, 0.5):
        inst = TwoTspInstance(g.instance.matrix * k, g.instance.fixed)
        res = two_vrp_heuristic(map_2tsp_to_2vrp(inst), params, "RndH", 1, seed=4)
        runs.append((res.best.cost, gap_percent(res.best.cost, g.optimum * k)))
    assert all(gap == runs[0][1] for _, gap in runs)
    found = runs[0][0]
    for k in (3.0, 0.37, 1e3):
        assert gap_percent(found * k, g.optimum * k) == pytest.approx(runs[0][1], rel=1e-9)


def test_spec_validation():
    with pytest.raises(ValueError, match="no checkpoints"):
        ExperimentSpec(checkpoints=())
    with pytest.raises(ValueError):
        ExperimentSpec(checkpoints=(5, 1))
    with pytest.raises(ValueError):
        ExperimentSpec(repetitions=10, checkpoints=(1, 20))
    with pytest.raises(ValueError):
        ExperimentSpec(family="tsplib")


def test_box_stats_tukey():
    mean, med, q1, q3, lo, hi = box_stats([0, 0, 0, 1, 1, 1, 50])
    assert (med, q1, q3) == (1.0, 0.0, 1.0)
    assert lo == 0 and hi == 1  # 50 lies beyond q3 + 1.5 IQR
    assert mean == pytest.approx(53 / 7)


def test_checkpoint_counts():
    best_after = [[12, 10, 10], [11, 11, 10]]
    stats = checkpoint_stats(best_after, [10, 10], [1, 2, 3])
    assert [s.count_optimal for s in stats] == [0, 1, 2]
    assert stats[0].median == pytest.approx(15.0)


def test_reference_summary():
    r = reference_summary([100, 98, 105], [100, 100, 100])
    assert r.improved == 2 and r.best == pytest.approx(-2) and r.worst == pytest.approx(5)


def test_is_optimal():
    assert is_optimal(10.0, 10.0) and not is_optimal(10.1, 10.0) and not is_optimal(1.0, None)


def test_run_experiment_artifacts(tmp_path):
    spec = ExperimentSpec(count=2, n=12, fixed=4, s=2, l=1, repetitions=3, checkpoints=(1, 3),
                          seed=1, references=(1.0, 1.0))
    res = run_experiment(spec, tmp_path)
    counts = [c.count_optimal for c in res.checkpoints]
    assert counts == sorted(counts)
    assert all(not row.error for row in res.instances)
    for name in ("log.csv", "checkpoints.csv", "instances.csv", "reference.csv"):
        assert (tmp_path / name).exists()
    assert len(read_csv(tmp_path / "checkpoints.csv")) == 2
    assert {"instance_id", "repetition", "iteration", "best_cost", "gap_percent",
            "elapsed_ms"} == set(read_csv(tmp_path / "log.csv")[0])


def test_random_family_runs():
    spec = ExperimentSpec(family="random-2vrp", count=1, n=10, s=2, repetitions=2,
                          checkpoints=(1, 2), seed=3)
    res = run_experiment(spec)
    assert math.isfinite(res.instances[0].best_cost)
    assert math.isnan(res.checkpoints[0].mean)


def test_failures_are_reported_per_instance(tmp_path):
    spec = ExperimentSpec(family="external", paths=(str(tmp_path / "none.tsp2"),),
                          repetitions=1, checkpoints=(1,))
    res = run_experiment(spec)
    assert res.instances[0].error
