import math

import pytest

from stormspar.experiments import (
    ExperimentSpec,
    TrialRecord,
    aggregate,
    grid_points,
    htp_benchmark,
    run_experiment,
    run_trial,
    trial_stream_id,
)


def small_spec(**kw):
    base = dict(kind="single", n_values=[40], s_values=[3], sample_factors=[2.5],
                sigma_values=[0.01], trials=2, base_seed=5, max_outer_iters=300)
    base.update(kw)
    return ExperimentSpec(**base)


def record(**kw):
    base = dict(n=10, s=2, m=30, factor=None, sigma=0.1, target_snr_db=None,
                trial_index=0, seed=0, stream_id=0, success=True, rel_error=0.0,
                outer_iters=10, termination="converged", snr_db=30.0, wall_time=0.0)
    base.update(kw)
    return TrialRecord(**base)


def test_single_point_single_trial():
    recs = run_experiment(small_spec(trials=1))
    assert len(recs) == 1
    assert recs[0].termination in ("converged", "max_iters")


def test_grid_factor_rule_and_explicit():
    spec = small_spec(kind="phase_transition", n_values=[200], s_values=[10],
                      sample_factors=[1.0, 3.0])
    assert [p.m for p in grid_points(spec)] == [99, 297]
    spec = small_spec(m_rule="explicit", m_values=[50, 60], sigma_values=[0.0, 0.1])
    pts = grid_points(spec)
    assert [(p.m, p.sigma) for p in pts] == [(50, 0.0), (50, 0.1), (60, 0.0), (60, 0.1)]
    assert all(p.factor is None for p in pts)


def test_dimension_table_sample_sizes():
    spec = small_spec(kind="dimension_table", n_values=[100, 300, 500], s_values=[10])
    assert [p.m for p in grid_points(spec)] == [230, 257, 270]


def test_spec_validation():
    with pytest.raises(ValueError):
        small_spec(trials=0)
    with pytest.raises(ValueError):
        small_spec(n_values=[])
    with pytest.raises(ValueError):
        small_spec(kind="nope")
    with pytest.raises(ValueError):
        small_spec(m_rule="explicit")
    with pytest.raises(ValueError):
        ExperimentSpec.from_dict({"bogus": 1})
    spec = small_spec()
    assert ExperimentSpec.from_dict(spec.to_dict()) == spec


def test_worker_count_independence():
    spec = small_spec(sigma_values=[0.0, 0.05], trials=3)
    one = run_experiment(spec, 1)
    many = run_experiment(spec, 4)
    assert [r.deterministic_key() for r in one] == [r.deterministic_key() for r in many]


def test_stream_ids_disjoint():
    spec = small_spec(n_values=[30, 40], s_values=[2, 3], sigma_values=[0.0, 0.01], trials=5)
    ids = [trial_stream_id(spec.base_seed, p.n, p.s, p.m, p.noise_level, t)
           for p in grid_points(spec) for t in range(spec.trials)]
    assert len(set(ids)) == len(ids)
    assert trial_stream_id(1, 2, 3, 4, 0.5, 6) == trial_stream_id(1, 2, 3, 4, 0.5, 6)
    assert trial_stream_id(1, 2, 3, 4, 0.5, 6) != trial_stream_id(2, 2, 3, 4, 0.5, 6)


def test_infeasible_point_is_skipped():
    spec = small_spec(m_rule="explicit", m_values=[4, 60], trials=2)
    recs = run_experiment(spec)
    skipped = [r for r in recs if r.skipped]
    assert len(skipped) == 2 and all(r.m == 4 for r in skipped)
    rows = aggregate(recs)
    assert rows[0].trial_count == 0 and rows[0].skipped_count == 2
    assert math.isnan(rows[0].success_rate)
    assert rows[1].trial_count == 2


def test_record_success_consistent_with_error():
    for rec in run_experiment(small_spec(trials=3)):
        if rec.rel_error <= 1e-2:
            assert rec.success


def test_snr_mode_hits_target():
    spec = small_spec(n_values=[60], s_values=[3], sigma_values=[], snr_db_values=[30.0], trials=4)
    recs = run_experiment(spec)
    assert all(abs(r.snr_db - 30.0) < 3.0 for r in recs)
    assert all(r.target_snr_db == 30.0 for r in recs)
    rows = aggregate(recs)
    assert len(rows) == 1 and rows[0].target_snr_db == 30.0


def test_aggregate_nine_of_ten():
    recs = [record(trial_index=i, success=i != 3) for i in range(10)]
    (row,) = aggregate(recs)
    assert row.success_rate == 0.9 and row.trial_count == 10


def test_aggregate_single_record():
    (row,) = aggregate([record(rel_error=0.25, outer_iters=7, success=False)])
    assert row.success_rate == 0.0
    assert row.mean_rel_error == 0.25
    assert row.mean_outer_iters == 7 and row.aver_iter == 7


def test_aggregate_hand_fixture():
    recs = [
        record(trial_index=0, rel_error=0.1, outer_iters=10, success=False),
        record(trial_index=1, rel_error=0.002, outer_iters=21, success=True),
        record(trial_index=2, rel_error=0.003, outer_iters=35, success=True),
        record(n=20, trial_index=0, rel_error=0.5, outer_iters=4, success=False),
    ]
    first, second = aggregate(recs)
    assert first.trial_count == 3 and second.trial_count == 1
    assert first.success_rate == pytest.approx(2 / 3)
    assert first.mean_rel_error == pytest.approx((0.1 + 0.002 + 0.003) / 3)
    assert first.mean_outer_iters == pytest.approx(22.0)
    assert first.aver_iter == 22
    recs[2] = record(trial_index=2, rel_error=0.003, outer_iters=36, success=True)
    # floor only in display
    assert aggregate(recs)[0].mean_outer_iters == pytest.approx(67 / 3)
    assert aggregate(recs)[0].aver_iter == 22


def test_noise_free_point_exact():
    spec = small_spec(n_values=[60], s_values=[4], sigma_values=[0.0], trials=3,
                      max_outer_iters=5000)
    (row,) = aggregate(run_experiment(spec))
    assert row.mean_rel_error < 1e-6


def test_run_trial_reproducible():
    spec = small_spec()
    point = grid_points(spec)[0]
    a, b = run_trial(spec, point, 1), run_trial(spec, point, 1)
    assert a.deterministic_key() == b.deterministic_key()


def test_htp_benchmark_rows():
    rows = htp_benchmark(trials=5, base_seed=3)
    assert len(rows) == 5
    for r in rows:
        assert r["best_residual"] <= r["htp_residual"] + 1e-9
