import math

import numpy as np
import pytest

from lazyier.experiments import (
    StudyConfig,
    StudyError,
    StudyRow,
    StudyResult,
    desk_config,
    fit_log_scaling,
    full_config,
    replicate_seed,
    run_changepoint_study,
    run_community_study,
    run_concentration_study,
    run_study,
    substream,
    summarize,
)


def small(study, **kw):
    base = dict(n=40, T=6, replicates=3, alpha_grid=(0.0, 0.5), master_seed=7)
    if study == "concentration":
        base.update(sbm_pairs=((7.0, 1.0),), graphon_k=(6.0,))
    elif study == "community":
        base.update(ab_pairs=((12.0, 1.0),))
    else:
        base.update(k_scale=6.0, delta_e=(20,), delta_p=(0.3,), tau=3, Lambda=1)
    base.update(kw)
    return StudyConfig(study, **base)


@pytest.mark.parametrize("study", ["concentration", "community", "changepoint"])
def test_row_count_and_determinism(study):
    cfg = small(study)
    a, b = run_study(cfg), run_study(cfg)
    metrics = {"concentration": 2, "community": 2, "changepoint": 1}[study]
    assert len(a.rows) == len(cfg.cells()) * cfg.replicates * metrics
    assert [(r.cell_id, r.replicate, r.metric, r.value) for r in a.rows] == \
           [(r.cell_id, r.replicate, r.metric, r.value) for r in b.rows]


def test_workers_do_not_change_rows():
    cfg = small("concentration")
    a, b = run_study(cfg, workers=1), run_study(cfg, workers=2)
    assert [r.value for r in a.rows] == [r.value for r in b.rows]


def test_single_replicate_rerun():
    cfg = small("community", replicates=1)
    assert [r.value for r in run_study(cfg).rows] == [r.value for r in run_study(cfg).rows]


def test_master_seed_changes_values():
    a = run_study(small("concentration"))
    b = run_study(small("concentration", master_seed=8))
    assert [r.value for r in a.rows] != [r.value for r in b.rows]


def test_replicate_seeds_injective():
    seeds = {replicate_seed(m, c, r) for m in (0, 1, 2**32 - 1) for c in range(30) for r in range(30)}
    assert len(seeds) == 3 * 30 * 30
    with pytest.raises(StudyError):
        replicate_seed(0, 2**16, 0)
    tags = {substream(replicate_seed(5, 1, r), t) for r in range(50) for t in range(4)}
    assert len(tags) == 200


def test_summary_recomputable():
    result = run_study(small("concentration", replicates=4))
    for s in result.summary:
        vals = np.array([r.value for r in result.rows if r.cell_id == s.cell_id and r.metric == s.metric
                         and not r.error_tag])
        assert s.mean == pytest.approx(vals.mean())
        assert s.se == pytest.approx(vals.std(ddof=1) / math.sqrt(vals.size))
        assert s.n_ok + s.n_err == 4


def test_error_rows_excluded_and_tallied():
    rows = [StudyRow("c000", {"alpha": 0.0}, 0, "m", 1.0),
            StudyRow("c000", {"alpha": 0.0}, 1, "m", 3.0),
            StudyRow("c000", {"alpha": 0.0}, 2, "m", math.nan, "ZeroDegreeError")]
    res = StudyResult("concentration", rows)
    (s,) = res.summary
    assert (s.mean, s.n_ok, s.n_err) == (2.0, 2, 1)
    assert res.error_tally() == {"ZeroDegreeError": 1}
    (lone,) = summarize(rows[:1])
    assert math.isnan(lone.se)


def test_sparse_graphs_record_zero_degree():
    cfg = small("concentration", n=60, T=1, sbm_pairs=((0.5, 0.1),), graphon_k=())
    tally = run_study(cfg).error_tally()
    assert tally.get("ZeroDegreeError", 0) > 0


def test_disconnected_blocks_community():
    cfg = small("community", ab_pairs=((20.0, 0.0),), alpha_grid=(0.0,), T=5)
    assert all(r.value == 0.0 for r in run_study(cfg).rows)


def test_no_signal_changepoint_contract():
    cfg = small("changepoint", delta_p=(0.0,), T=12, tau=6, Lambda=2)
    for r in run_study(cfg).rows:
        assert 0 <= r.value <= cfg.T


def test_typed_runners_check_study():
    with pytest.raises(StudyError):
        run_community_study(small("concentration"))
    assert run_concentration_study(small("concentration")).study == "concentration"
    assert run_changepoint_study(small("changepoint")).study == "changepoint"


@pytest.mark.parametrize(
    "kw",
    [dict(replicates=0), dict(alpha_grid=(1.0,)), dict(alpha_grid=()), dict(sbm_pairs=(), graphon_k=())],
)
def test_config_validation(kw):
    with pytest.raises(StudyError):
        small("concentration", **kw)


def test_config_dict_round_trip():
    for study in ("concentration", "community", "changepoint"):
        for cfg in (desk_config(study), full_config(study)):
            assert StudyConfig.from_dict(cfg.to_dict()) == cfg


def test_cells_alpha_fastest():
    cells = small("community", ab_pairs=((7.0, 3.0), (8.0, 2.0))).cells()
    assert [c["alpha"] for c in cells] == [0.0, 0.5, 0.0, 0.5]
    assert cells[0]["gamma"] == pytest.approx(16 / 20)


def test_fit_exact_power_law():
    alphas = np.array([0.0, 0.5, 0.8, 0.9, 0.95])
    fit = fit_log_scaling(alphas, 3.0 / np.sqrt(1 - alphas))
    assert fit.slope == pytest.approx(0.5, abs=1e-10)
    assert fit.r2 == pytest.approx(1.0, abs=1e-10)
    assert fit.intercept == pytest.approx(math.log(3.0))


def test_fit_constant():
    fit = fit_log_scaling([0.0, 0.3, 0.6], [2.0, 2.0, 2.0])
    assert fit.slope == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("alphas", [[0.3, 0.6, 0.9], [0.0, 0.5]])
def test_fit_rejects_degenerate_grid(alphas):
    with pytest.raises(StudyError):
        fit_log_scaling(alphas, np.ones(len(alphas)))


def test_degree_scaling_collapses():
    cfg = StudyConfig("concentration", n=200, T=20, replicates=5, alpha_grid=(0.0,), master_seed=3,
                      sbm_pairs=((7.0, 1.0), (9.0, 3.0)))
    means = [s.mean for s in run_study(cfg).summary if s.metric == "adj_dev"]
    assert max(means) <= 2 * min(means)
