"""Toy-experiment pipeline: terrain selection gate, per-trial regime
split, pooled gradient tails, and the two control runs."""

import numpy as np
import pytest

from adlkit import (
    DataError,
    detect_regime_change_t0,
    ToyModelConfig,
    TrialOutcome,
    detect_minima,
    generate_fractal_terrain,
    run_toy_model,
    select_fractal_landscape,
)


@pytest.fixture(scope="module")
def report():
    return run_toy_model(ToyModelConfig())


# -- landscape selection gate -------------------------------------------------

def test_default_terrain_passes_gate():
    config = ToyModelConfig()
    field = generate_fractal_terrain(
        n=config.landscape_n, roughness=config.roughness, seed=config.landscape_seed
    )
    lo, hi = config.margin, field.extent - config.margin
    qualifying = [
        m for m in detect_minima(field)
        if m.value <= config.value_max
        and m.width_estimate >= config.width_min
        and lo <= m.position[0] <= hi
        and lo <= m.position[1] <= hi
    ]
    assert qualifying, "calibrated terrain lost its wide low minimum"


def test_select_scan_returns_first_qualifying_seed():
    config = ToyModelConfig()
    field, minimum = select_fractal_landscape(
        n=config.landscape_n,
        roughness=config.roughness,
        width_min=config.width_min,
        margin=config.margin,
        base_seed=config.landscape_seed,
        value_max=config.value_max,
    )
    assert field.seed == config.landscape_seed
    assert minimum.width_estimate >= config.width_min
    assert minimum.value <= config.value_max


def test_select_impossible_width_raises():
    with pytest.raises(DataError):
        select_fractal_landscape(
            n=65, roughness=0.9, width_min=1.0, margin=0.15, base_seed=0, max_tries=3
        )


def test_pinned_seed_failing_gate_raises():
    with pytest.raises(DataError):
        run_toy_model(ToyModelConfig(width_min=1.0))


# -- trial outcome logic ------------------------------------------------------

@pytest.mark.parametrize("pre,post,expected", [
    (1.5, 0.3, True),
    (0.9, 0.3, False),
    (1.5, 1.1, False),
    (None, 0.3, False),
    (1.5, None, False),
])
def test_regime_pass_rule(pre, post, expected):
    out = TrialOutcome(seed=0, entry_step=100, alpha_pre=pre, alpha_post=post)
    assert out.regime_pass is expected


# -- the calibrated experiment ------------------------------------------------

def test_report_structure(report):
    config = report.config
    assert report.landscape_seed == config.landscape_seed
    assert len(report.trials) == config.trials
    assert len(report.runs) == config.trials
    assert [t.seed for t in report.trials] == list(range(config.trials))
    for t in report.trials:
        if t.alpha_pre is not None:
            assert 8 <= t.entry_step <= config.n_steps - 60


def test_regime_split_majority(report):
    assert report.n_regime_pass >= 8


def test_pooled_gradients_heavy_tailed(report):
    fit = report.gradient_fit
    assert 1.6 <= fit.params.alpha_dist < 2.0
    assert fit.llr > 0.0


def test_convex_control_ballistic(report):
    assert report.convex.alpha == pytest.approx(2.0, abs=0.2)
    assert report.convex.msd.y[0] > 0


def test_convex_gradients_lighter_than_fractal(report):
    convex = report.convex.gradient_fit
    assert convex is not None
    assert report.gradient_fit.params.alpha_dist < convex.params.alpha_dist


def test_shuffled_control_traps(report):
    assert report.shuffled.alpha < 1.0
    assert report.shuffled.trap_fraction >= 0.8


def test_mean_curves_present(report):
    for series in (report.msd_pre, report.msd_post):
        assert series is not None
        assert np.all(np.diff(series.x) > 0)
        assert np.all(series.y >= 0)


def test_regime_change_brackets_entry(report):
    """The window-scan changepoint and the dwell-based basin entry are
    independent detectors of the same event; they should agree to ~50%
    on a trial with a mid-run entry."""
    trial = next(t for t in report.trials if t.entry_step and 100 <= t.entry_step <= 300)
    run = report.runs[trial.seed]
    t0 = detect_regime_change_t0(run.trajectory, T=200).t0
    assert t0 is not None
    assert 0.5 * trial.entry_step <= t0 <= 1.5 * trial.entry_step
