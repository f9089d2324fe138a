import numpy as np
import pytest
from scipy import stats

from adlkit import (
    ArgumentError,
    HeightField,
    Minimum,
    SimConfig,
    SimResult,
    detect_entry_time,
    eval_loss,
    make_convex_paraboloid,
    numerical_gradient,
    run_sgd,
    sweep,
)


def plane_field(n=65, slope_x=1.0, slope_y=0.0, extent=1.0):
    xs = np.linspace(0.0, extent, n)
    return HeightField(values=slope_x * xs[:, None] + slope_y * xs[None, :], extent=extent)


def constant_field(n=65, value=0.5, extent=1.0):
    return HeightField(values=np.full((n, n), value), extent=extent)


# -- config validation -------------------------------------------------------

@pytest.mark.parametrize("kwargs", [
    dict(eta=0.0, sigma=0.1),
    dict(eta=0.1, sigma=-0.1),
    dict(eta=0.1, sigma=0.1, n_steps=0),
    dict(eta=0.1, sigma=0.1, boundary="wrap"),
    dict(eta=0.1, sigma=0.1, start="downhill"),
    dict(eta=0.1, sigma=0.1, start=(0.5, 0.5, 0.5)),
])
def test_config_rejected(kwargs):
    with pytest.raises(ArgumentError):
        SimConfig(**kwargs)


def test_config_dict_round_trip():
    cfg = SimConfig(eta=0.02, sigma=0.01, n_steps=77, seed=9, start=(0.25, 0.75),
                    boundary="clamp")
    assert SimConfig.from_dict(cfg.to_dict()) == cfg
    cfg = SimConfig(eta=0.02, sigma=0.01)
    assert SimConfig.from_dict(cfg.to_dict()) == cfg


# -- deterministic dynamics --------------------------------------------------

def test_frozen_on_constant_field():
    field = constant_field()
    res = run_sgd(field, SimConfig(eta=0.1, sigma=0.0, n_steps=50, start=(0.4, 0.6)))
    assert res.trajectory.n_steps == 51
    assert np.all(res.trajectory.frames == res.trajectory.frames[0])
    assert not res.escaped


def test_noiseless_descent_contracts_to_center():
    # gradient flow on c |w - center|^2 contracts distance by (1 - 2 eta c)
    # per step up to bilinear interpolation error in the gradient
    c = 1.0
    field = make_convex_paraboloid(257, curvature=c)
    eta = 0.05
    res = run_sgd(field, SimConfig(eta=eta, sigma=0.0, n_steps=200, start=(0.3, 0.35)))
    center = np.array([0.5, 0.5])
    dist = np.linalg.norm(res.trajectory.frames - center, axis=1)
    ratio = dist[1:50] / dist[:49]
    assert np.all(ratio < 1.0)
    assert np.median(ratio) == pytest.approx(1 - 2 * eta * c, abs=0.02)
    assert dist[-1] < 0.01
    diffs = np.diff(res.trajectory.losses)
    assert np.all(diffs <= 1e-12)


def test_channels_match_field_evaluation():
    field = make_convex_paraboloid(129, curvature=2.0)
    res = run_sgd(field, SimConfig(eta=0.03, sigma=0.5, n_steps=40, seed=3,
                                   start=(0.7, 0.4)))
    traj = res.trajectory
    for t in (0, 1, 17, 40):
        pos = traj.frames[t]
        assert traj.losses[t] == eval_loss(field, pos)
        assert np.array_equal(traj.gradients[t], numerical_gradient(field, pos))


def test_run_deterministic_per_seed():
    field = make_convex_paraboloid(65)
    cfg = SimConfig(eta=0.02, sigma=0.3, n_steps=100, seed=12)
    a = run_sgd(field, cfg)
    b = run_sgd(field, cfg)
    assert np.array_equal(a.trajectory.frames, b.trajectory.frames)
    assert np.array_equal(a.trajectory.losses, b.trajectory.losses)
    other = run_sgd(field, SimConfig(eta=0.02, sigma=0.3, n_steps=100, seed=13))
    assert not np.array_equal(a.trajectory.frames, other.trajectory.frames)


def test_high_altitude_start_lands_in_top_decile():
    field = make_convex_paraboloid(65)  # high ground is the rim
    for seed in range(5):
        res = run_sgd(field, SimConfig(eta=0.01, sigma=0.0, n_steps=1, seed=seed))
        start_val = eval_loss(field, res.trajectory.frames[0])
        assert start_val >= np.quantile(field.values, 0.9) - 1e-9


# -- noise statistics --------------------------------------------------------

def test_zero_gradient_steps_are_rayleigh():
    # on a flat field the step length is |eta sigma Z|, Z standard 2-D normal
    field = constant_field()
    eta, sigma = 0.01, 0.3
    res = run_sgd(field, SimConfig(eta=eta, sigma=sigma, n_steps=2000, seed=5,
                                   start=(0.5, 0.5)))
    steps = np.linalg.norm(np.diff(res.trajectory.frames, axis=0), axis=1)
    ks = stats.kstest(steps, stats.rayleigh(scale=eta * sigma).cdf)
    assert ks.pvalue > 0.01


# -- boundary policies -------------------------------------------------------

def test_boundary_abort_stops_early():
    field = plane_field(slope_x=1.0)  # constant push toward x = 0
    cfg = SimConfig(eta=0.05, sigma=0.0, n_steps=100, start=(0.2, 0.5),
                    boundary="abort")
    res = run_sgd(field, cfg)
    assert res.escaped
    assert res.trajectory.n_steps < 101
    h = field.spacing
    assert np.all(res.trajectory.frames[:, 0] >= h - 1e-12)


def test_boundary_clamp_pins_to_edge():
    field = plane_field(slope_x=1.0)
    cfg = SimConfig(eta=0.05, sigma=0.0, n_steps=100, start=(0.2, 0.5),
                    boundary="clamp")
    res = run_sgd(field, cfg)
    assert not res.escaped
    assert res.trajectory.n_steps == 101
    h = field.spacing
    assert res.trajectory.frames[-1, 0] == pytest.approx(h)
    assert np.all(res.trajectory.frames[:, 0] >= h - 1e-12)


def test_boundary_reflect_stays_inside():
    field = constant_field(n=33)
    cfg = SimConfig(eta=0.2, sigma=2.0, n_steps=500, seed=1, start=(0.5, 0.5),
                    boundary="reflect")
    res = run_sgd(field, cfg)
    h = field.spacing
    assert np.all(res.trajectory.frames >= h - 1e-12)
    assert np.all(res.trajectory.frames <= 1.0 - h + 1e-12)
    assert res.trajectory.n_steps == 501


def test_explicit_start_outside_walkable_region_rejected():
    field = constant_field(n=33)
    with pytest.raises(ArgumentError):
        run_sgd(field, SimConfig(eta=0.1, sigma=0.0, start=(0.0, 0.5)))


# -- entry detection ---------------------------------------------------------

def _result_from_frames(frames):
    cfg = SimConfig(eta=0.1, sigma=0.0, start=(0.5, 0.5))
    from adlkit import Trajectory

    return SimResult(trajectory=Trajectory(frames=np.asarray(frames, dtype=float)),
                     entry_step=None, escaped=False, config=cfg)


def brute_force_entry(frames, center, radius, dwell):
    frames = np.asarray(frames, dtype=float)
    inside = np.linalg.norm(frames - center, axis=1) <= radius
    for t in range(1, len(frames) + 1):
        if t - 1 + dwell < len(frames) and inside[t - 1 : t + dwell].all():
            return t
    return None


def test_entry_detection_with_blip():
    center = np.array([0.5, 0.5])
    minimum = Minimum(position=(0.5, 0.5), value=0.0, width_estimate=0.1)
    far, near = [0.9, 0.5], [0.55, 0.5]
    # enters, pops out once, then settles
    frames = [far, far, near, near, [0.7, 0.5], near, near, near, near, near, near]
    res = _result_from_frames(frames)
    got = detect_entry_time(res, minimum, dwell=3)
    assert got == brute_force_entry(frames, center, 0.1, 3) == 6


def test_entry_detection_edge_cases():
    minimum = Minimum(position=(0.5, 0.5), value=0.0, width_estimate=0.1)
    inside = [[0.5, 0.5]] * 8
    assert detect_entry_time(_result_from_frames(inside), minimum, dwell=4) == 1
    outside = [[0.9, 0.9]] * 8
    assert detect_entry_time(_result_from_frames(outside), minimum, dwell=4) is None
    with pytest.raises(ArgumentError):
        detect_entry_time(_result_from_frames(inside), minimum, dwell=8)
    with pytest.raises(ArgumentError):
        detect_entry_time(_result_from_frames(inside), minimum, dwell=0)


def test_entry_matches_descent_brute_force():
    field = make_convex_paraboloid(257, curvature=1.0)
    from adlkit import detect_minima

    minimum = detect_minima(field)[0]
    res = run_sgd(field, SimConfig(eta=0.02, sigma=0.0, n_steps=300, start=(0.15, 0.2)))
    got = detect_entry_time(res, minimum, dwell=50)
    want = brute_force_entry(res.trajectory.frames, np.asarray(minimum.position),
                             minimum.width_estimate, 50)
    assert got == want is not None


# -- sweeps ------------------------------------------------------------------

def test_sweep_preserves_order_and_matches_serial(monkeypatch):
    field = make_convex_paraboloid(65)
    configs = [SimConfig(eta=0.02, sigma=0.4, n_steps=60, seed=s) for s in range(6)]
    monkeypatch.delenv("ADL_THREADS", raising=False)
    serial = sweep(field, configs)
    assert [r.config.seed for r in serial] == list(range(6))
    monkeypatch.setenv("ADL_THREADS", "4")
    parallel = sweep(field, configs)
    for a, b in zip(serial, parallel):
        assert np.array_equal(a.trajectory.frames, b.trajectory.frames)


def test_sweep_tags_failing_config(monkeypatch):
    field = constant_field(n=33)
    good = SimConfig(eta=0.1, sigma=0.0, start=(0.5, 0.5))
    bad = SimConfig(eta=0.1, sigma=0.0, start=(0.9999, 0.5))  # outside walkable inset
    monkeypatch.delenv("ADL_THREADS", raising=False)
    with pytest.raises(ArgumentError, match=r"config\[1\]"):
        sweep(field, [good, bad])
