import numpy as np
import pytest

from adlkit import (
    ArgumentError,
    BoundaryError,
    DataError,
    HeightField,
    OutOfBoundsError,
    binarize,
    box_counting_dimension,
    detect_minima,
    eval_loss,
    generate_fractal_terrain,
    level_contour,
    make_convex_paraboloid,
    numerical_gradient,
    shuffle_and_smooth,
)
from synth import sierpinski_mask


# -- fractal terrain ---------------------------------------------------------

def test_terrain_deterministic():
    a = generate_fractal_terrain(n=5, roughness=0.5, seed=1)
    b = generate_fractal_terrain(n=5, roughness=0.5, seed=1)
    assert np.array_equal(a.values, b.values)


def test_terrain_normalized():
    f = generate_fractal_terrain(n=65, roughness=0.4, seed=9)
    assert f.values.min() == 0.0
    assert f.values.max() == 1.0


def test_terrain_rejects_bad_args():
    with pytest.raises(ArgumentError):
        generate_fractal_terrain(n=6, roughness=0.5, seed=0)
    with pytest.raises(ArgumentError):
        generate_fractal_terrain(n=3, roughness=0.5, seed=0)
    with pytest.raises(ArgumentError):
        generate_fractal_terrain(n=17, roughness=1.0, seed=0)
    with pytest.raises(ArgumentError):
        generate_fractal_terrain(n=17, roughness=0.0, seed=0)


def test_rougher_terrain_for_smaller_h():
    lo = generate_fractal_terrain(n=257, roughness=0.2, seed=7)
    hi = generate_fractal_terrain(n=257, roughness=0.8, seed=7)

    def increment_std(f):
        return np.std(np.diff(f.values, axis=0))

    assert increment_std(lo) > increment_std(hi)


def test_contour_dimension_decreases_with_h():
    # average over seeds: the level-set contour of smoother terrain has a
    # lower box-counting dimension
    def mean_dim(h):
        dims = []
        for seed in range(10):
            f = generate_fractal_terrain(n=129, roughness=h, seed=seed)
            mask = level_contour(f)
            dims.append(box_counting_dimension(mask, (1, 2, 4, 8, 16)).dimension)
        return np.mean(dims)

    assert mean_dim(0.2) > mean_dim(0.8)


# -- paraboloid --------------------------------------------------------------

def test_paraboloid_center_zero():
    f = make_convex_paraboloid(n=33, curvature=1.0)
    mid = 16
    assert f.values[mid, mid] == 0.0


def test_paraboloid_corner_value():
    f = make_convex_paraboloid(n=33, curvature=1.0)
    assert f.values[0, 0] == pytest.approx(0.5, abs=1e-12)


def test_paraboloid_linear_in_curvature():
    a = make_convex_paraboloid(n=17, curvature=1.0)
    b = make_convex_paraboloid(n=17, curvature=2.0)
    assert np.allclose(b.values, 2.0 * a.values)


def test_paraboloid_rejects_nonpositive_curvature():
    with pytest.raises(ArgumentError):
        make_convex_paraboloid(n=17, curvature=0.0)


# -- shuffle and smooth ------------------------------------------------------

def test_shuffle_smooth_constant_field():
    f = HeightField(values=np.full((9, 9), 0.7))
    out = shuffle_and_smooth(f, kernel_sigma=2.0, seed=3)
    assert np.allclose(out.values, 0.7, atol=1e-12)


def test_shuffle_smooth_preserves_mean():
    f = generate_fractal_terrain(n=65, roughness=0.5, seed=2)
    out = shuffle_and_smooth(f, kernel_sigma=8.0, seed=3)
    assert out.values.mean() == pytest.approx(f.values.mean(), abs=1e-9)


def test_shuffle_smooth_deterministic():
    f = generate_fractal_terrain(n=33, roughness=0.5, seed=2)
    a = shuffle_and_smooth(f, kernel_sigma=8.0, seed=3)
    b = shuffle_and_smooth(f, kernel_sigma=8.0, seed=3)
    assert np.array_equal(a.values, b.values)


# -- evaluation and gradient -------------------------------------------------

def test_eval_loss_at_nodes():
    f = generate_fractal_terrain(n=17, roughness=0.5, seed=4)
    h = f.spacing
    assert eval_loss(f, (3 * h, 11 * h)) == pytest.approx(f.values[3, 11], abs=1e-12)


def test_eval_loss_cell_midpoint():
    values = np.zeros((3, 3))
    values[1, 1] = 1.0
    values[0, 0] = 0.0
    # cell with corners 0,0,1,1 along one edge pair
    values[0, 1] = 1.0
    f = HeightField(values=values)
    h = f.spacing
    assert eval_loss(f, (0.5 * h, 0.5 * h)) == pytest.approx(0.5, abs=1e-12)


def test_eval_loss_constant_field():
    f = HeightField(values=np.full((5, 5), 2.5))
    assert eval_loss(f, (0.3, 0.6)) == pytest.approx(2.5, abs=1e-12)


def test_eval_loss_out_of_bounds():
    f = HeightField(values=np.zeros((5, 5)))
    with pytest.raises(OutOfBoundsError):
        eval_loss(f, (1.2, 0.5))


def test_gradient_constant_field():
    f = HeightField(values=np.full((9, 9), 1.0))
    assert np.allclose(numerical_gradient(f, (0.5, 0.5)), 0.0)


def test_gradient_paraboloid_center():
    f = make_convex_paraboloid(n=33, curvature=1.0)
    g = numerical_gradient(f, (0.5, 0.5))
    assert np.allclose(g, 0.0, atol=1e-12)


def test_gradient_exact_on_plane():
    n = 17
    coords = np.arange(n) / (n - 1)
    values = 3.0 * coords[:, None] + 4.0 * coords[None, :]
    f = HeightField(values=values)
    for pos in ((0.3, 0.4), (0.11, 0.77), (0.5, 0.5)):
        g = numerical_gradient(f, pos)
        assert g == pytest.approx([3.0, 4.0], abs=1e-9)


def test_gradient_boundary_error():
    f = HeightField(values=np.zeros((9, 9)))
    with pytest.raises(BoundaryError):
        numerical_gradient(f, (0.01, 0.5))


def test_gradient_matches_half_cell_differences():
    f = make_convex_paraboloid(n=65, curvature=1.0)
    h = f.spacing
    for pos in ((0.31, 0.44), (0.62, 0.25)):
        g = numerical_gradient(f, np.asarray(pos))
        fd_x = (eval_loss(f, (pos[0] + h / 2, pos[1]))
                - eval_loss(f, (pos[0] - h / 2, pos[1]))) / h
        fd_y = (eval_loss(f, (pos[0], pos[1] + h / 2))
                - eval_loss(f, (pos[0], pos[1] - h / 2))) / h
        assert g == pytest.approx([fd_x, fd_y], abs=1e-6)


# -- minima ------------------------------------------------------------------

def test_detect_minima_paraboloid():
    f = make_convex_paraboloid(n=33, curvature=1.0)
    minima = detect_minima(f)
    assert len(minima) == 1
    assert minima[0].position == pytest.approx((0.5, 0.5), abs=1e-12)
    assert minima[0].value == 0.0
    assert minima[0].width_estimate > 0


def test_detect_minima_two_wells_sorted():
    n = 65
    coords = np.arange(n) / (n - 1)
    xx, yy = np.meshgrid(coords, coords, indexing="ij")
    ambient = 1.0
    well_a = 0.2 * np.exp(-(((xx - 0.25) ** 2 + (yy - 0.25) ** 2) / 0.005))
    well_b = 0.5 * np.exp(-(((xx - 0.75) ** 2 + (yy - 0.75) ** 2) / 0.005))
    f = HeightField(values=ambient - well_a - well_b)
    minima = detect_minima(f)
    assert len(minima) == 2
    assert minima[0].value < minima[1].value
    assert minima[0].position == pytest.approx((0.75, 0.75), abs=0.02)
    assert minima[1].position == pytest.approx((0.25, 0.25), abs=0.02)


def test_detect_minima_constant_field():
    assert detect_minima(HeightField(values=np.ones((9, 9)))) == []


# -- box counting ------------------------------------------------------------

def test_box_counting_full_square():
    mask = np.ones((64, 64), dtype=bool)
    r = box_counting_dimension(mask, (1, 2, 4, 8, 16))
    assert r.dimension == pytest.approx(2.0, abs=0.05)


def test_box_counting_single_line():
    mask = np.zeros((64, 64), dtype=bool)
    mask[10, :] = True
    r = box_counting_dimension(mask, (1, 2, 4, 8, 16))
    assert r.dimension == pytest.approx(1.0, abs=0.05)


def test_box_counting_sierpinski():
    mask = sierpinski_mask(5)
    assert mask.shape == (243, 243)
    r = box_counting_dimension(mask, (1, 3, 9, 27, 81))
    assert r.dimension == pytest.approx(np.log(8) / np.log(3), abs=0.08)


def test_box_counting_rotation_invariant():
    mask = sierpinski_mask(3)
    scales = (1, 3, 9, 27)
    base = box_counting_dimension(mask, scales).dimension
    assert box_counting_dimension(mask.T, scales).dimension == base
    assert box_counting_dimension(np.rot90(mask), scales).dimension == base


def test_box_counting_rejects():
    with pytest.raises(DataError):
        box_counting_dimension(np.zeros((16, 16), dtype=bool), (1, 2, 4, 8))
    with pytest.raises(ArgumentError):
        box_counting_dimension(np.ones((16, 16), dtype=bool), (1, 2, 4))


def test_binarize_median_default():
    f = generate_fractal_terrain(n=33, roughness=0.5, seed=0)
    mask = binarize(f)
    frac = mask.mean()
    assert 0.4 < frac < 0.6
