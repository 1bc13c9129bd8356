import numpy as np
import pytest

from ictm import GridSpec, LabelField, ScalarField
from ictm.imageio import (
    load_image,
    load_label_map,
    save_image,
    save_label_map,
    save_overlay,
)
from ictm.initializers import initialize
from ictm.synth import bias_profile, split_image, star_image


# ------------------------------------------------------------------- synth


def test_star_clean_is_two_level():
    image, truth = star_image(size=96, bias_strength=0.0, noise_sigma=0.0)
    assert set(np.unique(image.values)) == {0.3, 0.7}
    assert set(np.unique(truth.labels)) == {0, 1}
    # star interior carries the bright level
    assert np.all(image.values[truth.labels == 1] == 0.7)
    # foreground neither vanishes nor dominates
    frac = truth.labels.mean()
    assert 0.1 < frac < 0.6


def test_star_determinism_and_noise_seeding():
    a, _ = star_image(size=64, noise_sigma=0.05, seed=3)
    b, _ = star_image(size=64, noise_sigma=0.05, seed=3)
    c, _ = star_image(size=64, noise_sigma=0.05, seed=4)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_star_bias_sequence_degrades_monotonically():
    clean, _ = star_image(size=64)
    deviations = []
    for strength in (0.0, 0.1, 0.2, 0.3, 0.4):
        biased, _ = star_image(size=64, bias_strength=strength)
        deviations.append(np.abs(biased.values - clean.values).max())
    assert deviations[0] == 0.0
    assert all(b > a for a, b in zip(deviations, deviations[1:]))


def test_star_additive_bias_and_validation():
    image, _ = star_image(size=32, bias_strength=0.2, bias_kind="additive")
    profile = bias_profile(image.grid)
    clean, _ = star_image(size=32)
    assert np.allclose(image.values, clean.values + 0.2 * profile)
    with pytest.raises(ValueError):
        star_image(size=32, bias_kind="divisive")
    with pytest.raises(ValueError):
        star_image(size=32, inner=0.9, outer=0.8)


def test_split_image_levels_and_fraction():
    image, truth = split_image(size=32, levels=(0.1, 0.9), fraction=0.25)
    assert np.all(image.values[:, :8] == 0.1)
    assert np.all(image.values[:, 8:] == 0.9)
    assert np.all(truth.labels[:, 8:] == 1)
    horizontal, _ = split_image(size=32, orientation="horizontal")
    assert np.all(horizontal.values[:16] == 0.0)


# ------------------------------------------------------------- initializers


def test_checkerboard_unit_blocks():
    grid = GridSpec(2, 2, 1.0, 1.0)
    lf = initialize("checkerboard", grid, 2, block=1)
    assert np.array_equal(lf.labels, np.array([[0, 1], [1, 0]]))


def test_circles_single_disk_at_origin():
    grid = GridSpec.default(128, 128)
    lf = initialize("circles", grid, 2, count=1, radius=1.0)
    x, y = grid.coords()
    expected = (x**2 + y**2 < 1.0).astype(int)
    assert np.array_equal(lf.labels, expected)


def test_circles_disjoint_and_phases_cycle():
    grid = GridSpec.default(96, 96)
    lf = initialize("circles", grid, 3, count=4)
    assert lf.occupied_phases() == 3
    # background majority, circles disjoint (counts match individual disks)
    assert lf.phase_counts()[0] > lf.grid.num_pixels / 2


def test_stripes():
    grid = GridSpec.default(12, 4)
    lf = initialize("stripes", grid, 3, width=2)
    assert np.array_equal(lf.labels[0, :6], [0, 0, 1, 1, 2, 2])


def test_random_seeded():
    grid = GridSpec.default(16, 16)
    a = initialize("random", grid, 4, seed=11)
    b = initialize("random", grid, 4, seed=11)
    c = initialize("random", grid, 4, seed=12)
    assert np.array_equal(a.labels, b.labels)
    assert not np.array_equal(a.labels, c.labels)


def test_initializer_errors():
    grid = GridSpec.default(8, 8)
    with pytest.raises(ValueError):
        initialize("spiral", grid, 2)
    with pytest.raises(ValueError):
        initialize("checkerboard", grid, 2, block=2, bogus=1)


def test_from_file_round_trip(tmp_path):
    grid = GridSpec.default(16, 16)
    rng = np.random.default_rng(0)
    lf = LabelField(grid, 3, rng.integers(0, 3, grid.shape))
    path = tmp_path / "labels.png"
    save_label_map(path, lf)
    again = initialize("from-file", grid, 3, path=path)
    assert np.array_equal(again.labels, lf.labels)


# -------------------------------------------------------------------- images


def test_label_map_round_trip_exact(tmp_path):
    rng = np.random.default_rng(5)
    grid = GridSpec.default(33, 17)
    lf = LabelField(grid, 5, rng.integers(0, 5, grid.shape))
    path = tmp_path / "labels.png"
    save_label_map(path, lf)
    again = load_label_map(path, 5)
    assert np.array_equal(again.labels, lf.labels)
    assert again.num_phases == 5


def test_load_image_grayscale_range(tmp_path):
    from PIL import Image

    arr = np.arange(256, dtype=np.uint8).reshape(16, 16)
    path = tmp_path / "gray.png"
    Image.fromarray(arr, mode="L").save(path)
    field = load_image(path)
    assert field.values.min() == 0.0 and field.values.max() == 255.0
    assert field.grid.width == 16


def test_load_image_rgb_takes_channel_mean(tmp_path):
    from PIL import Image

    rgb = np.zeros((8, 8, 3), dtype=np.uint8)
    rgb[..., 0] = 30
    rgb[..., 1] = 60
    rgb[..., 2] = 90
    path = tmp_path / "rgb.png"
    Image.fromarray(rgb, mode="RGB").save(path)
    field = load_image(path)
    assert np.allclose(field.values, 60.0)


def test_load_image_pgm(tmp_path):
    path = tmp_path / "img.pgm"
    path.write_bytes(b"P5\n4 4\n255\n" + bytes(range(16)))
    field = load_image(path)
    assert field.values[0, 1] == 1.0


def test_load_image_errors(tmp_path):
    with pytest.raises(FileNotFoundError, match="missing.png"):
        load_image(tmp_path / "missing.png")
    bad = tmp_path / "broken.png"
    bad.write_bytes(b"not an image at all")
    with pytest.raises(ValueError, match="broken.png"):
        load_image(bad)


def test_save_image_round_trip(tmp_path):
    grid = GridSpec.default(16, 16)
    rng = np.random.default_rng(2)
    field = ScalarField(grid, rng.random(grid.shape))
    path = tmp_path / "field.png"
    save_image(path, field)
    again = load_image(path)
    assert np.abs(again.values / 255.0 - field.values).max() <= 0.5 / 255 + 1e-12


def test_overlay_written(tmp_path):
    image, truth = star_image(size=32)
    path = tmp_path / "overlay.png"
    save_overlay(path, image, truth)
    assert path.exists() and path.stat().st_size > 0
