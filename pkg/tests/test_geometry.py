import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ptmlens.geometry import (
    ConfigError,
    FeedModel,
    FieldRegion,
    SystemConfig,
    cartesian_to_spherical,
    classify_field_region,
    config_from_dict,
    config_to_dict,
    lens_aperture,
    load_config,
    region_bounds,
    spherical_to_cartesian,
)


def test_region_bounds_closed_form():
    D, lam = 0.2546, 0.075
    inner, outer = region_bounds(D, lam)
    assert_allclose(inner, 0.62 * math.sqrt(D**3 / lam), rtol=1e-12)
    assert_allclose(outer, 2 * D**2 / lam, rtol=1e-12)
    assert_allclose([inner, outer], [0.2908, 1.7285], rtol=2e-4)


def test_classification_boundaries(cfg):
    inner, outer = region_bounds(cfg.max_dimension, cfg.wavelength)
    assert classify_field_region(inner, cfg) is FieldRegion.REACTIVE_NEAR
    assert classify_field_region(inner * 1.0001, cfg) is FieldRegion.RADIATIVE_NEAR
    assert classify_field_region(outer * 0.9999, cfg) is FieldRegion.RADIATIVE_NEAR
    assert classify_field_region(outer, cfg) is FieldRegion.FAR
    with pytest.raises(ConfigError):
        classify_field_region(0.0, cfg)
    with pytest.raises(ConfigError):
        classify_field_region(-1.0, cfg)


def test_default_config_derived_values(cfg):
    assert_allclose(cfg.wavelength, 0.07494811, rtol=1e-7)
    assert cfg.aperture_size == pytest.approx((0.18, 0.18))
    assert_allclose(cfg.max_dimension, 0.18 * math.sqrt(2))
    assert cfg.far_radius == pytest.approx(10 * 2 * cfg.max_dimension**2 / cfg.wavelength)


def test_aperture_layout_row_major_top_left_first(cfg):
    cells = lens_aperture(cfg)
    assert cells.shape == (36, 3)
    assert_allclose(cells[0], [-0.075, 0.075, 0.0])
    assert_allclose(cells[5], [0.075, 0.075, 0.0])
    assert_allclose(cells[6], [-0.075, 0.045, 0.0])
    assert_allclose(cells[-1], [0.075, -0.075, 0.0])
    assert_allclose(cells[:, :2].mean(axis=0), [0, 0], atol=1e-15)


def test_spherical_roundtrip():
    r = np.array([1.0, 2.5, 10.0])
    th = np.array([0.1, 1.2, 2.9])
    ph = np.array([0.0, 2.0, 5.5])
    xyz = spherical_to_cartesian(r, th, ph)
    r2, th2, ph2 = cartesian_to_spherical(xyz)
    assert_allclose(r2, r)
    assert_allclose(th2, th)
    assert_allclose(np.mod(ph2, 2 * np.pi), ph)


def test_spherical_rejects_negative_radius():
    with pytest.raises(ValueError):
        spherical_to_cartesian(-1.0, 0.0, 0.0)


@pytest.mark.parametrize(
    "kwargs",
    [dict(frequency=0.0), dict(rows=0), dict(cell_pitch=-0.01), dict(back_lobe_leakage=-0.1)],
)
def test_invalid_config(kwargs):
    with pytest.raises(ConfigError):
        SystemConfig(**kwargs)


def test_feed_must_sit_behind_lens():
    with pytest.raises(ConfigError):
        FeedModel(position=(0.0, 0.0, 0.01))


def test_with_feed_distance(cfg):
    c = cfg.with_feed_distance(0.0503)
    assert c.feed.position == (0.0, 0.0, -0.0503)
    assert c.frequency == cfg.frequency


def test_config_json_roundtrip(tmp_path, cfg):
    c = SystemConfig(frequency=3.7e9, rows=4, cols=5, feed=FeedModel((0.01, 0.0, -0.06), 2.0))
    doc = config_to_dict(c)
    assert config_from_dict(json.loads(json.dumps(doc))) == c
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"frequency_hz": 3.9e9}))
    assert load_config(p) == SystemConfig(frequency=3.9e9)


def test_config_unknown_key_rejected():
    with pytest.raises(ConfigError):
        config_from_dict({"frequncy_hz": 4e9})
