"""Unit conversions, seeded random streams, and configuration validation."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fdlink.config_units import (ConfigError, Rng, SystemConfig,
                                 complex_normal, db_to_linear, dbm_to_linear,
                                 default_config, linear_to_db, linear_to_dbm,
                                 preset)


# --- unit helpers ----------------------------------------------------------

def test_dbm_anchors():
    assert dbm_to_linear(0.0) == pytest.approx(1e-3)
    assert dbm_to_linear(30.0) == pytest.approx(1.0)
    assert dbm_to_linear(-100.0) == pytest.approx(1e-13)
    assert linear_to_dbm(1.0) == pytest.approx(30.0)
    assert db_to_linear(3.0) == pytest.approx(10 ** 0.3)


@given(st.floats(min_value=-150.0, max_value=80.0))
def test_dbm_round_trip(p_dbm):
    assert linear_to_dbm(dbm_to_linear(p_dbm)) == pytest.approx(p_dbm)


def test_db_floor_behavior():
    assert linear_to_db(0.0) == -400.0
    assert linear_to_db(-1.0) == -400.0
    assert linear_to_dbm(0.0) == -400.0
    out = linear_to_db(np.array([1.0, 0.0, 10.0]))
    assert out[1] == -400.0 and out[0] == 0.0 and out[2] == pytest.approx(10.0)


# --- random streams --------------------------------------------------------

def test_rng_deterministic_and_path_addressed():
    a = Rng(42).child(1, 2).generator.standard_normal(8)
    b = Rng(42).child(1, 2).generator.standard_normal(8)
    c = Rng(42).child(1, 3).generator.standard_normal(8)
    d = Rng(43).child(1, 2).generator.standard_normal(8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_rng_child_extends_path():
    r = Rng(7).child(4).child(5, 6)
    assert r.seed == 7 and r.path == (4, 5, 6)


def test_complex_normal_variance_and_circularity():
    gen = np.random.default_rng(0)
    x = complex_normal(gen, 200_000, var=2.5)
    assert np.mean(np.abs(x) ** 2) == pytest.approx(2.5, rel=0.02)
    # circular symmetry: pseudo-variance is near zero
    assert abs(np.mean(x * x)) < 0.05


# --- system configuration --------------------------------------------------

def test_default_numerology():
    cfg = SystemConfig()
    assert cfg.sample_rate_hz == pytest.approx(20e6)
    assert cfg.nc == 64 and cfg.cp_len == 16 and cfg.n_data == 52
    assert np.array_equal(cfg.data_idx, np.r_[1:27, 38:64])
    assert np.array_equal(cfg.si_delay_samples, [0, 1, 2, 3])
    assert cfg.l_si == 4
    assert cfg.dl_streams == 4 and cfg.ul_streams == 4
    assert cfg.sigma_b_w == pytest.approx(1e-13)
    assert cfg.lambda_b_w == pytest.approx(1e-7)


def test_stream_count_overrides():
    cfg = SystemConfig(d_b=2, d_m2=3)
    assert cfg.dl_streams == 2 and cfg.ul_streams == 3
    with pytest.raises(ConfigError):
        SystemConfig(d_b=5)


@pytest.mark.parametrize("kw", [
    dict(nc=63),                       # not a power of two
    dict(nc=4),                        # too small
    dict(n_data=51),                   # odd
    dict(n_data=64),                   # >= nc
    dict(cp_len=2),                    # shorter than channel spread
    dict(cp_len=64),                   # >= nc
    dict(n_taps=0),
    dict(n_taps=65),                   # above the 4*4*4 budget
    dict(si_delays_ns=(0.0, 50.0)),    # length mismatch with losses
    dict(si_delays_ns=(), si_losses_db=()),
    dict(delay_profile="gaussian"),
    dict(irr_db=-3.0),
    dict(adc_bits=1),
    dict(mc_runs=0),
])
def test_validation_rejects(kw):
    with pytest.raises(ConfigError):
        SystemConfig(**kw)


def test_dict_round_trip_and_unknown_keys():
    cfg = SystemConfig(p_b_dbm=25.0, si_delays_ns=(0.0, 100.0),
                       si_losses_db=(40.0, 60.0))
    d = cfg.to_dict()
    assert isinstance(d["si_delays_ns"], list)          # JSON friendly
    again = SystemConfig.from_dict(d)
    assert again == cfg
    with pytest.raises(ConfigError):
        SystemConfig.from_dict({"not_a_field": 1})


def test_override_returns_new_frozen_config():
    cfg = SystemConfig()
    hot = cfg.override(p_b_dbm=20.0)
    assert hot.p_b_dbm == 20.0 and cfg.p_b_dbm == 40.0
    with pytest.raises(Exception):
        cfg.p_b_dbm = 0.0                               # frozen dataclass


def test_default_config_helper():
    assert default_config(seed=9).seed == 9


def test_presets():
    lte = preset("lte20")
    assert lte.nc == 2048 and lte.subcarrier_spacing_hz == 15e3
    assert lte.sample_rate_hz == pytest.approx(30.72e6)
    # 50/100/150 ns on the 30.72 MHz grid round to samples 2, 3, 5
    assert np.array_equal(lte.si_delay_samples, [0, 2, 3, 5])
    nr = preset("nr100")
    assert nr.sample_rate_hz == pytest.approx(122.88e6)
    assert np.array_equal(nr.si_delay_samples, [0, 6, 12, 18])
    assert preset("wifi20") == SystemConfig()
    with pytest.raises(ConfigError):
        preset("lte5")


def test_preset_accepts_overrides():
    cfg = preset("lte20", p_b_dbm=20.0)
    assert cfg.p_b_dbm == 20.0 and cfg.nc == 2048
