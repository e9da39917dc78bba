import json
import math

import pytest
from hypothesis import given, strategies as st

from femtoaccess.params import (CONFIG_KEYS, DEFAULT_CONFIG, ConfigError, c_alpha, default_params,
                                derive_constants, load_params, threshold_distance)


def test_defaults_round_trip():
    p = default_params()
    assert p.kappa == pytest.approx(2000.0)
    back = p.to_config()
    assert set(back) == set(CONFIG_KEYS)
    for k, v in DEFAULT_CONFIG.items():
        assert back[k] == pytest.approx(v)
    again = load_params(back)
    for name in ("P_c", "P_f", "G", "alpha", "R_c", "N_f", "U_h", "N_levels"):
        assert getattr(again, name) == pytest.approx(getattr(p, name), rel=1e-14)


def test_load_from_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(DEFAULT_CONFIG))
    assert load_params(path) == default_params()
    assert load_params(str(path)) == default_params()


def test_missing_and_unknown_keys():
    doc = dict(DEFAULT_CONFIG)
    del doc["alpha"]
    with pytest.raises(ConfigError, match="missing"):
        load_params(doc)
    with pytest.raises(ConfigError, match="unknown"):
        load_params({**DEFAULT_CONFIG, "alhpa": 4})


@pytest.mark.parametrize("key,value", [
    ("alpha", 2.0), ("beta", 1.9), ("wall_loss_linear", 0.0), ("wall_loss_linear", 1.5),
    ("radius_indoor_m", 600.0), ("num_femtocells", -1), ("num_home_users", 0), ("num_cellular_users", 0),
    ("num_mod_levels", 0), ("num_mod_levels", 2.5), ("qos_epsilon", 1.5), ("qos_omega_c", -0.1),
    ("power_femto_dbm", 50.0), ("alpha", "four"), ("alpha", float("nan")),
])
def test_invalid_values_rejected(key, value):
    with pytest.raises(ConfigError):
        default_params(**{key: value})


def test_kappa_must_exceed_one():
    with pytest.raises(ConfigError, match="kappa"):
        default_params(power_femto_dbm=43.0, wall_loss_linear=1.0)


def test_c_alpha_alpha4():
    # (2 pi^2 / 4) csc(pi / 2) = pi^2 / 2
    assert c_alpha(4.0) == pytest.approx(math.pi**2 / 2)


def test_derived_constants_reference():
    c = derive_constants(default_params())
    assert c.D_th == pytest.approx(20.0 * (math.sqrt(2000) - 1) / 2000**0.25, rel=1e-14)
    assert c.N_f1 + c.N_f2 == pytest.approx(20.0)
    assert c.N_f1 == pytest.approx(20.0 * (c.D_th / 500.0) ** 2)
    assert c.lam == pytest.approx(20.0 / (math.pi * 500.0**2))
    assert set(c.as_dict()) == {"kappa", "lam", "C_alpha", "D_th", "N_f1", "N_f2", "K_geom"}


@given(st.floats(2.5, 6.0), st.floats(10.0, 40.0), st.floats(0.05, 1.0))
def test_threshold_is_where_coverage_meets_home(alpha, p_f, L):
    try:
        p = default_params(alpha=alpha, power_femto_dbm=p_f, wall_loss_linear=L)
    except ConfigError:
        return
    k = p.kappa
    d_th = threshold_distance(p)
    r_f = k ** (1 / alpha) * d_th / abs(k ** (2 / alpha) - 1)
    assert r_f == pytest.approx(p.R_i, rel=1e-12)
