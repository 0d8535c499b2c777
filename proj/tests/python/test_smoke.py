import math

import numpy as np
import pytest

import bmt


def test_standard_gaussian_has_zero_drift():
    m = bmt.standard_gaussian(2)
    v = bmt.drift(m, 0.3, np.array([1.0, -2.0]))
    assert np.all(np.abs(v) < 1e-12)


def test_uniform_drift_oracle():
    m = bmt.uniform_interval(1.0)
    v = bmt.drift(m, 0.3, np.array([0.2]))
    assert v[0] == pytest.approx(0.43695328295173448, rel=1e-10)


def test_endpoints_follow_truncated_gaussian():
    m = bmt.truncated_gaussian(1.0)
    x = bmt.endpoints(m, 4000, seed=3)
    assert x.shape == (4000, 1)
    assert np.all(x >= 0.0)
    assert x.mean() == pytest.approx(0.5641895835477563, abs=0.03)


def test_malliavin_norms_respect_bound():
    m = bmt.truncated_gaussian(2.0)
    n = np.array(bmt.malliavin_norms_sq(m, 200, seed=5))
    prof = bmt.profile_for(m)
    assert prof.constant_sq == pytest.approx(2.0 / 3.0)
    assert np.all(n <= prof.constant_sq * 1.05)


def test_bounds():
    assert bmt.mixture_constant(1.0) == pytest.approx((math.exp(2.0) - 1.0) / 2.0, rel=1e-14)
    p = bmt.theta_profile(0.5, 2.0)
    for t in (0.25, 0.5, 1.0):
        assert bmt.gronwall_integral(p, t) == pytest.approx(bmt.gronwall_quadrature(p, t), rel=1e-8)
    assert bmt.find_c() == pytest.approx(-1.1252994236370873, abs=1e-12)


def test_run_experiment_returns_checks_and_tables():
    out = bmt.run("wiener_ot", measure__kind="truncated_gaussian", ot__pairs=200)
    assert out["passed"]
    assert {c["name"] for c in out["checks"]} == {"contraction", "exact_maps"}
    assert out["tables"]["ot_ratios.csv"].startswith("bin_lo,bin_hi,count")


def test_bad_config_raises():
    with pytest.raises(ValueError):
        bmt.run("simulate", n_paths=-3)
    assert len(bmt.experiments()) == 8
