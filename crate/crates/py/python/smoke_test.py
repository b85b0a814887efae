"""Smoke test for the compiled extension.

Build and install first:  pip install --no-build-isolation -e crates/py
Then run:                 python -m pytest crates/py/python
"""

import math

import pytest

import umskel_py as u


def test_metric_space_basics():
    s = u.MetricSpace([[0, 1, 2, 3], [1, 0, 1, 2], [2, 1, 0, 1], [3, 2, 1, 0]])
    assert len(s) == 4
    assert s.closed_ball(1, 1.5) == [0, 1, 2]
    assert s.restrict([0, 3]).d(0, 1) == 3.0
    assert s.to_dict()["labels"] == ["0", "1", "2", "3"]
    with pytest.raises(u.UmskelError):
        s.closed_ball(0, -1.0)


def test_validation_report_names_triple():
    report = u.validate_metric([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    first = report["violations"][0]
    assert (first["axiom"], first["i"], first["j"], first["k"]) == ("triangle", 0, 1, 2)
    with pytest.raises(u.UmskelError):
        u.MetricSpace([[0, 1, 5], [1, 0, 1], [5, 1, 0]])


def test_min_distortion_on_paths():
    for m in range(2, 9):
        d, tree = u.min_ultrametric_distortion(u.MetricSpace.path(m))
        assert d == m - 1
        assert u.certify(u.MetricSpace.path(m), tree)["upper"] == pytest.approx(m - 1, abs=1e-12)


def test_merge_line_example():
    space, ex = u.make_line_example(2, 2)
    out = u.union_ultrametric(space, ex["u1"], ex["u2"], ex["rho1"], ex["rho2"], eps=0.1)
    assert 3.0 <= out["certificate"]["upper"] <= 7.1


def test_covering_submeasure_single_ball():
    sol = u.covering_submeasure(u.MetricSpace.path(4), 0.5, [0, 1])
    assert sol["value"] == pytest.approx(math.sqrt(0.5), abs=1e-15)
    assert sol["exact"]


def test_skeleton_and_chain():
    s = u.MetricSpace.path(8)
    sk = u.build_skeleton(s, 0.5)
    assert len(sk["subset"]) >= math.sqrt(8)
    assert sum(sk["nu"]) == pytest.approx(1.0, abs=1e-12)
    assert sk["c_measured"] == 1.0
    rep = u.majorizing_chain_check(s, sk)
    assert rep["all_pass"]
    assert u.dvoretzky_check(u.MetricSpace.equilateral(9), 0.5)["size"] == 9


def test_functionals():
    star = u.star_report(100)
    assert star["delta_lower"] == pytest.approx(2 * math.sqrt(math.log(100)), abs=1e-9)
    assert star["gamma_upper"] == pytest.approx(star["gamma_closed_form"], abs=1e-9)
    eq = u.equalizing_measure(u.MetricSpace.equilateral(3))
    assert eq["V"] == pytest.approx(math.sqrt(math.log(3)), abs=1e-9)
    grid = u.gamma_delta_grid(u.MetricSpace.equilateral(3), 30)
    assert grid["gamma_hat"] >= grid["delta_hat"]
    prof = u.profile(u.MetricSpace.path(3), [1 / 3] * 3)
    assert len(prof["values"]) == 3


def test_gaussian_experiment_is_deterministic():
    pts = [[-1.0, 0.0], [1.0, 0.0]]
    a = u.gaussian_argmax_experiment(pts, 5, 20000)
    b = u.gaussian_argmax_experiment(pts, 5, 20000)
    assert a == b
    assert abs(a["mu_hat"][0] - 0.5) < 2.5758 * math.sqrt(0.25 / 20000)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
