"""Steepest descent loop, line search behavior and the fd gradient oracle."""

import numpy as np
import pytest

from flagtrick.descent import (DescentConfig, Objective, OptTrace, Termination,
                               fd_gradient, save_trace, steepest_descent,
                               steepest_descent_restarts)
from flagtrick.errors import NumericalBlowup
from flagtrick.flag import FlagPoint, FlagSignature, flag_distance, random_uniform, validate
from flagtrick.objectives import nested_pca_objective


def quadratic_objective(a):
    return Objective("quad",
                     value=lambda pt: -float(np.trace(pt.basis.T @ a @ pt.basis)),
                     euclid_grad=lambda pt: -2.0 * a @ pt.basis)


def test_constant_objective_stops_immediately():
    sig = FlagSignature(4, (2,))
    init = random_uniform(sig, 0)
    obj = Objective("const", value=lambda pt: 3.0,
                    euclid_grad=lambda pt: np.zeros((4, 2)))
    point, trace = steepest_descent(obj, init)
    assert trace.reason is Termination.GRAD_TOL
    assert len(trace.objective) == 1
    assert np.array_equal(point.basis, init.basis)


def test_converges_to_eigenflag():
    x = np.diag(np.sqrt(3.0 * np.array([4.0, 2.0, 1.0])))  # covariance diag(4,2,1)
    sig = FlagSignature(3, (1, 2))
    obj = nested_pca_objective(x, sig)
    point, trace = steepest_descent(obj, random_uniform(sig, 3),
                                    DescentConfig(max_iters=2000))
    target = FlagPoint(sig, np.eye(3)[:, :2])
    assert np.all(flag_distance(point, target) < 1e-3)
    assert trace.reason is Termination.GRAD_TOL


def test_d1_leading_eigenvector():
    a = np.diag([3.0, 1.0, 0.0])
    sig = FlagSignature(3, (1,))
    point, trace = steepest_descent(quadratic_objective(a), random_uniform(sig, 1),
                                    DescentConfig(max_iters=2000))
    assert abs(trace.objective[-1] + 3.0) < 1e-6
    assert abs(point.basis[0, 0]) > 1.0 - 1e-6


def test_trace_monotone_and_point_valid():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((6, 50))
    sig = FlagSignature(6, (2, 4))
    obj = nested_pca_objective(x, sig)
    point, trace = steepest_descent(obj, random_uniform(sig, 2))
    assert np.all(np.diff(trace.objective) <= 0.0)
    assert validate(point)
    assert trace.step[-1] == 0.0


def test_deterministic_given_config():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((5, 30))
    sig = FlagSignature(5, (1, 3))
    obj = nested_pca_objective(x, sig)
    cfg = DescentConfig(max_iters=40, grad_tol=0.0)
    init = random_uniform(sig, 3)
    p1, t1 = steepest_descent(obj, init, cfg)
    p2, t2 = steepest_descent(obj, init, cfg)
    assert np.array_equal(p1.basis, p2.basis)
    assert np.array_equal(t1.objective, t2.objective)


def test_line_search_failure_returns_best_iterate():
    sig = FlagSignature(4, (2,))
    init = random_uniform(sig, 4)
    fake = np.ones((4, 2))  # nonzero reported gradient, flat objective
    obj = Objective("flat", value=lambda pt: 1.0, euclid_grad=lambda pt: fake)
    point, trace = steepest_descent(obj, init)
    assert trace.reason is Termination.LINE_SEARCH_FAIL
    assert np.array_equal(point.basis, init.basis)
    assert trace.objective[-1] == 1.0


def test_non_finite_values_raise():
    sig = FlagSignature(3, (1,))
    init = random_uniform(sig, 5)
    bad_value = Objective("nan", value=lambda pt: float("nan"),
                          euclid_grad=lambda pt: np.zeros((3, 1)))
    with pytest.raises(NumericalBlowup):
        steepest_descent(bad_value, init)
    bad_grad = Objective("nan-grad", value=lambda pt: 1.0,
                         euclid_grad=lambda pt: np.full((3, 1), np.nan))
    with pytest.raises(NumericalBlowup):
        steepest_descent(bad_grad, init)


def test_max_iters_cap():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((6, 40))
    sig = FlagSignature(6, (1, 3))
    obj = nested_pca_objective(x, sig)
    point, trace = steepest_descent(obj, random_uniform(sig, 6),
                                    DescentConfig(max_iters=3, grad_tol=0.0))
    assert trace.reason is Termination.MAX_ITERS
    assert len(trace.objective) == 4


def test_restarts_pick_best_final_objective():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((5, 30))
    sig = FlagSignature(5, (2,))
    obj = nested_pca_objective(x, sig)
    cfg = DescentConfig(max_iters=50)
    _, best = steepest_descent_restarts(obj, sig, cfg, restarts=4, seed=0)
    finals = [steepest_descent(obj, random_uniform(sig, s), cfg)[1].objective[-1]
              for s in range(4)]
    assert best.objective[-1] == min(finals)


def test_fd_gradient_linear_and_quadratic():
    rng = np.random.default_rng(8)
    sig = FlagSignature(4, (1, 3))
    point = random_uniform(sig, 8)
    c = rng.standard_normal((4, 3))
    linear = Objective("lin", value=lambda pt: float(np.sum(c * pt.basis)),
                       euclid_grad=lambda pt: c)
    assert np.abs(fd_gradient(linear, point, h=1e-5) - c).max() < 1e-9

    m = rng.standard_normal((4, 4))
    a = m + m.T
    quad = quadratic_objective(a)
    fd = fd_gradient(quad, point)
    an = quad.euclid_grad(point)
    assert np.linalg.norm(an - fd) / np.linalg.norm(fd) < 1e-5


def test_save_trace_roundtrip(tmp_path):
    trace = OptTrace.from_rows([(3.0, 1.0, 0.5), (2.0, 0.1, 0.25), (2.0, 0.1, 0.0)],
                               Termination.MAX_ITERS)
    path = tmp_path / "trace.csv"
    save_trace(trace, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "iter,objective,grad_norm,step"
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (3, 4)
    assert np.allclose(data[:, 1], trace.objective)
