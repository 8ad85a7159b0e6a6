"""Flag representations: projectors, tangent maps, retraction, distances."""

import numpy as np
import pytest

from flagtrick.errors import InvalidInput, ParseError
from flagtrick.flag import (FlagPoint, FlagSignature, average_projector,
                            flag_distance, load_flag, nested_projectors,
                            random_uniform, retract, riemannian_gradient,
                            save_flag, tangent_project, validate)
from flagtrick.numerics import sym_eig
from flagtrick.objectives import nested_pca_objective


def identity_point(p, dims):
    sig = FlagSignature(p, dims)
    return FlagPoint(sig, np.eye(p)[:, :sig.q])


def block_rotate(point, seed):
    """Representative of the same flag with every block rotated."""
    sig = point.signature
    rng = np.random.default_rng(seed)
    basis = point.basis.copy()
    for k in range(sig.d):
        b = sig.bounds[k + 1] - sig.bounds[k]
        r, _ = np.linalg.qr(rng.standard_normal((b, b)))
        basis[:, sig.bounds[k]:sig.bounds[k + 1]] = point.block(k) @ r
    return FlagPoint(sig, basis)


def test_signature_validation():
    sig = FlagSignature(5, (1, 3))
    assert sig.d == 2 and sig.q == 3 and sig.bounds == (0, 1, 3)
    for bad in ((), (0, 2), (2, 2), (3, 1), (5,)):
        with pytest.raises(InvalidInput):
            FlagSignature(5, bad)


def test_signature_blocks():
    sig = FlagSignature(6, (2, 3, 5))
    mat = np.arange(30.0).reshape(6, 5)
    assert sig.block(mat, 0).shape == (6, 2)
    assert sig.block(mat, 1).shape == (6, 1)
    assert np.array_equal(sig.block(mat, 2), mat[:, 3:5])


def test_point_shape_check():
    with pytest.raises(InvalidInput):
        FlagPoint(FlagSignature(4, (1, 2)), np.eye(4))


def test_validate_cases():
    point = identity_point(3, (1, 2))
    assert validate(point)
    dup = FlagPoint(point.signature, np.column_stack([point.basis[:, 0]] * 2))
    assert not validate(dup)
    assert not validate(FlagPoint(point.signature, 2.0 * point.basis))
    bad = point.basis.copy()
    bad[0, 0] = np.nan
    assert not validate(FlagPoint(point.signature, bad))


def test_random_uniform_deterministic_and_valid():
    sig = FlagSignature(7, (2, 4))
    a = random_uniform(sig, 42)
    b = random_uniform(sig, 42)
    assert np.array_equal(a.basis, b.basis)
    assert validate(a)
    assert not np.array_equal(a.basis, random_uniform(sig, 43).basis)


def test_random_uniform_is_rotation_invariant_on_average():
    sig = FlagSignature(2, (1,))
    acc = np.zeros((2, 2))
    n = 10000
    for s in range(n):
        u = random_uniform(sig, s).basis
        acc += u @ u.T
    assert np.abs(acc / n - np.eye(2) / 2).max() < 0.02


def test_nested_projectors_identity_case():
    pis = nested_projectors(identity_point(3, (1, 2)))
    assert np.allclose(pis[0], np.diag([1.0, 0.0, 0.0]))
    assert np.allclose(pis[1], np.diag([1.0, 1.0, 0.0]))


def test_nested_projectors_properties():
    point = random_uniform(FlagSignature(6, (1, 3, 4)), 0)
    pis = nested_projectors(point)
    for qk, pi in zip(point.signature.dims, pis):
        assert np.linalg.norm(pi @ pi - pi) <= 1e-8
        assert abs(np.trace(pi) - qk) <= 1e-8
    for a, b in zip(pis, pis[1:]):
        assert np.linalg.norm(a @ b - a) <= 1e-10


def test_nested_projectors_d1_is_grassmann():
    point = random_uniform(FlagSignature(5, (2,)), 1)
    (pi,) = nested_projectors(point)
    assert np.allclose(pi, point.basis @ point.basis.T)


def test_projectors_reject_invalid_points():
    point = identity_point(3, (1, 2))
    crooked = FlagPoint(point.signature, 2.0 * point.basis)
    with pytest.raises(InvalidInput):
        nested_projectors(crooked)
    with pytest.raises(InvalidInput):
        average_projector(crooked)


def test_average_projector_identity_case():
    assert np.allclose(average_projector(identity_point(3, (1, 2))),
                       np.diag([1.0, 0.5, 0.0]))


def test_average_projector_matches_projector_mean():
    point = random_uniform(FlagSignature(7, (2, 3, 5)), 2)
    mean = sum(nested_projectors(point)) / point.signature.d
    assert np.allclose(average_projector(point), mean, atol=1e-12)


def test_average_projector_spectrum():
    point = random_uniform(FlagSignature(4, (1, 2, 3)), 3)
    vals = sym_eig(average_projector(point)).values
    assert np.allclose(vals, [1.0, 2.0 / 3.0, 1.0 / 3.0, 0.0], atol=1e-10)


def test_riemannian_gradient_zero_cases():
    point = random_uniform(FlagSignature(5, (2,)), 4)
    assert np.allclose(riemannian_gradient(point, point.basis), 0.0, atol=1e-14)
    assert np.allclose(riemannian_gradient(point, np.zeros((5, 2))), 0.0)


def test_riemannian_gradient_worked_example():
    point = identity_point(3, (1, 2))
    g = np.zeros((3, 2))
    g[1, 0] = 1.0  # first block gradient e2, second block zero
    grad = riemannian_gradient(point, g)
    expect = np.array([[0.0, -1.0], [1.0, 0.0], [0.0, 0.0]])
    assert np.allclose(grad, expect)


def test_riemannian_gradient_shape_check():
    point = identity_point(3, (1, 2))
    with pytest.raises(InvalidInput):
        riemannian_gradient(point, np.zeros((3, 3)))


def test_tangent_project_idempotent_and_horizontal():
    rng = np.random.default_rng(5)
    point = random_uniform(FlagSignature(6, (1, 3, 4)), 5)
    sig = point.signature
    amb = rng.standard_normal((6, 4))
    t = tangent_project(point, amb)
    assert np.allclose(tangent_project(point, t), t, atol=1e-10)
    for k in range(sig.d):
        tk = sig.block(t, k)
        assert np.abs(point.block(k).T @ tk).max() <= 1e-10
        for l in range(sig.d):
            if l != k:
                cross = point.block(l).T @ tk + sig.block(t, l).T @ point.block(k)
                assert np.abs(cross).max() <= 1e-10


def test_tangent_project_fixes_riemannian_gradient():
    rng = np.random.default_rng(6)
    for s in range(5):
        point = random_uniform(FlagSignature(7, (2, 4, 5)), s)
        grad = riemannian_gradient(point, rng.standard_normal((7, 5)))
        assert np.allclose(tangent_project(point, grad), grad, atol=1e-10)


def test_retract_zero_step_and_validity():
    rng = np.random.default_rng(7)
    point = random_uniform(FlagSignature(6, (2, 4)), 7)
    direction = tangent_project(point, rng.standard_normal((6, 4)))
    assert np.abs(retract(point, direction, 0.0).basis - point.basis).max() <= 1e-14
    assert validate(retract(point, direction, 0.3))


def test_retract_descends_along_gradient():
    rng = np.random.default_rng(8)
    x = rng.standard_normal((5, 40))
    sig = FlagSignature(5, (1, 3))
    obj = nested_pca_objective(x, sig)
    point = random_uniform(sig, 8)
    grad = riemannian_gradient(point, obj.euclid_grad(point))
    assert obj.value(retract(point, grad, 1e-3)) < obj.value(point)


def test_flag_distance_cases():
    sig = FlagSignature(3, (1,))
    e1 = FlagPoint(sig, np.array([[1.0], [0.0], [0.0]]))
    e2 = FlagPoint(sig, np.array([[0.0], [1.0], [0.0]]))
    assert np.allclose(flag_distance(e1, e1), [0.0])
    assert np.allclose(flag_distance(e1, e2), [np.pi / 2])
    with pytest.raises(InvalidInput):
        flag_distance(e1, random_uniform(FlagSignature(3, (2,)), 0))


def test_quotient_invariance():
    point = random_uniform(FlagSignature(6, (1, 3, 5)), 9)
    other = block_rotate(point, 10)
    assert np.allclose(average_projector(point), average_projector(other),
                       atol=1e-10)
    for a, b in zip(nested_projectors(point), nested_projectors(other)):
        assert np.allclose(a, b, atol=1e-10)
    assert np.abs(flag_distance(point, other)).max() <= 1e-7
    ref = random_uniform(point.signature, 11)
    assert np.allclose(flag_distance(point, ref), flag_distance(other, ref),
                       atol=1e-10)


def test_save_load_roundtrip(tmp_path):
    point = random_uniform(FlagSignature(5, (1, 3)), 12)
    path = tmp_path / "flag.csv"
    save_flag(point, path)
    assert path.read_text().startswith("# flag p=5 dims=1,3\n")
    loaded = load_flag(path)
    assert loaded.signature == point.signature
    assert np.allclose(loaded.basis, point.basis, atol=1e-15)


def test_load_flag_rejects_bad_headers(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1.0,0.0\n0.0,1.0\n")
    with pytest.raises(ParseError):
        load_flag(path)
    path.write_text("# flag p=x dims=1\n1.0\n0.0\n")
    with pytest.raises(ParseError):
        load_flag(path)
