"""Synthetic generators and the CSV round trip."""

import numpy as np
import pytest

from flagtrick.datagen import (HaystackConfig, gaussian_clusters, haystack,
                               haystack_3d, load_csv, save_csv, two_moons_3d)
from flagtrick.errors import InvalidInput, ParseError


def test_haystack_3d_population_stats():
    data = haystack_3d(n_in=450, n_out=50, seed=0)
    assert data.samples.shape == (3, 500)
    assert data.outlier_mask.sum() == 50
    assert np.array_equal(data.labels, data.outlier_mask.astype(int))

    inliers = data.samples[:, ~data.outlier_mask]
    cov = inliers @ inliers.T / inliers.shape[1]
    target = np.diag([5.0, 1.0, 0.1]) / 3.0
    for i in range(3):
        assert abs(cov[i, i] - target[i, i]) < 0.15 * target[i, i]
    off = cov - np.diag(np.diag(cov))
    assert np.abs(off).max() < 0.15

    outliers = data.samples[:, data.outlier_mask]
    var = (outliers ** 2).mean(axis=1)
    assert var[2] > 5.0 * var[0]


def test_haystack_single_population_has_no_labels():
    cfg = HaystackConfig(p=2, q=2, n_in=30, n_out=0,
                         inlier_cov=np.eye(2), outlier_cov=np.eye(2))
    data = haystack(cfg, seed=1)
    assert data.labels is None
    assert not data.outlier_mask.any()
    assert data.samples.shape == (2, 30)


def test_haystack_determinism():
    a = haystack_3d(n_in=20, n_out=5, seed=7)
    b = haystack_3d(n_in=20, n_out=5, seed=7)
    c = haystack_3d(n_in=20, n_out=5, seed=8)
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


def test_haystack_config_validation():
    eye = np.eye(3)
    with pytest.raises(InvalidInput):
        HaystackConfig(p=3, q=1, n_in=5, n_out=5, inlier_cov=eye,
                       outlier_cov=eye)  # inlier rank above q
    with pytest.raises(InvalidInput):
        HaystackConfig(p=3, q=3, n_in=5, n_out=5,
                       inlier_cov=np.triu(np.ones((3, 3))), outlier_cov=eye)
    with pytest.raises(InvalidInput):
        HaystackConfig(p=3, q=3, n_in=5, n_out=5,
                       inlier_cov=np.diag([1.0, -1.0, 0.0]), outlier_cov=eye)
    with pytest.raises(InvalidInput):
        HaystackConfig(p=3, q=3, n_in=0, n_out=0, inlier_cov=eye,
                       outlier_cov=eye)
    with pytest.raises(InvalidInput):
        HaystackConfig(p=3, q=0, n_in=5, n_out=5, inlier_cov=eye,
                       outlier_cov=eye)


def test_two_moons_noise_free_arcs():
    data = two_moons_3d(n=100, noise=0.0, seed=0)
    x = data.samples
    assert np.allclose(x[2], 0.0)
    outer = x[:, :50]
    inner = x[:, 50:]
    assert np.allclose(outer[0] ** 2 + outer[1] ** 2, 1.0, atol=1e-12)
    assert np.allclose((inner[0] - 1.0) ** 2 + (inner[1] - 0.5) ** 2, 1.0,
                       atol=1e-12)
    assert np.array_equal(data.labels, np.repeat([0, 1], 50))


def test_two_moons_noise_and_parity():
    data = two_moons_3d(n=60, noise=0.05, seed=3)
    assert np.abs(data.samples[2]).max() > 0
    assert np.abs(data.samples[2]).max() < 0.05 * 6
    with pytest.raises(InvalidInput):
        two_moons_3d(n=7)


def test_gaussian_clusters_layout():
    means = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
    data = gaussian_clusters(means, 0.01 * np.eye(2), n_per=20, seed=4)
    assert data.samples.shape == (2, 60)
    assert np.array_equal(data.labels, np.repeat([0, 1, 2], 20))
    for j in range(3):
        blob = data.samples[:, data.labels == j]
        assert np.linalg.norm(blob.mean(axis=1) - means[j]) < 0.2
    with pytest.raises(InvalidInput):
        gaussian_clusters(means, np.eye(3), n_per=5, seed=0)


def test_csv_round_trip_labeled(tmp_path):
    data = haystack_3d(n_in=8, n_out=4, seed=5)
    path = tmp_path / "hay.csv"
    save_csv(data, path)
    back = load_csv(path)
    assert np.array_equal(back.samples, data.samples)  # repr floats are exact
    assert np.array_equal(back.labels, data.labels)
    assert back.generator == "haystack"
    assert back.seed == 5

    lines = path.read_text().splitlines()
    assert lines[0] == "# seed=5 generator=haystack"
    assert lines[1] == "x0,x1,x2,label"


def test_csv_round_trip_unlabeled(tmp_path):
    cfg = HaystackConfig(p=2, q=2, n_in=6, n_out=0,
                         inlier_cov=np.eye(2), outlier_cov=np.eye(2))
    data = haystack(cfg, seed=6)
    path = tmp_path / "plain.csv"
    save_csv(data, path)
    back = load_csv(path)
    assert back.labels is None
    assert np.array_equal(back.samples, data.samples)
    assert path.read_text().splitlines()[1] == "x0,x1"


def test_csv_headerless_numeric_rows(tmp_path):
    path = tmp_path / "raw.csv"
    path.write_text("1.5,2.0\n-3.25,4.0\n")
    back = load_csv(path)
    assert back.samples.shape == (2, 2)
    assert back.labels is None
    assert back.samples[0, 1] == -3.25


def test_csv_parse_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ParseError):
        load_csv(empty)

    header_only = tmp_path / "header.csv"
    header_only.write_text("x0,x1\n")
    with pytest.raises(ParseError):
        load_csv(header_only)

    ragged = tmp_path / "ragged.csv"
    ragged.write_text("x0,x1\n1.0,2.0\n3.0\n")
    with pytest.raises(ParseError) as exc:
        load_csv(ragged)
    assert exc.value.row == 3

    alpha = tmp_path / "alpha.csv"
    alpha.write_text("x0,x1\n1.0,two\n")
    with pytest.raises(ParseError) as exc:
        load_csv(alpha)
    assert exc.value.row == 2 and exc.value.col == 2

    badlabel = tmp_path / "badlabel.csv"
    badlabel.write_text("x0,label\n1.0,1.5\n2.0,0\n")
    with pytest.raises(ParseError) as exc:
        load_csv(badlabel)
    assert exc.value.col == 2