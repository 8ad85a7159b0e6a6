"""Synthetic datasets and CSV round-tripping.

CSV layout is rows-as-samples with an x0..x{p-1} header; an optional final
`label` column carries integer labels. A leading `# seed=<s> generator=<g>`
comment records provenance for synthetic data.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, ParseError
from .objectives import Dataset


@dataclass(frozen=True)
class HaystackConfig:
    """Inliers concentrated on a q-dimensional structure inside noise.

    Inliers draw from N(0, inlier_cov / q), outliers from
    N(0, outlier_cov / rank(outlier_cov)).
    """

    p: int
    q: int
    n_in: int
    n_out: int
    inlier_cov: np.ndarray
    outlier_cov: np.ndarray

    def __post_init__(self):
        for name, m in (("inlier_cov", self.inlier_cov), ("outlier_cov", self.outlier_cov)):
            m = np.asarray(m, dtype=float)
            object.__setattr__(self, name, m)
            if m.shape != (self.p, self.p):
                raise InvalidInput(f"{name} must be p x p")
            scale = max(1.0, float(np.abs(m).max()))
            if np.abs(m - m.T).max() > 1e-10 * scale:
                raise InvalidInput(f"{name} must be symmetric")
            if np.linalg.eigvalsh((m + m.T) / 2).min() < -1e-10 * scale:
                raise InvalidInput(f"{name} must be positive semidefinite")
        if not 1 <= self.q <= self.p:
            raise InvalidInput("q must lie in 1..p")
        if _cov_rank(self.inlier_cov) > self.q:
            raise InvalidInput("inlier covariance rank exceeds q")
        if self.n_in < 0 or self.n_out < 0 or self.n_in + self.n_out == 0:
            raise InvalidInput("need a positive number of samples")


def _cov_rank(m) -> int:
    vals = np.linalg.eigvalsh(m)
    top = max(vals.max(), np.finfo(float).tiny)
    return int(np.sum(vals > 1e-12 * top))


def _sample_gaussian(rng, cov, n):
    vals, vecs = np.linalg.eigh(cov)
    vals = np.maximum(vals, 0.0)
    root = vecs * np.sqrt(vals)
    return root @ rng.standard_normal((cov.shape[0], n))


def haystack(cfg: HaystackConfig, seed: int) -> Dataset:
    """Inlier/outlier mixture; labels double as the outlier indicator."""
    rng = np.random.default_rng(seed)
    xin = _sample_gaussian(rng, cfg.inlier_cov / cfg.q, cfg.n_in)
    rk = max(_cov_rank(cfg.outlier_cov), 1)
    xout = _sample_gaussian(rng, cfg.outlier_cov / rk, cfg.n_out)
    x = np.hstack([xin, xout])
    mask = np.zeros(cfg.n_in + cfg.n_out, dtype=bool)
    mask[cfg.n_in:] = True
    # label column mirrors the mask when both populations are present
    labels = mask.astype(int) if cfg.n_in > 0 and cfg.n_out > 0 else None
    return Dataset(x, labels=labels, outlier_mask=mask,
                   generator="haystack", seed=seed)


def haystack_3d(n_in: int = 450, n_out: int = 50, seed: int = 0) -> Dataset:
    """The planar-inlier configuration: diag(5,1,.1) vs diag(.1,.1,5)."""
    cfg = HaystackConfig(p=3, q=3, n_in=n_in, n_out=n_out,
                         inlier_cov=np.diag([5.0, 1.0, 0.1]),
                         outlier_cov=np.diag([0.1, 0.1, 5.0]))
    return haystack(cfg, seed)


def two_moons_3d(n: int = 100, noise: float = 0.08, seed: int = 0) -> Dataset:
    """Two interleaved half-circles in the xy-plane with 3D Gaussian noise."""
    if n % 2 != 0:
        raise InvalidInput("n must be even (half the samples per moon)")
    half = n // 2
    t = np.linspace(0.0, np.pi, half)
    outer = np.vstack([np.cos(t), np.sin(t), np.zeros(half)])
    inner = np.vstack([1.0 - np.cos(t), 0.5 - np.sin(t), np.zeros(half)])
    x = np.hstack([outer, inner])
    if noise > 0:
        x = x + noise * np.random.default_rng(seed).standard_normal(x.shape)
    labels = np.concatenate([np.zeros(half, dtype=int), np.ones(half, dtype=int)])
    return Dataset(x, labels=labels, generator="two_moons_3d", seed=seed)


def gaussian_clusters(means: np.ndarray, cov: np.ndarray, n_per: int,
                      seed: int) -> Dataset:
    """C labeled Gaussian blobs sharing one covariance; means is C x p."""
    means = np.asarray(means, dtype=float)
    cov = np.asarray(cov, dtype=float)
    c, p = means.shape
    if cov.shape != (p, p):
        raise InvalidInput("covariance must be p x p")
    rng = np.random.default_rng(seed)
    blocks, labels = [], []
    for j in range(c):
        blocks.append(means[j][:, None] + _sample_gaussian(rng, cov, n_per))
        labels.append(np.full(n_per, j, dtype=int))
    return Dataset(np.hstack(blocks), labels=np.concatenate(labels),
                   generator="gaussian_clusters", seed=seed)


# ---------------------------------------------------------------------------
# csv


def save_csv(data: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        if data.generator is not None:
            fh.write(f"# seed={data.seed} generator={data.generator}\n")
        writer = csv.writer(fh)
        cols = [f"x{i}" for i in range(data.p)]
        if data.labels is not None:
            cols.append("label")
        writer.writerow(cols)
        for i in range(data.n):
            row = [repr(float(v)) for v in data.samples[:, i]]
            if data.labels is not None:
                row.append(str(int(data.labels[i])))
            writer.writerow(row)


def load_csv(path) -> Dataset:
    generator, seed = None, None
    rows = []
    with open(path, newline="") as fh:
        raw = list(csv.reader(fh))
    start = 0
    if raw and raw[0] and raw[0][0].startswith("#"):
        fields = dict(tok.split("=", 1) for tok in " ".join(raw[0]).lstrip("# ").split()
                      if "=" in tok)
        generator = fields.get("generator")
        seed = int(fields["seed"]) if fields.get("seed", "None") != "None" else None
        start = 1
    if start >= len(raw):
        raise ParseError("no data rows", row=start)
    header = raw[start]
    has_header = not _is_numeric_row(header)
    has_labels = has_header and len(header) > 0 and header[-1].strip() == "label"
    body = raw[start + 1:] if has_header else raw[start:]
    body = [r for r in body if r]
    if not body:
        raise ParseError("no data rows", row=start + 1)
    width = len(body[0])
    feats = width - 1 if has_labels else width
    if feats < 1:
        raise ParseError("no feature columns", row=start)
    samples = np.empty((feats, len(body)))
    labels = np.empty(len(body), dtype=int) if has_labels else None
    for i, r in enumerate(body):
        rownum = i + start + (2 if has_header else 1)
        if len(r) != width:
            raise ParseError(f"expected {width} columns, got {len(r)}", row=rownum)
        for j in range(feats):
            try:
                samples[j, i] = float(r[j])
            except ValueError:
                raise ParseError(f"not a number: {r[j]!r}", row=rownum, col=j + 1)
        if has_labels:
            try:
                labels[i] = int(r[-1])
            except ValueError:
                raise ParseError(f"bad label: {r[-1]!r}", row=rownum, col=width)
    return Dataset(samples, labels=labels, generator=generator, seed=seed)


def _is_numeric_row(row) -> bool:
    for tok in row:
        try:
            float(tok)
        except ValueError:
            return False
    return len(row) > 0
