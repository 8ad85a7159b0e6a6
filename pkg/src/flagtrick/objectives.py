"""Multilevel objectives: each classic subspace criterion restated on a flag.

Conventions shared by every builder here:
  * data matrices hold samples as columns (p x n);
  * block k of a basis carries the per-level weights
      w_k = (k-1)/d          for residual-type objectives (pca, lad),
      v_k = (d-k+1)          for trace-type objectives (trace ratio, ssc),
    coming from the identity  avg-projector = sum_k (v_k/d) U_k U_k^T  and its
    complement  I - avg-projector = sum_k w_k U_k U_k^T + U_{d+1} U_{d+1}^T;
  * objectives evaluate their formula on raw bases too, so finite-difference
    probes of the Euclidean gradient are meaningful.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .descent import Objective
from .errors import (DegenerateDenominator, InvalidInput, NonUniqueWarning,
                     RankDeficient)
from .flag import FlagPoint, FlagSignature
from .numerics import sym_eig

EPS_RADICAND = 1e-12
EPS_SMOOTH = 1e-8
EIGENGAP_TOL = 1e-10


@dataclass(frozen=True)
class Dataset:
    """Column-major sample matrix with optional labels and outlier tags."""

    samples: np.ndarray
    labels: np.ndarray = None
    outlier_mask: np.ndarray = None
    generator: str = None
    seed: int = None

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", x)
        if x.ndim != 2:
            raise InvalidInput(f"samples must be a p x n matrix, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InvalidInput("samples contain non-finite entries")
        n = x.shape[1]
        if self.labels is not None:
            y = np.asarray(self.labels, dtype=int)
            object.__setattr__(self, "labels", y)
            if y.shape != (n,):
                raise InvalidInput(f"labels shape {y.shape} does not match n={n}")
            classes = np.unique(y)
            if classes.size and (classes[0] != 0 or classes[-1] != classes.size - 1):
                raise InvalidInput("labels must cover 0..C-1 contiguously")
        if self.outlier_mask is not None:
            m = np.asarray(self.outlier_mask, dtype=bool)
            object.__setattr__(self, "outlier_mask", m)
            if m.shape != (n,):
                raise InvalidInput(f"outlier mask shape {m.shape} does not match n={n}")

    @property
    def p(self) -> int:
        return self.samples.shape[0]

    @property
    def n(self) -> int:
        return self.samples.shape[1]


def _as_samples(data) -> np.ndarray:
    x = data.samples if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    if x.ndim != 2:
        raise InvalidInput("expected a p x n matrix")
    return x


def residual_col_weights(sig: FlagSignature) -> np.ndarray:
    """Per-column w_k^2 - 1 with w_k = (k-1)/d, repeated over block widths."""
    d = sig.d
    w = (np.arange(d) / d) ** 2 - 1.0
    widths = np.diff(sig.bounds)
    return np.repeat(w, widths)


def trace_col_weights(sig: FlagSignature) -> np.ndarray:
    """Per-column v_k = d-k+1 repeated over block widths."""
    d = sig.d
    v = np.arange(d, 0, -1).astype(float)
    widths = np.diff(sig.bounds)
    return np.repeat(v, widths)


# ---------------------------------------------------------------------------
# nested pca


def nested_pca_objective(data, sig: FlagSignature) -> Objective:
    """Sum of squared distances to the average of the nested projections.

    value(U) = ||X - avg-projector(U) X||_F^2, evaluated through the
    per-sample identity ||x||^2 - ||U^T x||^2 + sum_k w_k^2 ||U_k^T x||^2.
    """
    x = _as_samples(data)
    if x.shape[0] != sig.p:
        raise InvalidInput(f"data dimension {x.shape[0]} does not match p={sig.p}")
    cov = x @ x.T
    total = float(np.sum(x * x))
    coef = residual_col_weights(sig)

    def value(point: FlagPoint) -> float:
        cu = cov @ point.basis
        per_col = np.einsum("ij,ij->j", point.basis, cu)
        return total + float(coef @ per_col)

    def grad(point: FlagPoint) -> np.ndarray:
        return 2.0 * coef * (cov @ point.basis)

    return Objective("nested_pca", value, grad)


def nested_pca_closed_form(data, sig: FlagSignature) -> FlagPoint:
    """Leading eigenvector flag of the sample covariance (the global optimum).

    Warns NonUniqueWarning when an eigengap at a cut dimension is below
    EIGENGAP_TOL, in which case the optimal flag is not unique.
    """
    x = _as_samples(data)
    if x.shape[0] != sig.p:
        raise InvalidInput(f"data dimension {x.shape[0]} does not match p={sig.p}")
    eig = sym_eig(x @ x.T / x.shape[1])
    for qk in sig.dims:
        if eig.values[qk - 1] - eig.values[qk] < EIGENGAP_TOL:
            warnings.warn(
                NonUniqueWarning(f"eigengap at dimension {qk} below {EIGENGAP_TOL:g}")
            )
    return FlagPoint(sig, eig.vectors[:, :sig.q].copy())


# ---------------------------------------------------------------------------
# robust subspace recovery (least absolute deviations)


def _radicands(x, coef, basis):
    proj = basis.T @ x
    r = np.einsum("ij,ij->j", x, x) + coef @ (proj * proj)
    return r, proj


def rsr_lad_objective(data, sig: FlagSignature) -> Objective:
    """Sum of unsquared distances to the averaged nested projection."""
    x = _as_samples(data)
    if x.shape[0] != sig.p:
        raise InvalidInput(f"data dimension {x.shape[0]} does not match p={sig.p}")
    coef = residual_col_weights(sig)

    def value(point: FlagPoint) -> float:
        r, _ = _radicands(x, coef, point.basis)
        return float(np.sum(np.sqrt(np.maximum(r, 0.0))))

    def grad(point: FlagPoint) -> np.ndarray:
        r, proj = _radicands(x, coef, point.basis)
        inv = 1.0 / np.sqrt(np.maximum(r, EPS_RADICAND))
        return coef * (x @ (inv[:, None] * proj.T))

    return Objective("rsr_lad", value, grad)


def lad_residuals(data, point: FlagPoint) -> np.ndarray:
    """Per-sample distances ||x - avg-projector x||, the outlier scores."""
    x = _as_samples(data)
    coef = residual_col_weights(point.signature)
    r, _ = _radicands(x, coef, point.basis)
    return np.sqrt(np.maximum(r, 0.0))


# ---------------------------------------------------------------------------
# trace ratio / discriminant analysis


@dataclass(frozen=True)
class TraceRatioProblem:
    """Symmetric PSD pair (A, B); the flag maximizes weighted tr A / tr B."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidInput("A and B must be square matrices of equal size")
        for name, m in (("A", a), ("B", b)):
            scale = max(1.0, float(np.abs(m).max()))
            if np.abs(m - m.T).max() > 1e-10 * scale:
                raise InvalidInput(f"{name} is not symmetric within 1e-10")
            if np.linalg.eigvalsh((m + m.T) / 2).min() < -1e-10 * scale:
                raise InvalidInput(f"{name} is not positive semidefinite")

    @property
    def p(self) -> int:
        return self.a.shape[0]


def check_denominator_rank(prob: TraceRatioProblem, sig: FlagSignature) -> None:
    """rank(B) must exceed p - q_d or every flag has a vanishing denominator."""
    vals = np.linalg.eigvalsh(prob.b)
    rank = int(np.sum(vals > 1e-12 * max(np.trace(prob.b), np.finfo(float).tiny)))
    if rank <= prob.p - sig.q:
        raise RankDeficient(
            f"rank(B)={rank} must exceed p - q_d = {prob.p - sig.q}"
        )


def trace_ratio_objective(prob: TraceRatioProblem, sig: FlagSignature) -> Objective:
    """Negated weighted trace ratio (minimization convention)."""
    if prob.p != sig.p:
        raise InvalidInput(f"matrix size {prob.p} does not match p={sig.p}")
    check_denominator_rank(prob, sig)
    coef = trace_col_weights(sig)

    def parts(basis):
        au = prob.a @ basis
        bu = prob.b @ basis
        num = float(coef @ np.einsum("ij,ij->j", basis, au))
        den = float(coef @ np.einsum("ij,ij->j", basis, bu))
        return au, bu, num, den

    def value(point: FlagPoint) -> float:
        _, _, num, den = parts(point.basis)
        if den <= 1e-14:
            raise DegenerateDenominator(f"trace ratio denominator {den:.3e}")
        return -num / den

    def grad(point: FlagPoint) -> np.ndarray:
        au, bu, num, den = parts(point.basis)
        if den <= 1e-14:
            raise DegenerateDenominator(f"trace ratio denominator {den:.3e}")
        return -2.0 * coef * (au * den - num * bu) / (den * den)

    return Objective("trace_ratio", value, grad)


def build_lda_matrices(data: Dataset) -> TraceRatioProblem:
    """Between/within scatter pair, ridge-regularized and trace-normalized."""
    if data.labels is None:
        raise InvalidInput("labels are required to build discriminant matrices")
    x, y = data.samples, data.labels
    classes = np.unique(y)
    if classes.size < 2:
        raise InvalidInput("need at least two classes")
    mu = x.mean(axis=1, keepdims=True)
    p = x.shape[0]
    a = np.zeros((p, p))
    b = np.zeros((p, p))
    for c in classes:
        xc = x[:, y == c]
        mc = xc.mean(axis=1, keepdims=True)
        dm = mc - mu
        a += dm @ dm.T
        dc = xc - mc
        b += dc @ dc.T
    out = []
    for m in (a, b):
        tr = float(np.trace(m))
        m = m + 1e-5 * (tr if tr > 0 else 1.0) * np.eye(p)
        out.append(m / np.trace(m))
    return TraceRatioProblem(out[0], out[1])


# ---------------------------------------------------------------------------
# sparse spectral clustering


@dataclass(frozen=True)
class SscProblem:
    """Graph Laplacian plus an entrywise-l1 sparsity weight on the projector."""

    laplacian: np.ndarray
    beta: float = 0.1

    def __post_init__(self):
        lap = np.asarray(self.laplacian, dtype=float)
        object.__setattr__(self, "laplacian", lap)
        if lap.ndim != 2 or lap.shape[0] != lap.shape[1]:
            raise InvalidInput("laplacian must be square")
        scale = max(1.0, float(np.abs(lap).max()))
        if np.abs(lap - lap.T).max() > 1e-10 * scale:
            raise InvalidInput("laplacian is not symmetric within 1e-10")
        if self.beta < 0:
            raise InvalidInput("beta must be nonnegative")

    @property
    def n(self) -> int:
        return self.laplacian.shape[0]


def ssc_objective(prob: SscProblem, sig: FlagSignature) -> Objective:
    """<avg-projector, L> plus beta times a smoothed l1 of the projector.

    The l1 term uses sqrt(m^2 + EPS_SMOOTH^2) entrywise so the objective
    stays differentiable; the flag lives in the sample space (p = n).
    """
    if prob.n != sig.p:
        raise InvalidInput(f"laplacian size {prob.n} does not match p={sig.p}")
    lap = prob.laplacian
    beta = prob.beta
    cc = trace_col_weights(sig) / sig.d

    def avg_proj(basis):
        return (basis * cc) @ basis.T

    def value(point: FlagPoint) -> float:
        basis = point.basis
        lu = lap @ basis
        smooth = cc @ np.einsum("ij,ij->j", basis, lu)
        if beta:
            pi = avg_proj(basis)
            smooth += beta * np.sum(np.sqrt(pi * pi + EPS_SMOOTH**2))
        return float(smooth)

    def grad(point: FlagPoint) -> np.ndarray:
        basis = point.basis
        g = lap @ basis
        if beta:
            pi = avg_proj(basis)
            g = g + beta * (pi / np.sqrt(pi * pi + EPS_SMOOTH**2)) @ basis
        return 2.0 * cc * g

    return Objective("ssc", value, grad)


# ---------------------------------------------------------------------------
# domain-invariant projection (kernel mmd between projected domains)


@dataclass(frozen=True)
class DipProblem:
    """Source/target sample matrices and a Gaussian kernel bandwidth."""

    source: np.ndarray
    target: np.ndarray
    sigma: float

    def __post_init__(self):
        xs = np.asarray(self.source, dtype=float)
        xt = np.asarray(self.target, dtype=float)
        object.__setattr__(self, "source", xs)
        object.__setattr__(self, "target", xt)
        if xs.ndim != 2 or xt.ndim != 2 or xs.shape[0] != xt.shape[0]:
            raise InvalidInput("source and target must share the feature dimension")
        if not (self.sigma > 0):
            raise InvalidInput("sigma must be positive")

    @property
    def p(self) -> int:
        return self.source.shape[0]


def dip_mmd_objective(prob: DipProblem, sig: FlagSignature) -> Objective:
    """Gaussian-kernel MMD between the two domains after averaged projection.

    Distances between projected points enter through z^T avg-projector z =
    sum_k (v_k/d) ||U_k^T z||^2 for every pairwise difference z.
    """
    if prob.p != sig.p:
        raise InvalidInput(f"data dimension {prob.p} does not match p={sig.p}")
    xs, xt = prob.source, prob.target
    ns, nt = xs.shape[1], xt.shape[1]
    two_s2 = 2.0 * prob.sigma**2
    cc = trace_col_weights(sig) / sig.d

    def kernels(basis):
        ps = basis.T @ xs
        pt = basis.T @ xt
        qs = ps.T @ (cc[:, None] * ps)
        qt = pt.T @ (cc[:, None] * pt)
        qst = ps.T @ (cc[:, None] * pt)
        ds = np.diag(qs)
        dt = np.diag(qt)
        ks = np.exp(-np.maximum(ds[:, None] + ds[None, :] - 2 * qs, 0.0) / two_s2)
        kt = np.exp(-np.maximum(dt[:, None] + dt[None, :] - 2 * qt, 0.0) / two_s2)
        kst = np.exp(-np.maximum(ds[:, None] + dt[None, :] - 2 * qst, 0.0) / two_s2)
        return ks, kt, kst

    def value(point: FlagPoint) -> float:
        ks, kt, kst = kernels(point.basis)
        return float(ks.sum() / ns**2 + kt.sum() / nt**2 - 2.0 * kst.sum() / (ns * nt))

    def weighted_moment(x, y, c):
        # sum_ij c_ij (x_i - y_j)(x_i - y_j)^T
        return ((x * c.sum(axis=1)) @ x.T + (y * c.sum(axis=0)) @ y.T
                - x @ c @ y.T - y @ c.T @ x.T)

    def grad(point: FlagPoint) -> np.ndarray:
        ks, kt, kst = kernels(point.basis)
        m = (weighted_moment(xs, xs, ks) / ns**2
             + weighted_moment(xt, xt, kt) / nt**2
             - 2.0 * weighted_moment(xs, xt, kst) / (ns * nt))
        return (-cc / prob.sigma**2) * (m @ point.basis)

    return Objective("dip_mmd", value, grad)


# ---------------------------------------------------------------------------
# centering


def center(data: Dataset, mode: str = "mean") -> Dataset:
    """Subtract the sample mean or the geometric median (Weiszfeld)."""
    x = data.samples
    if mode == "mean":
        c = x.mean(axis=1, keepdims=True)
    elif mode == "median":
        c = _geometric_median(x)[:, None]
    else:
        raise InvalidInput(f"unknown centering mode {mode!r}")
    return Dataset(x - c, labels=data.labels, outlier_mask=data.outlier_mask,
                   generator=data.generator, seed=data.seed)


def _geometric_median(x, tol=1e-9, max_iter=1000):
    y = x.mean(axis=1)
    for _ in range(max_iter):
        dist = np.linalg.norm(x - y[:, None], axis=0)
        dist = np.maximum(dist, 1e-300)
        w = 1.0 / dist
        y_new = (x * w).sum(axis=1) / w.sum()
        if np.linalg.norm(y_new - y) <= tol:
            return y_new
        y = y_new
    return y
