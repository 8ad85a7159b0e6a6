"""Solvers that exploit problem structure instead of generic descent.

fmf        iteratively reweighted SVD for the least-absolute-deviations flag
flag_itr   Newton-type root finder for the weighted trace-ratio flag
plus the spectral-clustering plumbing (graph Laplacian, k-means stage) and a
kernelized trace-ratio embedding.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from sklearn.cluster import KMeans

from .descent import OptTrace, Termination
from .errors import (DegenerateDenominator, FallbackToRandomInit, InvalidInput,
                     RankDeficient)
from .flag import FlagPoint, FlagSignature, flag_distance
from .numerics import sym_eig
from .objectives import (TraceRatioProblem, _as_samples, check_denominator_rank,
                         lad_residuals, trace_col_weights)


@dataclass(frozen=True)
class FmfConfig:
    """t_max iterations, eta flag-movement tolerance, eps residual floor.

    delta is the Huber threshold of the derivation behind the reweighting;
    the update below uses the eps floor directly, so delta is informational.
    """

    t_max: int = 100
    eta: float = 1e-6
    eps: float = 1e-10
    delta: float = 1e-10


def _svd_flag(mat: np.ndarray, sig: FlagSignature) -> FlagPoint:
    """Flag of leading left singular subspaces, sign-fixed for determinism."""
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    if s.size < sig.q or s[sig.q - 1] <= 1e-12 * s[0]:
        raise RankDeficient(f"matrix rank below q_d={sig.q}")
    u = u[:, :sig.q]
    lead = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[lead, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return FlagPoint(sig, u * signs)


def fmf(data, sig: FlagSignature, cfg: FmfConfig = FmfConfig()):
    """Flag median subspace via iteratively reweighted SVD.

    Each round scales sample i by 1/max(sqrt(r_i), eps) where r_i is its
    distance to the averaged nested projection, then refits the flag by SVD.
    Stops when the combined per-level flag movement drops below eta.

    Returns (point, trace); trace rows carry (objective, movement, step).
    """
    x = _as_samples(data)
    if x.shape[1] < sig.q:
        raise InvalidInput(f"need at least q_d={sig.q} samples, got {x.shape[1]}")
    if x.shape[0] != sig.p:
        raise InvalidInput(f"data dimension {x.shape[0]} does not match p={sig.p}")
    point = _svd_flag(x, sig)
    rows = []
    reason = Termination.MAX_ITERS
    for _ in range(cfg.t_max):
        res = lad_residuals(x, point)
        scale = np.maximum(np.sqrt(res), cfg.eps)
        new_point = _svd_flag(x / scale, sig)
        delta = float(np.linalg.norm(flag_distance(new_point, point)))
        rows.append((float(res.sum()), delta, 1.0))
        point = new_point
        if delta <= cfg.eta:
            reason = Termination.GRAD_TOL
            break
    rows.append((float(lad_residuals(x, point).sum()), 0.0, 0.0))
    return point, OptTrace.from_rows(rows, reason)


def newton_bracket(prob: TraceRatioProblem, sig: FlagSignature):
    """Root bracket (l_{q_d}, l_1) from the generalized eigenvalues of (A, B).

    Raises FallbackToRandomInit when B is singular and the generalized
    spectrum is unavailable.
    """
    scale = max(float(np.trace(prob.b)), np.finfo(float).tiny)
    if np.linalg.eigvalsh(prob.b).min() <= 1e-12 * scale:
        raise FallbackToRandomInit("B is singular; no generalized eigenvalue bracket")
    vals = scipy.linalg.eigh(prob.a, prob.b, eigvals_only=True)[::-1]
    return float(vals[sig.q - 1]), float(vals[0])


def flag_itr(prob: TraceRatioProblem, sig: FlagSignature, tol: float = 1e-9):
    """Iterative trace-ratio maximization over flags.

    Alternates the leading eigenvector flag of A - rho B with the Newton
    update rho <- weighted tr A / weighted tr B until the flag stops moving.
    Returns (point, rho, trace); trace rows are (-rho, |f(rho)|, movement)
    where f is the strictly decreasing root function of the ratio problem.
    """
    if prob.p != sig.p:
        raise InvalidInput(f"matrix size {prob.p} does not match p={sig.p}")
    check_denominator_rank(prob, sig)
    coef = trace_col_weights(sig)

    def ratio_parts(basis):
        num = float(coef @ np.einsum("ij,ij->j", basis, prob.a @ basis))
        den = float(coef @ np.einsum("ij,ij->j", basis, prob.b @ basis))
        return num, den

    try:
        low, high = newton_bracket(prob, sig)
        rho = 0.5 * (low + high)
    except FallbackToRandomInit:
        # start from the leading eigenvector flag of A instead
        basis = sym_eig(prob.a).vectors[:, :sig.q]
        num, den = ratio_parts(basis)
        rho = num / den if den > 1e-14 else float(np.trace(prob.a)) / max(
            float(np.trace(prob.b)), np.finfo(float).tiny)

    point = None
    rows = []
    reason = Termination.MAX_ITERS
    for _ in range(200):
        eig = sym_eig(prob.a - rho * prob.b)
        new_point = FlagPoint(sig, eig.vectors[:, :sig.q].copy())
        num, den = ratio_parts(new_point.basis)
        if den <= 1e-14:
            raise DegenerateDenominator(f"trace ratio denominator {den:.3e}")
        froot = num - rho * den
        delta = (np.nan if point is None
                 else float(np.linalg.norm(flag_distance(new_point, point))))
        rho = num / den
        rows.append((-rho, abs(froot), delta))
        point = new_point
        if delta <= tol:
            reason = Termination.GRAD_TOL
            break
    rows.append((-rho, abs(froot), 0.0))
    return point, rho, OptTrace.from_rows(rows, reason)


def root_function(prob: TraceRatioProblem, sig: FlagSignature, rho: float) -> float:
    """f(rho) = sum over levels of the leading q_k eigenvalues of A - rho B."""
    vals = sym_eig(prob.a - rho * prob.b).values
    return float(sum(vals[:qk].sum() for qk in sig.dims))


# ---------------------------------------------------------------------------
# spectral clustering plumbing


def build_laplacian(data) -> np.ndarray:
    """Symmetric normalized Laplacian with a median-distance Gaussian kernel."""
    x = _as_samples(data)
    n = x.shape[1]
    if n < 2:
        raise InvalidInput("need at least two samples for a graph")
    sq = _pairwise_sq(x, x)
    iu = np.triu_indices(n, k=1)
    sigma = float(np.median(np.sqrt(sq[iu])))
    if sigma <= 0:
        raise InvalidInput("median pairwise distance is zero (duplicate samples)")
    w = np.exp(-sq / (2.0 * sigma * sigma))
    np.fill_diagonal(w, 0.0)
    dinv = 1.0 / np.sqrt(w.sum(axis=1))
    lap = np.eye(n) - (dinv[:, None] * w) * dinv[None, :]
    return (lap + lap.T) / 2.0


def _pairwise_sq(x, y):
    g = x.T @ y
    nx = np.einsum("ij,ij->j", x, x)
    ny = np.einsum("ij,ij->j", y, y)
    return np.maximum(nx[:, None] + ny[None, :] - 2.0 * g, 0.0)


def spectral_cluster(embedding: np.ndarray, c: int, seed: int) -> np.ndarray:
    """Normalize each sample (column) and k-means it into c groups."""
    emb = np.asarray(embedding, dtype=float)
    norms = np.linalg.norm(emb, axis=0)
    safe = np.where(norms > 0, norms, 1.0)
    pts = (emb / safe).T
    km = KMeans(n_clusters=c, init="k-means++", n_init=10, random_state=seed)
    return km.fit_predict(pts)


# ---------------------------------------------------------------------------
# kernelized trace-ratio embedding


@dataclass(frozen=True)
class KernelEmbedding:
    """Out-of-sample map, training embeddings and the solved ratio."""

    map: object
    embeddings: np.ndarray
    basis: np.ndarray
    rho: float


def kernel_graph_embed(data, sim: np.ndarray, sim_penalty: np.ndarray,
                       sig: FlagSignature, kernel: str = "rbf",
                       sigma: float = None) -> KernelEmbedding:
    """Flag trace-ratio graph embedding in a kernel feature space.

    sim is the affinity to preserve (denominator Laplacian), sim_penalty the
    affinity to separate (numerator Laplacian). The kernel matrix eigenbasis
    is truncated at 1e-10 of the top eigenvalue; embeddings satisfy
    V^T K V = I on the kept subspace.
    """
    x = _as_samples(data)
    n = x.shape[1]
    for name, s in (("sim", sim), ("sim_penalty", sim_penalty)):
        s = np.asarray(s, dtype=float)
        if s.shape != (n, n):
            raise InvalidInput(f"{name} must be n x n")
        if np.abs(s - s.T).max() > 1e-10 * max(1.0, np.abs(s).max()):
            raise InvalidInput(f"{name} must be symmetric")
        if s.min() < 0:
            raise InvalidInput(f"{name} must be nonnegative")

    lap = _laplacian_from_sim(sim)
    lap_p = _laplacian_from_sim(sim_penalty)

    if kernel == "linear":
        kmat = x.T @ x
        kfun = lambda xnew: x.T @ _as_samples(xnew)
    elif kernel == "rbf":
        sq = _pairwise_sq(x, x)
        if sigma is None:
            iu = np.triu_indices(n, k=1)
            sigma = float(np.median(np.sqrt(sq[iu])))
        if not sigma > 0:
            raise InvalidInput("rbf bandwidth must be positive")
        kmat = np.exp(-sq / (2.0 * sigma * sigma))
        kfun = lambda xnew: np.exp(-_pairwise_sq(x, _as_samples(xnew))
                                   / (2.0 * sigma * sigma))
    else:
        raise InvalidInput(f"unknown kernel {kernel!r}")

    eig = sym_eig(kmat)
    if eig.values[0] <= 0:
        raise RankDeficient("kernel matrix has no positive eigenvalues")
    keep = eig.values > 1e-10 * eig.values[0]
    m = int(keep.sum())
    if m <= sig.q:
        raise RankDeficient(f"kernel rank {m} leaves no room above q_d={sig.q}")
    lam = eig.values[:m]
    qbas = eig.vectors[:, :m]
    half = np.sqrt(lam)

    def sandwich(l):
        mmat = (half[:, None] * (qbas.T @ l @ qbas)) * half[None, :]
        return (mmat + mmat.T) / 2.0

    prob = TraceRatioProblem(sandwich(lap_p), sandwich(lap))
    red_sig = FlagSignature(m, sig.dims) if m != sig.p else sig
    point, rho, _ = flag_itr(prob, red_sig)

    v = qbas @ (point.basis / half[:, None])
    embeddings = v.T @ kmat
    return KernelEmbedding(map=lambda xnew: v.T @ kfun(xnew),
                           embeddings=embeddings, basis=v, rho=rho)


def _laplacian_from_sim(sim: np.ndarray) -> np.ndarray:
    s = np.asarray(sim, dtype=float).copy()
    np.fill_diagonal(s, 0.0)
    return np.diag(s.sum(axis=1)) - s
