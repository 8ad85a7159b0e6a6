"""Flag manifold Fl(p; q_1 < ... < q_d) in Stiefel coordinates.

A point is an orthonormal p x q_d basis whose first q_k columns span the
k-th nested subspace. Block k means columns q_{k-1}..q_k (sizes b_k).
All tangent-space formulas below are written blockwise in that layout.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRetraction, InvalidInput, ParseError
from .numerics import polar_factor, principal_angles


@dataclass(frozen=True)
class FlagSignature:
    """Ambient dimension p and strictly increasing subspace dimensions."""

    p: int
    dims: tuple

    def __post_init__(self):
        dims = tuple(int(x) for x in self.dims)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "p", int(self.p))
        if len(dims) == 0:
            raise InvalidInput("signature needs at least one dimension")
        prev = 0
        for qk in dims:
            if qk <= prev:
                raise InvalidInput(f"dimensions must increase strictly: {dims}")
            prev = qk
        if dims[-1] >= self.p:
            raise InvalidInput(f"largest dimension {dims[-1]} must stay below p={self.p}")

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def q(self) -> int:
        return self.dims[-1]

    @property
    def bounds(self) -> tuple:
        """Column offsets (0, q_1, ..., q_d)."""
        return (0,) + self.dims

    def block(self, basis: np.ndarray, k: int) -> np.ndarray:
        """Columns of block k (0-based) as a view."""
        return basis[:, self.bounds[k]:self.bounds[k + 1]]


@dataclass(frozen=True)
class FlagPoint:
    """Stiefel representative of a flag; treat the basis as read-only."""

    signature: FlagSignature
    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        object.__setattr__(self, "basis", b)
        if b.shape != (self.signature.p, self.signature.q):
            raise InvalidInput(
                f"basis shape {b.shape} does not match signature "
                f"({self.signature.p}, {self.signature.q})"
            )

    def block(self, k: int) -> np.ndarray:
        return self.signature.block(self.basis, k)


def validate(point: FlagPoint, tol: float = 1e-8) -> bool:
    """True when the basis columns are orthonormal within tol."""
    b = point.basis
    if not np.all(np.isfinite(b)):
        return False
    g = b.T @ b
    return np.abs(g - np.eye(b.shape[1])).max() <= tol


def random_uniform(sig: FlagSignature, seed: int) -> FlagPoint:
    """Uniformly distributed flag: polar factor of a seeded Gaussian matrix."""
    for s in (seed, seed + 1):
        g = np.random.default_rng(s).standard_normal((sig.p, sig.q))
        try:
            return FlagPoint(sig, polar_factor(g))
        except DegenerateRetraction:
            continue
    raise DegenerateRetraction(f"degenerate Gaussian draw twice (seeds {seed}, {seed + 1})")


def nested_projectors(point: FlagPoint) -> list:
    """Projectors onto the nested subspaces S_1 c ... c S_d."""
    if not validate(point):
        raise InvalidInput("basis columns are not orthonormal")
    sig = point.signature
    out = []
    acc = np.zeros((sig.p, sig.p))
    for k in range(sig.d):
        uk = point.block(k)
        acc = acc + uk @ uk.T
        out.append(acc.copy())
    return out


def average_projector(point: FlagPoint) -> np.ndarray:
    """Mean of the nested projectors; eigenvalues lie in {0, 1/d, ..., 1}."""
    if not validate(point):
        raise InvalidInput("basis columns are not orthonormal")
    sig = point.signature
    d = sig.d
    out = np.zeros((sig.p, sig.p))
    for k in range(d):
        uk = point.block(k)
        out += ((d - k) / d) * (uk @ uk.T)
    return out


def _split(sig: FlagSignature, mat: np.ndarray) -> list:
    return [sig.block(mat, k) for k in range(sig.d)]


def _check_shape(point: FlagPoint, mat: np.ndarray) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    if mat.shape != point.basis.shape:
        raise InvalidInput(
            f"matrix shape {mat.shape} does not match basis {point.basis.shape}"
        )
    return mat


def tangent_project(point: FlagPoint, amb: np.ndarray) -> np.ndarray:
    """Orthogonal projection onto the horizontal space at the point.

    The horizontal space is {D : U_k^T D_k = 0, U_l^T D_k + D_l^T U_k = 0};
    this map is idempotent and fixes every riemannian_gradient output.
    """
    sig = point.signature
    ub = _split(sig, point.basis)
    xb = _split(sig, _check_shape(point, amb))
    out = []
    for k in range(sig.d):
        t = xb[k] - ub[k] @ (ub[k].T @ xb[k])
        for l in range(sig.d):
            if l != k:
                t = t - ub[l] @ ((ub[l].T @ xb[k] + xb[l].T @ ub[k]) / 2.0)
        out.append(t)
    return np.hstack(out)


def riemannian_gradient(point: FlagPoint, egrad: np.ndarray) -> np.ndarray:
    """Blockwise gradient G_k - U_k U_k^T G_k - sum_{l != k} U_l G_l^T U_k."""
    sig = point.signature
    ub = _split(sig, point.basis)
    gb = _split(sig, _check_shape(point, egrad))
    out = []
    for k in range(sig.d):
        t = gb[k] - ub[k] @ (ub[k].T @ gb[k])
        for l in range(sig.d):
            if l != k:
                t = t - ub[l] @ (gb[l].T @ ub[k])
        out.append(t)
    return np.hstack(out)


def retract(point: FlagPoint, direction: np.ndarray, step: float) -> FlagPoint:
    """Polar retraction of basis - step * direction back onto the manifold."""
    return FlagPoint(point.signature, polar_factor(point.basis - step * direction))


def flag_distance(a: FlagPoint, b: FlagPoint) -> np.ndarray:
    """Per-level distances: entry k is the 2-norm of the principal angles
    between the leading q_k columns of the two bases."""
    if a.signature != b.signature:
        raise InvalidInput("flag distance needs matching signatures")
    out = np.empty(a.signature.d)
    for k, qk in enumerate(a.signature.dims):
        th = principal_angles(a.basis[:, :qk], b.basis[:, :qk])
        out[k] = np.linalg.norm(th)
    return out


def save_flag(point: FlagPoint, path) -> None:
    dims = ",".join(str(x) for x in point.signature.dims)
    header = f"# flag p={point.signature.p} dims={dims}"
    np.savetxt(path, point.basis, delimiter=",", header=header, comments="")


def load_flag(path) -> FlagPoint:
    with open(path) as fh:
        first = fh.readline().strip()
    if not first.startswith("# flag"):
        raise ParseError(f"missing flag header in {path}", row=0)
    fields = dict(tok.split("=", 1) for tok in first[len("# flag"):].split() if "=" in tok)
    try:
        p = int(fields["p"])
        dims = tuple(int(x) for x in fields["dims"].split(","))
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad flag header {first!r}", row=0) from exc
    basis = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return FlagPoint(FlagSignature(p, dims), basis)
