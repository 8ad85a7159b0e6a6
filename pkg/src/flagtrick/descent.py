"""First-order minimization on flag manifolds with Armijo backtracking."""

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateRetraction, NumericalBlowup
from .flag import FlagPoint, FlagSignature, random_uniform, retract, riemannian_gradient
from .numerics import polar_factor


@dataclass(frozen=True)
class Objective:
    """Value and Euclidean gradient of a smooth function of the basis.

    Both callables accept a FlagPoint whose basis may drift slightly off the
    manifold (finite-difference probing relies on that); they must evaluate
    the defining formula as written.
    """

    name: str
    value: Callable[[FlagPoint], float]
    euclid_grad: Callable[[FlagPoint], np.ndarray]


class Termination(enum.Enum):
    GRAD_TOL = "grad_tol"
    MAX_ITERS = "max_iters"
    LINE_SEARCH_FAIL = "line_search_fail"


@dataclass(frozen=True)
class DescentConfig:
    max_iters: int = 500
    grad_tol: float = 1e-6
    initial_step: float = 1.0
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    max_backtracks: int = 40
    repolarize_every: int = 50


@dataclass
class OptTrace:
    """Per-iteration objective, Riemannian gradient norm and accepted step.

    The final row always carries step 0 (the state at termination), so the
    objective column is the full monotone history including the last iterate.
    """

    objective: np.ndarray
    grad_norm: np.ndarray
    step: np.ndarray
    reason: Termination

    @classmethod
    def from_rows(cls, rows, reason):
        arr = np.array(rows, dtype=float).reshape(-1, 3)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], reason)


def save_trace(trace: OptTrace, path) -> None:
    data = np.column_stack(
        [np.arange(len(trace.objective)), trace.objective, trace.grad_norm, trace.step]
    )
    np.savetxt(path, data, delimiter=",", header="iter,objective,grad_norm,step",
               comments="", fmt=["%d", "%.17g", "%.17g", "%.17g"])


def _finite(x) -> bool:
    return bool(np.all(np.isfinite(x)))


def steepest_descent(obj: Objective, init: FlagPoint, cfg: DescentConfig = DescentConfig()):
    """Riemannian steepest descent with polar retraction.

    Returns (point, trace). Line-search failure is not an error: the best
    iterate so far comes back with reason LINE_SEARCH_FAIL. Non-finite
    objective or gradient values raise NumericalBlowup.
    """
    x = init
    fx = float(obj.value(x))
    if not np.isfinite(fx):
        raise NumericalBlowup(f"{obj.name}: non-finite objective at the initial point")
    rows = []
    alpha_prev = cfg.initial_step
    for it in range(1, cfg.max_iters + 1):
        egrad = obj.euclid_grad(x)
        if not _finite(egrad):
            raise NumericalBlowup(f"{obj.name}: non-finite gradient at iteration {it}")
        grad = riemannian_gradient(x, egrad)
        gn = float(np.linalg.norm(grad))
        if gn <= cfg.grad_tol:
            rows.append((fx, gn, 0.0))
            return x, OptTrace.from_rows(rows, Termination.GRAD_TOL)

        # Armijo backtracking; warm start one notch above the last accepted step
        alpha = min(cfg.initial_step, alpha_prev / cfg.backtrack_factor)
        accepted = False
        for _ in range(cfg.max_backtracks + 1):
            try:
                cand = retract(x, grad, alpha)
            except DegenerateRetraction:
                alpha *= cfg.backtrack_factor
                continue
            fc = float(obj.value(cand))
            if np.isfinite(fc) and fc <= fx - cfg.armijo_c * alpha * gn * gn:
                accepted = True
                break
            alpha *= cfg.backtrack_factor
        if not accepted:
            rows.append((fx, gn, 0.0))
            return x, OptTrace.from_rows(rows, Termination.LINE_SEARCH_FAIL)

        rows.append((fx, gn, alpha))
        x, fx, alpha_prev = cand, fc, alpha
        if cfg.repolarize_every and it % cfg.repolarize_every == 0:
            # scrub accumulated roundoff; keep fx so the trace stays monotone
            x = FlagPoint(x.signature, polar_factor(x.basis))

    egrad = obj.euclid_grad(x)
    gn = float(np.linalg.norm(riemannian_gradient(x, egrad))) if _finite(egrad) else np.nan
    rows.append((fx, gn, 0.0))
    return x, OptTrace.from_rows(rows, Termination.MAX_ITERS)


def steepest_descent_restarts(obj: Objective, sig: FlagSignature,
                              cfg: DescentConfig = DescentConfig(),
                              restarts: int = 5, seed: int = 0):
    """Best of several seeded random starts, judged by final objective."""
    best = None
    for r in range(restarts):
        point, trace = steepest_descent(obj, random_uniform(sig, seed + r), cfg)
        if best is None or trace.objective[-1] < best[1].objective[-1]:
            best = (point, trace)
    return best


def fd_gradient(obj: Objective, point: FlagPoint, h: float = 1e-6) -> np.ndarray:
    """Central-difference Euclidean gradient over raw basis entries.

    Perturbations are ambient (no retraction), so this differentiates the
    objective's formula exactly as euclid_grad should.
    """
    base = point.basis
    out = np.empty_like(base)
    for i in range(base.shape[0]):
        for j in range(base.shape[1]):
            bump = np.zeros_like(base)
            bump[i, j] = h
            fp = obj.value(FlagPoint(point.signature, base + bump))
            fm = obj.value(FlagPoint(point.signature, base - bump))
            out[i, j] = (fp - fm) / (2.0 * h)
    return out
