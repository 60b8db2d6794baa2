"""Damped Newton iteration."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

log = logging.getLogger(__name__)

MAX_HALVINGS = 30


class NewtonDiverged(RuntimeError):
    def __init__(self, iteration: int, residual: float, message: str = ""):
        self.iteration = iteration
        self.residual = residual
        super().__init__(message or f"Newton failed after {iteration} iterations (residual {residual:.3e})")


class LinearSolveFailed(RuntimeError):
    pass


@dataclass
class NewtonStats:
    iterations: int
    residual: float
    halvings: int


def _norm(r) -> float:
    return float(np.linalg.norm(np.atleast_1d(r)))


def _linear_solve(J, r):
    if np.isscalar(r) or np.ndim(r) == 0:
        J = float(np.asarray(J).item()) if not sp.issparse(J) else float(J.toarray().item())
        if J == 0.0 or not np.isfinite(J):
            raise LinearSolveFailed("singular scalar Jacobian")
        return r / J
    if sp.issparse(J):
        with np.errstate(all="ignore"), warnings.catch_warnings():
            warnings.simplefilter("ignore", spla.MatrixRankWarning)
            try:
                x = spla.spsolve(J.tocsc(), r)
            except RuntimeError as exc:  # SuperLU reports exact singularity this way
                raise LinearSolveFailed(str(exc)) from exc
    else:
        try:
            x = np.linalg.solve(np.asarray(J), r)
        except np.linalg.LinAlgError as exc:
            raise LinearSolveFailed(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise LinearSolveFailed("linear solve produced non-finite values")
    return x


def newton_solve(residual, jacobian, guess, tol: float = 1e-10, max_iter: int = 50, rhs_norm: float = 0.0):
    """Solve ``residual(x) = 0``.

    Stops once ``|residual| <= tol * (1 + rhs_norm)``. Each step is halved
    until the residual norm decreases (at most 30 times). Returns
    ``(x, NewtonStats)``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    x = guess.copy() if hasattr(guess, "copy") else guess
    r = residual(x)
    rn = _norm(r)
    target = tol * (1.0 + rhs_norm)
    halvings = 0
    for it in range(max_iter + 1):
        if rn <= target:
            return x, NewtonStats(it, rn, halvings)
        if it == max_iter:
            break
        dx = _linear_solve(jacobian(x), -r)
        step = 1.0
        for _ in range(MAX_HALVINGS + 1):
            x_try = x + step * dx
            r_try = residual(x_try)
            rn_try = _norm(r_try)
            if np.isfinite(rn_try) and rn_try < rn:
                break
            step *= 0.5
            halvings += 1
        else:
            raise NewtonDiverged(it + 1, rn, f"line search stalled at iteration {it + 1} (residual {rn:.3e})")
        log.debug("newton it=%d residual=%.3e step=%g", it + 1, rn_try, step)
        x, r, rn = x_try, r_try, rn_try
    raise NewtonDiverged(max_iter, rn)
