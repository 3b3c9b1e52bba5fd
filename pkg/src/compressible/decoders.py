"""Decoders for noiseless Gaussian compressed sensing ``y = Phi x``.

* :func:`decode_trivial` -- the zero vector.
* :func:`decode_ls` -- minimum l2-norm solution ``Phi^+ y`` via QR of ``Phi^T``.
* :func:`decode_oracle` -- least squares on a known support ``Lambda``.
* :func:`decode_l1` -- basis pursuit, ``min ||x||_1 s.t. Phi x = y``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import ConditioningError, DomainError

__all__ = [
    "L1Diagnostics",
    "decode_trivial",
    "decode_ls",
    "decode_oracle",
    "decode_l1",
    "relative_sq_error",
]

_RANK_RTOL = 1e-10


def relative_sq_error(x_hat, x) -> float:
    """``||x_hat - x||^2 / ||x||^2``; NaN when ``x`` is zero."""
    x = np.asarray(x, dtype=float)
    den = float(x @ x)
    if den == 0.0:
        return float("nan")
    r = np.asarray(x_hat, dtype=float) - x
    return float(r @ r) / den


def _as_matrix(phi):
    return np.asarray(getattr(phi, "entries", phi), dtype=float)


def decode_trivial(y, n):
    """Zero vector of length ``n``."""
    return np.zeros(int(n))


def _qr_checked(a, what):
    q, r = linalg.qr(a, mode="economic")
    d = np.abs(np.diag(r))
    if d.size and d.min() <= _RANK_RTOL * d.max():
        rank = int(np.sum(d > _RANK_RTOL * d.max()))
        raise ConditioningError(f"{what} is numerically rank deficient (rank {rank} of {d.size})", rank)
    return q, r


def decode_ls(phi, y):
    """Minimum-norm solution of ``Phi x = y`` for full-row-rank ``Phi``.

    With ``Phi^T = Q R`` the solution is ``Q R^{-T} y``; no normal
    equations are formed.
    """
    a = _as_matrix(phi)
    y = np.asarray(y, dtype=float)
    q, r = _qr_checked(a.T, "Phi")
    w = linalg.solve_triangular(r, y, trans="T")
    return q @ w


def decode_oracle(phi, y, support):
    """Least squares restricted to the columns in ``support``.

    ``support`` must have fewer than ``m`` entries; the estimate is zero
    off the support.
    """
    a = _as_matrix(phi)
    m, n = a.shape
    support = np.asarray(support, dtype=int).ravel()
    if support.size >= m:
        raise DomainError(f"oracle support size {support.size} must be below m={m}")
    x = np.zeros(n)
    if support.size == 0:
        return x
    q, r = _qr_checked(a[:, support], "Phi restricted to the support")
    x[support] = linalg.solve_triangular(r, q.T @ np.asarray(y, dtype=float))
    return x


@dataclass(frozen=True)
class L1Diagnostics:
    iterations: int
    residual: float  # ||Phi x - y|| / ||y||
    converged: bool
    certified: bool  # optimality verified by an explicit dual certificate


def _certify(a, y, support, nu0, tol=1e-9):
    """Least squares on a guessed support, accepted only if provably optimal.

    ``x_S`` solves ``Phi_S x_S = y``.  The dual vector is ``nu0`` (a fit to
    the ADMM multiplier) corrected so that ``Phi_S^T nu = sign(x_S)``.  If
    ``|Phi^T nu| <= 1`` off the support, ``x`` minimizes the l1 norm over
    the affine set.
    """
    m, n = a.shape
    if support.size == 0 or support.size > m:
        return None
    a_s = a[:, support]
    x_s, *_ = np.linalg.lstsq(a_s, y, rcond=None)
    if np.linalg.norm(a_s @ x_s - y) > 1e-10 * np.linalg.norm(y):
        return None
    sg = np.sign(x_s)
    if np.any(sg == 0):
        return None
    corr, *_ = np.linalg.lstsq(a_s.T, sg - a_s.T @ nu0, rcond=None)
    g = a.T @ (nu0 + corr)
    if np.max(np.abs(g[support] - sg)) > 1e-8:
        return None
    g[support] = 0.0
    if np.max(np.abs(g)) > 1.0 + tol:
        return None
    x = np.zeros(n)
    x[support] = x_s
    return x


class _Polisher:
    """Tries each distinct support guess once."""

    def __init__(self, a, y, pinv_t):
        self.a, self.y, self.pinv_t = a, y, pinv_t
        self.tried = set()

    def __call__(self, x, z, dual):
        m = self.a.shape[0]
        nz = np.flatnonzero(z)
        # generic basic solutions have exactly m nonzeros
        top = np.sort(np.argpartition(-np.abs(x), m - 1)[:m])
        nu0 = None
        for supp in (nz, top):
            key = supp.tobytes()
            if key in self.tried:
                continue
            self.tried.add(key)
            if nu0 is None:
                nu0 = self.pinv_t.T @ dual
            out = _certify(self.a, self.y, supp, nu0)
            if out is not None:
                return out
        return None


def decode_l1(phi, y, tol=1e-7, max_iters=50_000, relax=1.6, check_every=25):
    """Basis pursuit by over-relaxed ADMM with exact affine projection.

    Splits ``min ||x||_1 s.t. Phi x = y`` into a projection onto
    ``{x : Phi x = y}`` (through a cached Cholesky factor of ``Phi Phi^T``)
    and soft thresholding, with the penalty adapted by residual balancing.  Every ``check_every`` iterations the sparse
    iterate is polished on its support and accepted if a dual certificate
    proves optimality; otherwise iteration stops once both the primal gap
    ``||x - z||`` and the change in ``z`` fall below ``tol * ||y||``.

    Returns ``(x_hat, L1Diagnostics)``.  Hitting ``max_iters`` is reported
    through ``converged=False`` rather than raised.
    """
    a = _as_matrix(phi)
    y = np.asarray(y, dtype=float)
    m, n = a.shape
    ny = float(np.linalg.norm(y))
    if ny == 0.0:
        return np.zeros(n), L1Diagnostics(0, 0.0, True, True)

    chol = linalg.cho_factor(a @ a.T)
    pinv_t = linalg.cho_solve(chol, a).T  # Phi^T (Phi Phi^T)^{-1}
    x0 = pinv_t @ y
    rho = n / max(float(np.abs(x0).sum()), np.finfo(float).tiny)

    polish = _Polisher(a, y, pinv_t)
    z = x0.copy()
    u = np.zeros(n)
    x = x0
    it = 0
    for it in range(1, int(max_iters) + 1):
        v = z - u
        x = v - pinv_t @ (a @ v - y)
        xr = relax * x + (1.0 - relax) * z
        w = xr + u
        z_old = z
        z = np.sign(w) * np.maximum(np.abs(w) - 1.0 / rho, 0.0)
        u = u + xr - z
        if it % check_every == 0:
            polished = polish(x, z, rho * u)
            if polished is not None:
                res = float(np.linalg.norm(a @ polished - y)) / ny
                return polished, L1Diagnostics(it, res, True, True)
            r_primal = float(np.linalg.norm(x - z))
            step = float(np.linalg.norm(z - z_old))
            if r_primal < tol * ny and step < tol * ny:
                res = float(np.linalg.norm(a @ x - y)) / ny
                return x, L1Diagnostics(it, res, True, False)
            # residual balancing; the projection does not depend on rho
            if r_primal > 10.0 * rho * step:
                rho, u = 2.0 * rho, u / 2.0
            elif rho * step > 10.0 * r_primal:
                rho, u = rho / 2.0, 2.0 * u
    res = float(np.linalg.norm(a @ x - y)) / ny
    return x, L1Diagnostics(it, res, False, False)
