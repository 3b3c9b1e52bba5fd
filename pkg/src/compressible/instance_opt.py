"""Instance optimality of l1 decoding with Gaussian encoders.

Uniform guarantees ``||x_hat - x|| <= C sigma_k(x)`` need the robust null
space property; the constant is ``C = 2(1+eta)/(1-eta)``.  Gaussian
encoders only admit such guarantees for ``k/N`` below ``KAPPA0``, so a
distribution whose ``G_1`` still exceeds 1/2 there gets no useful
guarantee: the bound is no better than what the zero decoder achieves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize

from .distributions import DistributionModel
from .errors import DomainError
from .metrics import g_fun
from .rng import make_rng

# Largest k/N for which the robust null space property can hold for a
# Gaussian encoder at any (eta, delta); read off the Donoho-Tanner strong
# threshold, not computed here.
KAPPA0 = 0.18


def io_constant(eta) -> float:
    """``2 (1 + eta) / (1 - eta)``; ``inf`` once ``eta >= 1``."""
    eta = float(eta)
    if eta < 0 or math.isnan(eta):
        raise DomainError(f"eta must be nonnegative, got {eta}")
    if eta >= 1.0:
        return math.inf
    return 2.0 * (1.0 + eta) / (1.0 - eta)


@dataclass(frozen=True)
class IOAssessment:
    dist: str
    g1_at_kappa0: float
    trivial_at_kappa0: bool
    weak_boundary_delta0: float | None
    kappa0: float = KAPPA0

    def to_dict(self) -> dict:
        return {
            "dist": self.dist,
            "kappa0": self.kappa0,
            "g1_at_kappa0": self.g1_at_kappa0,
            "trivial_at_kappa0": self.trivial_at_kappa0,
            "weak_boundary_delta0": self.weak_boundary_delta0,
        }


def weak_boundary(dist: DistributionModel, xtol=1e-12):
    """Root of ``G_1(delta) = 1/2`` on (0, 1), or None when there is none.

    ``G_1`` decreases from 1 at 0 to 0 at 1 for finite first moment, so
    the root is unique and bracketed.
    """
    if not dist.moment_is_finite(1):
        return None
    f = lambda d: g_fun(dist, 1, d) - 0.5
    lo, hi = 1e-12, 1.0 - 1e-12
    if f(lo) <= 0 or f(hi) >= 0:
        return None
    return float(optimize.brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps))


def trivial_guarantee_test(dist: DistributionModel) -> IOAssessment:
    """Is the best l1 instance-optimality guarantee at ``KAPPA0`` trivial?"""
    g1 = g_fun(dist, 1, KAPPA0)
    return IOAssessment(dist.spec, g1, g1 >= 0.5, weak_boundary(dist))


def kernel_basis(phi) -> np.ndarray:
    """Orthonormal basis of ``ker(Phi)`` as columns, from the SVD."""
    a = np.asarray(getattr(phi, "entries", phi), dtype=float)
    return linalg.null_space(a)


def nsp_ratio(z, k) -> float:
    """``||z_top-k||_1 / ||z_rest||_1``: the worst Omega of size k for this z."""
    mags = np.sort(np.abs(np.asarray(z, dtype=float)))[::-1]
    head, tail = mags[:k].sum(), mags[k:].sum()
    if head == 0.0:
        return 0.0
    return math.inf if tail == 0.0 else float(head / tail)


@dataclass(frozen=True)
class NSPResult:
    holds_so_far: bool
    worst_ratio: float
    directions: int
    eta: float
    k: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def robust_nsp_check(phi, eta, k, n_directions=1000, seed=0) -> NSPResult:
    """Randomized search for a kernel vector that violates the robust NSP.

    Draws Gaussian directions in ``ker(Phi)`` and records the worst ratio
    ``||z_top-k||_1 / ||z_rest||_1``.  ``holds_so_far=False`` is a proof
    that the property fails for ``eta``; ``True`` proves nothing, since
    certifying the property is NP-hard in general.
    """
    k = int(k)
    basis = kernel_basis(phi)
    n, dim = basis.shape
    if k < 0 or k > n:
        raise DomainError(f"k must lie in [0, N], got {k}")
    if k == 0 or dim == 0:
        return NSPResult(True, 0.0, 0, float(eta), k)
    rng = make_rng(seed, "nsp")
    worst = 0.0
    done = 0
    batch = 256
    while done < n_directions:
        b = min(batch, n_directions - done)
        z = basis @ rng.standard_normal((dim, b))
        mags = -np.sort(-np.abs(z), axis=0)
        head, tail = mags[:k].sum(axis=0), mags[k:].sum(axis=0)
        with np.errstate(divide="ignore"):
            ratios = np.where(tail > 0, head / np.where(tail > 0, tail, 1.0), np.inf)
        worst = max(worst, float(ratios.max()))
        done += b
        if worst >= eta:
            break
    return NSPResult(worst < eta, worst, done, float(eta), k)
