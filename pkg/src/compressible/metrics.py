"""Compressibility functionals of a density.

``G_q(kappa)`` is the almost-sure limit of the relative best k-term error
``sigma_bar_k(x)_q ** q`` when ``k / N -> kappa`` for iid draws;
``H(delta) = inf_rho G_2(rho * delta) / (1 - rho)`` is the best asymptotic
oracle error at undersampling ``delta``; ``delta0`` is where ``H`` drops
below the least-squares error ``1 - delta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import DistributionModel
from .errors import DomainError, UnsupportedError
from .rng import child_seed

__all__ = [
    "GPoint",
    "GCurve",
    "HValue",
    "Delta0Result",
    "KTermError",
    "CompressibilityReport",
    "g_fun",
    "g_point",
    "g_curve",
    "g_values",
    "g_fun_laplace_closed",
    "h_fun",
    "h_values",
    "critical_undersampling",
    "fourth_moment_criterion",
    "empirical_relative_kterm_error",
    "convergence_check",
    "moment_verdict",
    "compressibility_report",
]

RHO_GRID_SIZE = 256
RHO_MIN, RHO_MAX = 1e-4, 1.0 - 1e-4
DELTA_GRID = np.linspace(0.001, 0.999, 200)
DELTA_TOL = 1e-4
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class GPoint:
    kappa: float
    value: float
    method: str  # closed_form | quadrature | unbounded_moment


@dataclass(frozen=True)
class GCurve:
    dist: DistributionModel
    q: float
    points: tuple[GPoint, ...]

    @property
    def kappas(self):
        return np.array([p.kappa for p in self.points])

    @property
    def values(self):
        return np.array([p.value for p in self.points])


@dataclass(frozen=True)
class HValue:
    delta: float
    value: float
    rho_star: float | None
    degenerate: bool = False


@dataclass(frozen=True)
class Delta0Result:
    delta0: float | None
    marker: str | None = None  # always_compressible | below_grid | above_grid
    crossings: tuple[float, ...] = ()


@dataclass(frozen=True)
class KTermError:
    k: int
    q: float
    sigma_k: float
    relative: float


@dataclass(frozen=True)
class CompressibilityReport:
    dist: DistributionModel
    h_samples: tuple[HValue, ...]
    delta0: Delta0Result
    moment_verdict: str
    second_moment_finite: bool
    fourth_moment_finite: bool
    extras: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# G functional


def g_fun_laplace_closed(q, kappa):
    """Closed forms of ``G_1`` and ``G_2`` for the Laplace density.

    ``G_1 = 1 - k (1 + L)`` and ``G_2 = 1 - k (1 + L + L**2 / 2)`` with
    ``L = ln(1 / k)``.  Accepts scalars or arrays; ``kappa = 0`` gives 1.
    """
    if q not in (1, 2):
        raise UnsupportedError(f"no Laplace closed form for q={q}; use g_fun")
    k = np.asarray(kappa, dtype=float)
    if np.any((k < 0) | (k > 1)):
        raise DomainError("kappa must lie in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        L = -np.log(k)
        poly = 1.0 + L if q == 1 else 1.0 + L + 0.5 * L * L
        out = np.where(k > 0, 1.0 - k * poly, 1.0)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def g_values(dist: DistributionModel, q, kappas):
    """Vectorized ``G_q`` through closed-form partial moments.

    Infinite moments give zeros for ``kappa > 0``.
    """
    k = np.atleast_1d(np.asarray(kappas, dtype=float))
    if np.any((k < 0) | (k > 1)):
        raise DomainError("kappa must lie in [0, 1]")
    out = np.zeros_like(k)
    if not dist.moment_is_finite(q):
        if np.any(k == 0):
            raise DomainError(f"G_{q} at kappa=0 is undefined: E|X|^{q} is infinite")
        return out
    if dist.family.value == "laplace" and q in (1, 2):
        return np.asarray(g_fun_laplace_closed(q, k), dtype=float).reshape(k.shape)
    out[k == 0] = 1.0
    inner = (k > 0) & (k < 1)
    if inner.any():
        t = np.atleast_1d(dist.folded_isf(k[inner]))
        lo, hi = dist.moment_fractions(q, t)
        lo, hi = np.atleast_1d(lo), np.atleast_1d(hi)
        out[inner] = np.where(lo < 0.5, lo, 1.0 - hi)
    return np.clip(out, 0.0, 1.0)


def _g_quadrature(dist, q, kappa):
    key = ("quad_total", q)
    if key not in dist._cache:
        dist._cache[key] = dist.quad_partial_moment(q, math.inf)
    total = dist._cache[key]
    t = float(dist.folded_isf(kappa))
    if kappa < 0.5:
        # integrate the smaller piece for precision
        upper = total - dist.quad_partial_moment(q, t)
        tail = dist.quad_partial_moment(q, math.inf, lower=t) if upper / total < 1e-3 else upper
        return 1.0 - tail / total
    return dist.quad_partial_moment(q, t) / total


def g_point(dist: DistributionModel, q, kappa, method="auto") -> GPoint:
    """``G_q(kappa)`` with the route used to compute it.

    ``method`` is ``"quadrature"`` (adaptive quadrature of the folded
    density), ``"closed_form"`` (incomplete gamma/beta partial moments, or
    the Laplace formulas), or ``"auto"`` (closed form).
    """
    kappa = float(kappa)
    if not q > 0:
        raise DomainError("q must be positive")
    if not 0.0 <= kappa <= 1.0:
        raise DomainError("kappa must lie in [0, 1]")
    if not dist.moment_is_finite(q):
        if kappa == 0.0:
            raise DomainError(f"G_{q} at kappa=0 is undefined: E|X|^{q} is infinite")
        return GPoint(kappa, 0.0, "unbounded_moment")
    if kappa == 0.0:
        return GPoint(kappa, 1.0, "closed_form")
    if kappa == 1.0:
        return GPoint(kappa, 0.0, "closed_form")
    if method == "quadrature":
        return GPoint(kappa, float(np.clip(_g_quadrature(dist, q, kappa), 0.0, 1.0)), "quadrature")
    if method not in ("auto", "closed_form"):
        raise DomainError(f"unknown method {method!r}")
    return GPoint(kappa, float(g_values(dist, q, [kappa])[0]), "closed_form")


def g_fun(dist: DistributionModel, q, kappa, method="auto") -> float:
    """Asymptotic relative best k-term error ``G_q[p](kappa)``."""
    return g_point(dist, q, kappa, method).value


def g_curve(dist: DistributionModel, q, kappas, method="auto") -> GCurve:
    kappas = [float(k) for k in kappas]
    if not kappas:
        raise DomainError("empty kappa grid")
    return GCurve(dist, q, tuple(g_point(dist, q, k, method) for k in kappas))


# ---------------------------------------------------------------------------
# H functional


def _h_objective(dist, deltas, rhos):
    return g_values(dist, 2, deltas * rhos).reshape(rhos.shape) / (1.0 - rhos)


def h_values(dist: DistributionModel, deltas) -> list[HValue]:
    """``H(delta)`` for many deltas at once.

    A 256-point log grid over ``rho`` locates the best cell for each delta,
    then golden-section search refines within the neighbouring cells.  The
    returned value never exceeds the best grid value.
    """
    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    if np.any((deltas <= 0) | (deltas >= 1)):
        raise DomainError("delta must lie in (0, 1)")
    if not dist.moment_is_finite(2):
        return [HValue(float(d), 0.0, None, True) for d in deltas]

    grid = np.geomspace(RHO_MIN, RHO_MAX, RHO_GRID_SIZE)
    vals = _h_objective(dist, deltas[:, None], np.broadcast_to(grid, (deltas.size, grid.size)).copy())
    best = np.argmin(vals, axis=1)
    best_val = vals[np.arange(deltas.size), best]
    a = grid[np.maximum(best - 1, 0)]
    b = grid[np.minimum(best + 1, grid.size - 1)]

    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = _h_objective(dist, deltas, c)
    fd = _h_objective(dist, deltas, d)
    for _ in range(80):
        # minimum lies in [a, d] when f(c) <= f(d), else in [c, b]
        left = fc <= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new = np.where(left, b - _GOLDEN * (b - a), a + _GOLDEN * (b - a))
        f_new = _h_objective(dist, deltas, new)
        c, d, fc, fd = (
            np.where(left, new, d),
            np.where(left, c, new),
            np.where(left, f_new, fd),
            np.where(left, fc, f_new),
        )
        if np.all(b - a <= 1e-10 * b):
            break
    rho_g = 0.5 * (a + b)
    val_g = _h_objective(dist, deltas, rho_g)
    use_g = val_g < best_val
    rho = np.where(use_g, rho_g, grid[best])
    val = np.where(use_g, val_g, best_val)
    return [HValue(float(dl), float(v), float(r)) for dl, v, r in zip(deltas, val, rho)]


def h_fun(dist: DistributionModel, delta) -> HValue:
    """Best oracle tradeoff ``H[p](delta)`` and its minimizing ``rho``."""
    return h_values(dist, [delta])[0]


def critical_undersampling(dist: DistributionModel) -> Delta0Result:
    """Critical undersampling ratio ``delta0``.

    Scans ``H(delta) - (1 - delta)`` on 200 points of ``(0.001, 0.999)``; the
    first change from nonnegative to negative is bisected to 1e-4.  Every
    sign change found is listed in ``crossings``.  ``delta0`` is None when
    the scan starts negative (``below_grid``), never turns negative
    (``above_grid``), or the variance is infinite (``always_compressible``).
    """
    if not dist.moment_is_finite(2):
        return Delta0Result(None, "always_compressible")
    hv = h_values(dist, DELTA_GRID)
    f = np.array([h.value for h in hv]) - (1.0 - DELTA_GRID)
    neg = f < 0
    changes = np.flatnonzero(neg[1:] != neg[:-1])
    crossings = tuple(float(0.5 * (DELTA_GRID[i] + DELTA_GRID[i + 1])) for i in changes)
    if neg[0]:
        return Delta0Result(None, "below_grid", crossings)
    down = [i for i in changes if not neg[i] and neg[i + 1]]
    if not down:
        return Delta0Result(None, "above_grid", crossings)
    lo, hi = DELTA_GRID[down[0]], DELTA_GRID[down[0] + 1]
    while hi - lo > DELTA_TOL:
        mid = 0.5 * (lo + hi)
        if h_fun(dist, mid).value - (1.0 - mid) < 0:
            hi = mid
        else:
            lo = mid
    return Delta0Result(float(0.5 * (lo + hi)), None, crossings)


# ---------------------------------------------------------------------------
# moment rules


@dataclass(frozen=True)
class FourthMomentRow:
    kappa: float
    g2: float
    bound: float
    sign: int  # +1: G_2 above (1 - sqrt k)^2, 0: equal within tol, -1: below


def fourth_moment_criterion(dist: DistributionModel, kappas, tol=1e-9) -> list[FourthMomentRow]:
    """Compare ``G_2(kappa)`` with ``(1 - sqrt(kappa))**2`` on a grid."""
    if not dist.moment_is_finite(2):
        raise DomainError("fourth moment criterion needs a finite second moment")
    k = np.asarray(kappas, dtype=float)
    g = g_values(dist, 2, k)
    bound = (1.0 - np.sqrt(k)) ** 2
    diff = g - bound
    sign = np.where(np.abs(diff) <= tol, 0, np.sign(diff)).astype(int)
    return [FourthMomentRow(float(a), float(b), float(c), int(s)) for a, b, c, s in zip(k, g, bound, sign)]


def moment_verdict(dist: DistributionModel) -> tuple[str, bool, bool]:
    """Table-style verdict from the second and fourth moments."""
    second = dist.moment_is_finite(2)
    fourth = dist.moment_is_finite(4)
    if not second:
        verdict = "compressible_infinite_variance"
    elif not fourth:
        verdict = "intermediate"
    else:
        verdict = "incompressible_finite_fourth"
    return verdict, second, fourth


def compressibility_report(dist: DistributionModel, deltas=None) -> CompressibilityReport:
    if deltas is None:
        deltas = np.round(np.arange(0.05, 0.951, 0.05), 10)
    verdict, second, fourth = moment_verdict(dist)
    return CompressibilityReport(
        dist=dist,
        h_samples=tuple(h_values(dist, deltas)),
        delta0=critical_undersampling(dist),
        moment_verdict=verdict,
        second_moment_finite=second,
        fourth_moment_finite=fourth,
    )


# ---------------------------------------------------------------------------
# empirical errors


def empirical_relative_kterm_error(x, k, q=2.0) -> KTermError:
    """Relative best ``k``-term approximation error of a vector in ``l_q``."""
    a = np.abs(np.asarray(x, dtype=float).ravel())
    n = a.size
    k = int(k)
    if k < 0 or k > n:
        raise DomainError(f"k={k} outside [0, {n}]")
    if not np.any(a > 0):
        raise DomainError("relative error of the zero vector is undefined")
    p = np.sort(a / a.max()) ** q  # scaled so tiny entries do not underflow
    total = p.sum()
    tail = p[: n - k].sum()
    rel = float((tail / total) ** (1.0 / q))
    return KTermError(k, float(q), float(a.max() * tail ** (1.0 / q)), rel)


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    k: int
    g: float
    mean_value: float
    mean_gap: float
    median_gap: float


def convergence_check(dist, q, kappa, n_list, seeds) -> list[ConvergenceRow]:
    """Gap between ``sigma_bar_k(x_N)_q ** q`` and ``G_q(kappa)`` as N grows."""
    if not 0 < kappa < 1:
        raise DomainError("kappa must lie in (0, 1)")
    g = g_fun(dist, q, kappa)
    rows = []
    for n in n_list:
        k = int(math.floor(kappa * n))
        vals = np.array([
            empirical_relative_kterm_error(dist.sample(n, child_seed(s, n)), k, q).relative ** q
            for s in seeds
        ])
        gaps = np.abs(vals - g)
        rows.append(ConvergenceRow(int(n), k, g, float(vals.mean()), float(gaps.mean()), float(np.median(gaps))))
    return rows
