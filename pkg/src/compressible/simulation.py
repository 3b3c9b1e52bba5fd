"""Gaussian compressed sensing: encoder, predictions and the Monte Carlo harness."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from typing import Iterator

import numpy as np

from .decoders import decode_l1, decode_ls, decode_oracle, decode_trivial, relative_sq_error
from .distributions import DistributionModel, parse_distribution
from .errors import CompressibleError, DomainError
from .metrics import g_fun, h_fun
from .rng import child_seed, make_rng

DECODERS = ("trivial", "ls", "oracle", "l1")
K_RULES = ("fixed_rho", "best_rho", "explicit")


@dataclass(frozen=True, eq=False)
class EncoderInstance:
    m: int
    n: int
    entries: np.ndarray
    seed: int

    @property
    def delta(self) -> float:
        return self.m / self.n


def gaussian_encoder(m, n, seed) -> EncoderInstance:
    """``m x n`` matrix of iid N(0, 1/m) entries from a seeded PCG64 stream."""
    m, n = int(m), int(n)
    if not 1 <= m < n:
        raise DomainError(f"need 1 <= m < N, got m={m}, N={n}")
    phi = make_rng(seed).standard_normal((m, n)) / math.sqrt(m)
    return EncoderInstance(m, n, phi, int(seed))


# -- predictions ------------------------------------------------------------


def ls_prediction(delta):
    """Expected relative squared LS error, ``1 - m/N``."""
    return 1.0 - np.asarray(delta, dtype=float)


def oracle_error_prediction(k, m, rel_tail_energy) -> float:
    """Expected oracle error ``tail / (1 - k/(m-1))`` for a support of size k."""
    if k < 0 or k >= m - 1:
        raise DomainError(f"oracle prediction needs 0 <= k < m-1 (k={k}, m={m})")
    return float(rel_tail_energy) / (1.0 - k / (m - 1.0))


def oracle_asymptotic(dist: DistributionModel, rho, delta) -> float:
    """Limit of the oracle error for k/m -> rho and m/N -> delta: ``G_2(rho delta)/(1-rho)``."""
    if not 0.0 <= rho < 1.0:
        raise DomainError(f"rho must lie in [0, 1), got {rho}")
    return g_fun(dist, 2, rho * delta) / (1.0 - rho)


def c_l(eps):
    eps = np.asarray(eps, dtype=float)
    return -np.log1p(-eps) - eps


def c_u(eps):
    eps = np.asarray(eps, dtype=float)
    return eps / (1.0 - eps) + np.log1p(-eps)


@dataclass(frozen=True)
class ConcentrationBound:
    kind: str
    eps: float
    lo: float
    hi: float
    failure_prob: float
    c_l: float
    c_u: float

    def contains(self, value) -> bool:
        return self.lo <= value <= self.hi


def concentration_bounds(kind, dims, eps) -> ConcentrationBound:
    """Concentration interval with its failure probability.

    ``kind="ls"`` takes ``dims=(N, m)`` and bounds the relative squared LS
    error.  ``kind="oracle"`` takes ``dims=(m, k)`` and bounds the oracle
    error divided by the tail energy ``||x_tail||^2``.
    """
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    cl, cu = float(c_l(eps)), float(c_u(eps))
    if kind == "ls":
        n, m = dims
        base = 1.0 - m / n
        lo, hi = (1.0 - eps) * base, base / (1.0 - eps)
        fail = 2.0 * math.exp(-(n - m) * eps**2 / 4.0) + 2.0 * math.exp(-n * eps**2 / 4.0)
    elif kind == "oracle":
        m, k = dims
        if not 0 <= k < m:
            raise DomainError(f"need 0 <= k < m, got k={k}, m={m}")
        d = m - k + 1.0
        lo = 1.0 + k * (1.0 - eps) ** 3 / d
        hi = 1.0 + k * (1.0 - eps) ** -3 / d
        fail = 8.0 * math.exp(-min(k, m - k + 1) * cl / 2.0)
    else:
        raise DomainError(f"unknown bound kind {kind!r}")
    return ConcentrationBound(kind, eps, lo, hi, fail, cl, cu)


# -- experiments --------------------------------------------------------------


@dataclass
class ExperimentConfig:
    dist: str = "laplace"
    n: int = 256
    deltas: tuple = (0.5,)
    decoders: tuple = ("ls",)
    k_rule: str = "best_rho"
    rho: float | None = None
    k: int | None = None
    trials: int = 100
    master_seed: int = 0
    tol: float = 1e-7
    max_iters: int = 50_000

    def __post_init__(self):
        if isinstance(self.dist, DistributionModel):
            self.dist = self.dist.spec
        parse_distribution(self.dist)
        self.deltas = tuple(float(d) for d in np.atleast_1d(self.deltas))
        self.decoders = tuple(self.decoders)
        bad = [d for d in self.decoders if d not in DECODERS]
        if bad:
            raise DomainError(f"unknown decoder(s) {bad}; choose from {DECODERS}")
        if self.k_rule not in K_RULES:
            raise DomainError(f"unknown k rule {self.k_rule!r}; choose from {K_RULES}")
        if "oracle" in self.decoders:
            if self.k_rule == "fixed_rho" and (self.rho is None or not 0 <= self.rho < 1):
                raise DomainError("k_rule fixed_rho needs rho in [0, 1)")
            if self.k_rule == "explicit" and (self.k is None or self.k < 0):
                raise DomainError("k_rule explicit needs k >= 0")
        if self.n < 2 or self.trials < 0:
            raise DomainError("need N >= 2 and trials >= 0")
        for d in self.deltas:
            m = _m_for(d, self.n)
            if not 1 <= m < self.n:
                raise DomainError(f"delta={d} gives m={m}, outside [1, N)")

    @property
    def distribution(self) -> DistributionModel:
        return parse_distribution(self.dist)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrialRecord:
    decoder: str
    delta: float
    rho: float | None
    k: int | None
    trial: int
    rel_sq_error: float
    iters: int | None = None
    residual: float | None = None
    converged: bool | None = None
    master_seed: int = 0
    k_rule: str | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


CSV_FIELDS = ("decoder", "delta", "rho", "k", "trial", "rel_sq_error", "iters", "residual",
              "converged", "error")


def _m_for(delta, n) -> int:
    return int(round(delta * n))


def _k_for(config: ExperimentConfig, m, rho_star):
    if config.k_rule == "explicit":
        return int(config.k)
    rho = config.rho if config.k_rule == "fixed_rho" else rho_star
    return int(round((rho or 0.0) * m))


def iter_experiment(config: ExperimentConfig) -> Iterator[TrialRecord]:
    """Yield one record per (trial, delta, decoder), in that nesting order.

    The signal of trial ``t`` comes from the stream ``(master, t, "x")`` and
    is shared across the delta grid; the encoder for delta index ``j`` comes
    from ``(master, t, "phi", j)``.  Records never depend on how many other
    trials are run.
    """
    dist = config.distribution
    rho_star = {}
    if "oracle" in config.decoders and config.k_rule == "best_rho":
        for d in config.deltas:
            rho_star[d] = h_fun(dist, d).rho_star
    for t in range(config.trials):
        x = dist.sample(config.n, child_seed(config.master_seed, t, "x"))
        for j, delta in enumerate(config.deltas):
            m = _m_for(delta, config.n)
            phi = gaussian_encoder(m, config.n, child_seed(config.master_seed, t, "phi", j))
            y = phi.entries @ x
            for name in config.decoders:
                yield _run_one(config, name, phi, x, y, delta, t, rho_star.get(delta))


def _run_one(config, name, phi, x, y, delta, t, rho_star) -> TrialRecord:
    rec = TrialRecord(name, delta, None, None, t, float("nan"), master_seed=config.master_seed)
    m = phi.m
    try:
        if name == "trivial":
            x_hat = decode_trivial(y, phi.n)
        elif name == "ls":
            x_hat = decode_ls(phi, y)
        elif name == "oracle":
            k = _k_for(config, m, rho_star)
            rec.k, rec.rho, rec.k_rule = k, k / m, config.k_rule
            support = np.argsort(-np.abs(x), kind="stable")[:k]
            x_hat = decode_oracle(phi, y, support)
        else:
            x_hat, diag = decode_l1(phi, y, tol=config.tol, max_iters=config.max_iters)
            rec.iters, rec.residual, rec.converged = diag.iterations, diag.residual, diag.converged
    except (CompressibleError, np.linalg.LinAlgError) as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
        return rec
    if not np.any(x):
        rec.error = "zero signal"
        return rec
    rec.rel_sq_error = relative_sq_error(x_hat, x)
    return rec


def run_experiment(config: ExperimentConfig) -> list[TrialRecord]:
    return list(iter_experiment(config))


@dataclass
class SummaryRow:
    decoder: str
    delta: float
    count: int
    mean: float
    median: float
    std: float
    failures: int
    nonconverged: int
    mean_k: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class _Acc:
    values: list = field(default_factory=list)
    ks: list = field(default_factory=list)
    failures: int = 0
    nonconverged: int = 0


def summarize(records) -> list[SummaryRow]:
    """Mean/median error per (decoder, delta); failed trials are counted, not averaged."""
    acc = defaultdict(_Acc)
    for r in records:
        a = acc[(r.decoder, r.delta)]
        if r.error is not None or not math.isfinite(r.rel_sq_error):
            a.failures += 1
            continue
        a.values.append(r.rel_sq_error)
        if r.k is not None:
            a.ks.append(r.k)
        if r.converged is False:
            a.nonconverged += 1
    rows = []
    for (dec, delta), a in acc.items():
        v = np.asarray(a.values)
        rows.append(SummaryRow(
            dec, delta, v.size,
            float(v.mean()) if v.size else float("nan"),
            float(np.median(v)) if v.size else float("nan"),
            float(v.std(ddof=1)) if v.size > 1 else float("nan"),
            a.failures, a.nonconverged,
            float(np.mean(a.ks)) if a.ks else None,
        ))
    order = {d: i for i, d in enumerate(DECODERS)}
    rows.sort(key=lambda r: (order[r.decoder], r.delta))
    return rows


def crossing_point(deltas, curve_a, curve_b):
    """First delta where ``curve_a - curve_b`` changes sign from + to -, by linear interpolation."""
    d = np.asarray(deltas, dtype=float)
    diff = np.asarray(curve_a, dtype=float) - np.asarray(curve_b, dtype=float)
    for i in range(len(d) - 1):
        if diff[i] > 0 >= diff[i + 1]:
            if diff[i + 1] == 0:
                return float(d[i + 1])
            return float(d[i] + (d[i + 1] - d[i]) * diff[i] / (diff[i] - diff[i + 1]))
    return None
