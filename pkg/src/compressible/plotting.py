"""SVG figures.  CSV output is the record; these are for looking at."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib as mpl  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

STYLE = {
    "font.size": 8,
    "axes.linewidth": 0.6,
    "lines.linewidth": 1.0,
    "legend.frameon": False,
    "svg.fonttype": "none",
    "svg.hashsalt": "compressible",  # stable ids, so equal inputs give equal files
}

DB_LEVELS = (3, 10, 20)


def _figure(size=(4.0, 3.0)):
    fig = Figure(figsize=size)
    return fig, fig.add_subplot(1, 1, 1)


def _save(fig, path):
    fig.tight_layout()
    with mpl.rc_context(STYLE):
        fig.savefig(path, format="svg", metadata={"Date": None})


def _rows(table, col):
    i = table.columns.index(col)
    return np.array([np.nan if r[i] is None else float(r[i]) for r in table.rows])


def fig2(table, path, title=None):
    """Relative error curves vs undersampling with dB reference lines."""
    with mpl.rc_context(STYLE):
        fig, ax = _figure()
        d = _rows(table, "delta")
        ax.plot(d, _rows(table, "ls_analytic"), "k-", label="least squares, 1-δ")
        ax.plot(d, _rows(table, "oracle_analytic"), "b-", label="oracle, H(δ)")
        ax.plot(d, _rows(table, "oracle_mc"), "bo", ms=3, label="oracle, simulated")
        ax.plot(d, _rows(table, "l1_mc"), "rs-", ms=3, lw=0.8, label="l1, simulated")
        for db in DB_LEVELS:
            ax.axhline(10 ** (-db / 10), color="0.6", ls=":", lw=0.6)
            ax.text(0.005, 10 ** (-db / 10) * 1.08, f"{db} dB", color="0.4", fontsize=6)
        ax.set_yscale("log")
        ax.set_xlim(0, 1)
        ax.set_xlabel("undersampling δ = m/N")
        ax.set_ylabel("relative squared error")
        if title:
            ax.set_title(title)
        ax.legend(loc="lower left")
        _save(fig, path)


def report(table, path, dist, delta0, verdict):
    """H(delta) against the least-squares line, with delta0 marked."""
    with mpl.rc_context(STYLE):
        fig, ax = _figure()
        d = _rows(table, "delta")
        ax.plot(d, _rows(table, "ls_error"), "k-", label="least squares, 1-δ")
        ax.plot(d, _rows(table, "H"), "bo-", ms=3, label="oracle limit, H(δ)")
        if delta0 is not None:
            ax.axvline(delta0, color="r", ls="--", lw=0.8, label=f"δ₀ = {delta0:.3f}")
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1.02)
        ax.set_xlabel("undersampling δ = m/N")
        ax.set_ylabel("relative squared error")
        ax.set_title(f"{dist}: {verdict}")
        ax.legend(loc="upper right")
        _save(fig, path)


def fig4(table, path):
    with mpl.rc_context(STYLE):
        fig, ax = _figure()
        k = _rows(table, "kappa")
        ax.plot(k, _rows(table, "G1"), "k-", label="G₁(κ)")
        ax.step(k, _rows(table, "step_bound"), "r--", where="post", label="1/2 on [0, κ₀]")
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1.02)
        ax.set_xlabel("κ")
        ax.set_ylabel("relative l1 best k-term error")
        ax.legend()
        _save(fig, path)


def fig5(table, path):
    with mpl.rc_context(STYLE):
        fig, ax = _figure()
        ax.plot(_rows(table, "tau"), _rows(table, "delta0"), "ko-", ms=3)
        ax.set_xlabel("shape τ")
        ax.set_ylabel("critical undersampling δ₀")
        ax.set_ylim(0, 1)
        _save(fig, path)


def curve(table, path, x, ys, xlabel, ylabel, logx=False, logy=False):
    """Generic line plot of columns ``ys`` against column ``x``."""
    with mpl.rc_context(STYLE):
        fig, ax = _figure()
        xv = _rows(table, x)
        for y in ys:
            ax.plot(xv, _rows(table, y), label=y)
        if logx:
            ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if len(ys) > 1:
            ax.legend()
        _save(fig, path)
