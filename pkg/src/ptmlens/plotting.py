"""Figures for the report paths of the command line tool.

Every function writes one image file and returns its path. The Agg backend is
selected so figures render without a display.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

GOLDEN = (np.sqrt(5) - 1.0) / 2.0
FIG_WIDTH = 6.0

params = {
    "axes.labelsize": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "lines.linewidth": 1.2,
    "figure.dpi": 120,
    "savefig.bbox": "tight",
}


def newfig(width=FIG_WIDTH, ratio=GOLDEN, **kw):
    with plt.rc_context(params):
        fig, ax = plt.subplots(figsize=(width, width * ratio), **kw)
    return fig, ax


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(params):
        fig.savefig(path)
    plt.close(fig)
    return path


def plot_cut(cuts, path, title="", floor_db=-40.0, markers=None) -> Path:
    """Normalized elevation cuts in dB.

    cuts: iterable of (label, theta_deg, magnitude) tuples; each is normalized
    to the common maximum so relative levels stay comparable.
    """
    cuts = list(cuts)
    ref = max(np.max(m) for _, _, m in cuts)
    fig, ax = newfig()
    for label, th, mag in cuts:
        with np.errstate(divide="ignore"):
            db = np.maximum(20 * np.log10(np.asarray(mag) / ref), floor_db)
        ax.plot(th, db, label=label)
    for m in markers or []:
        ax.axvline(m, color="k", lw=0.6, ls=":")
    ax.set_xlabel(r"elevation $\theta$ (deg)")
    ax.set_ylabel("|E| (dB, normalized)")
    ax.set_ylim(floor_db, 1)
    ax.set_xlim(min(np.min(t) for _, t, _ in cuts), max(np.max(t) for _, t, _ in cuts))
    if title:
        ax.set_title(title)
    if len(cuts) > 1:
        ax.legend(ncol=2)
    return _save(fig, path)


def plot_sphere(rp, path, title="") -> Path:
    nt, nphi = rp.grid.shape
    db = rp.mag_db().reshape(nt, nphi)
    fig, ax = newfig()
    im = ax.imshow(
        np.maximum(db, -40.0),
        extent=(0, 360, 180, 0),
        aspect="auto",
        cmap="viridis",
    )
    fig.colorbar(im, ax=ax, label="dB")
    ax.set_xlabel(r"$\varphi$ (deg)")
    ax.set_ylabel(r"$\theta$ (deg)")
    ax.grid(False)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_surface(sm, path, title="") -> Path:
    fig, ax = newfig(ratio=0.85)
    im = ax.pcolormesh(sm.x * 1e3, sm.y * 1e3, sm.magnitude, shading="auto", cmap="inferno")
    fig.colorbar(im, ax=ax, label="|E| normalized" if sm.normalized else "|E|")
    ax.set_aspect("equal")
    ax.set_xlabel("x (mm)")
    ax.set_ylabel("y (mm)")
    ax.grid(False)
    ax.set_title(title or f"z = {sm.z * 1e3:.0f} mm")
    return _save(fig, path)


def plot_code_pattern(pattern, path, title="") -> Path:
    fig, ax = newfig(width=4.0, ratio=1.0)
    n = 2**pattern.bits
    ax.imshow(pattern.states, cmap=plt.get_cmap("viridis", n), vmin=-0.5, vmax=n - 0.5)
    for (r, c), s in np.ndenumerate(pattern.states):
        ax.text(c, r, format(int(s), f"0{pattern.bits}b"), ha="center", va="center", color="w", fontsize=8)
    ax.set_xticks(range(pattern.shape[1]))
    ax.set_yticks(range(pattern.shape[0]))
    ax.set_xlabel("column")
    ax.set_ylabel("row")
    ax.grid(False)
    ax.set_title(title or pattern.label)
    return _save(fig, path)


def plot_tracking(results, path, title="") -> Path:
    """Received power per step for one or more tracking runs."""
    fig, ax = newfig()
    for res in results:
        rx = [s.receiver_deg for s in res.steps]
        ax.plot(rx, res.powers, marker="o", ms=3, label=res.mode)
    ax.set_xlabel("receiver elevation (deg)")
    ax.set_ylabel("received power (dBm)")
    ax.legend()
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_sweep(freqs_hz, series, path, ylabel="main lobe (deg)", title="") -> Path:
    fig, ax = newfig()
    for label, ys in series.items():
        ax.plot(np.asarray(freqs_hz) / 1e9, ys, marker=".", label=label)
    ax.set_xlabel("frequency (GHz)")
    ax.set_ylabel(ylabel)
    ax.legend(ncol=2)
    if title:
        ax.set_title(title)
    return _save(fig, path)
