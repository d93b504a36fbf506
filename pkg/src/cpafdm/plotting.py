"""Matplotlib renderers for the CLI report paths (Agg backend, files only)."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "figure.autolayout": True,
}


def _save(fig, path: Path) -> Path:
    path = Path(path)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_effective_channels(grids: Mapping[str, np.ndarray], path: Path) -> Path:
    """Side-by-side normalized magnitude images of the effective channels."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(grids), figsize=(3.2 * len(grids), 3.2))
        axes = np.atleast_1d(axes)
        for ax, (name, grid) in zip(axes, grids.items()):
            mag = np.abs(grid)
            ax.imshow(mag / max(mag.max(), 1e-300), cmap="viridis", origin="upper")
            ax.set_title(name)
            ax.set_xlabel("column")
            ax.set_ylabel("row")
        return _save(fig, path)


def plot_guess_distribution(N: int, pmf: Sequence[float], cdf: Sequence[float], path: Path) -> Path:
    l = np.arange(len(pmf))
    with plt.rc_context(STYLE):
        fig, (a, b) = plt.subplots(1, 2, figsize=(7, 2.8))
        a.semilogy(l, np.maximum(pmf, 1e-300), "o-", ms=3)
        a.set_xlabel("correct positions l")
        a.set_ylabel("P_l")
        a.set_title(f"PMF, N = {N}")
        b.plot(N - l, cdf, "s-", ms=3)
        b.invert_xaxis()
        b.set_xlabel("incorrect positions N - l (at least)")
        b.set_ylabel("CDF")
        b.set_title(f"CDF, N = {N}")
        return _save(fig, path)


def plot_ber(curves: Mapping[str, tuple[Sequence[float], Sequence[float]]], path: Path,
             title: str = "") -> Path:
    """BER versus SNR for each labelled curve; zero BER points are dropped."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.2, 3.2))
        for label, (snr, ber) in curves.items():
            snr, ber = np.asarray(snr), np.asarray(ber)
            keep = ber > 0
            ax.semilogy(snr[keep], ber[keep], "o-", ms=3, label=label)
        ax.set_xlabel("SNR [dB]")
        ax.set_ylabel("BER")
        ax.set_ylim(top=1)
        ax.grid(True, which="both", alpha=0.3)
        if title:
            ax.set_title(title)
        ax.legend()
        return _save(fig, path)
