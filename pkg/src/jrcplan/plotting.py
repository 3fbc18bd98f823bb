"""Figure rendering for sweep and reliability outputs.

Renders the same rows the CSV writers emit, to PNG files next to them.
Uses the non-interactive backend so batch runs never need a display.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_STYLE = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "grid.linestyle": ":",
    "lines.linewidth": 1.4,
    "font.size": 10,
    "legend.fontsize": 9,
}


def save_sweep_figure(path: str, variable: str, ylabel: str,
                      series: dict[str, dict[str, list[float]]],
                      log_x: bool = False) -> None:
    """One curve per engine; Monte Carlo rows carry confidence bands.

    series maps an engine name to {"x": [...], "y": [...]} plus optional
    "lo"/"hi" confidence bounds.
    """
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for engine, data in series.items():
            x, y = data["x"], data["y"]
            if "lo" in data and "hi" in data:
                ax.errorbar(x, y,
                            yerr=[[yi - lo for yi, lo in zip(y, data["lo"])],
                                  [hi - yi for yi, hi in zip(y, data["hi"])]],
                            fmt="o", ms=3, capsize=2, label=engine)
            else:
                ax.plot(x, y, label=engine)
        if log_x:
            ax.set_xscale("log")
        ax.set_xlabel(variable)
        ax.set_ylabel(ylabel)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def save_metadist_figure(path: str,
                         curves: list[tuple[str, list[float], list[float]]]) -> None:
    """Reliability curves F(z); one line per (label, z, F) triple."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for label, z, f in curves:
            ax.plot(z, f, label=label)
        ax.set_xlabel("reliability threshold z")
        ax.set_ylabel("fraction of configurations with coverage >= z")
        ax.set_ylim(-0.02, 1.02)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def save_optimizer_figure(path: str, xlabel: str, x: list[float],
                          y: list[float], closed_form: float,
                          numeric: float, log_x: bool = False) -> None:
    """Objective curve with the closed-form and numeric maximizers marked."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.plot(x, y, label="objective")
        ax.axvline(closed_form, color="C1", ls="--", label="closed form")
        ax.axvline(numeric, color="C2", ls=":", label="numeric argmax")
        if log_x:
            ax.set_xscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel("throughput (units of D)")
        ax.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
