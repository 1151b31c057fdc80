"""Figure rendering for the command-line report path.

Everything draws through the Agg backend so figures render headless, and
every function takes explicit data plus an output path: no global state,
no implicit show(). Styling stays deliberately plain (default color
cycle, grid on, tight layout) so the files diff well across runs.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .ancilla import CoefficientProfile

FIGSIZE = (6.4, 3.95)
DPI = 150


def _finish(fig, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def save_scan_figure(
    rows: Sequence[dict],
    path: str,
    *,
    title: str = "teleportation error vs register size",
) -> str:
    """Log-log error against n, one line per profile label, with the n^-2
    guide slope anchored at the first point of the first series."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    by_label: dict[str, list[tuple[int, float]]] = {}
    for row in rows:
        by_label.setdefault(str(row["profile"]), []).append(
            (int(row["n"]), float(row["exact_error"]))
        )
    for label, pts in by_label.items():
        pts.sort()
        ax.loglog([p[0] for p in pts], [p[1] for p in pts], marker="o", label=label)
    first = min(by_label.values(), key=lambda pts: pts[0][0])[0]
    if first[1] > 0:
        ns = sorted({n for pts in by_label.values() for n, _ in pts})
        guide = [first[1] * (first[0] / n) ** 2 for n in ns]
        ax.loglog(ns, guide, linestyle="--", color="gray", label="n^-2 slope")
    ax.set_xlabel("ancilla pairs n")
    ax.set_ylabel("average gate error")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    return _finish(fig, path)


def save_profile_figure(
    profiles: Sequence[CoefficientProfile],
    path: str,
    *,
    title: str = "ancilla coefficient profiles",
) -> str:
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for p in profiles:
        ax.plot(range(p.n + 1), p.as_array(), marker="o", label=p.label)
    ax.set_xlabel("coefficient index j")
    ax.set_ylabel("f(j)")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _finish(fig, path)


def save_teleport_figure(
    ks: Sequence[int],
    probabilities: Sequence[float],
    fidelities: Sequence[float],
    path: str,
    *,
    title: str = "teleportation branches",
) -> str:
    """Branch probability bars with per-branch fidelity on a twin axis."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.bar(ks, probabilities, color="tab:blue", alpha=0.7, label="probability")
    ax.set_xlabel("measured photon total k")
    ax.set_ylabel("branch probability")
    ax.set_title(title)
    ax2 = ax.twinx()
    ax2.plot(ks, fidelities, color="tab:red", marker="o", label="fidelity")
    ax2.set_ylabel("branch fidelity")
    ax2.set_ylim(min(0.0, min(fidelities)) - 0.02, 1.02)
    handles, labels = ax.get_legend_handles_labels()
    h2, l2 = ax2.get_legend_handles_labels()
    ax.legend(handles + h2, labels + l2, loc="lower center")
    ax.grid(True, alpha=0.3)
    return _finish(fig, path)


def save_purity_figure(
    labels: Sequence[str],
    purities: Sequence[float],
    path: str,
    *,
    title: str = "per-branch output purity",
) -> str:
    """Horizontal purity bars, one per joint branch label."""
    fig, ax = plt.subplots(figsize=(FIGSIZE[0], max(FIGSIZE[1], 0.3 * len(labels) + 1.2)))
    y = range(len(labels))
    ax.barh(y, purities, color="tab:green", alpha=0.8)
    ax.set_yticks(list(y))
    ax.set_yticklabels(labels, fontsize=7)
    ax.axvline(1.0, color="gray", linestyle="--", linewidth=1)
    ax.set_xlabel("tr(rho^2) of the output modes")
    ax.set_title(title)
    ax.set_xlim(0.0, 1.05)
    ax.invert_yaxis()
    ax.grid(True, axis="x", alpha=0.3)
    return _finish(fig, path)
