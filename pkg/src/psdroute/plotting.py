"""Static figures: skyline staircases and experiment summaries.

Everything renders through the Agg backend to files; nothing is shown.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .metrics import _vectors  # noqa: E402

STYLE = {"bsl": ("tab:blue", "o"), "apx": ("tab:orange", "s")}


def _save(fig, path):
    # no timestamp in vector output, so reruns give identical files
    meta = {"Date": None} if str(path).endswith((".svg", ".pdf")) else None
    fig.tight_layout()
    fig.savefig(path, metadata=meta)
    plt.close(fig)
    return path


def _staircase(points):
    """Boundary of the non-dominated region: from (0, sc1) right and down."""
    xs, ys = [0.0], [points[0][1]]
    for k, (x, y) in enumerate(points):
        xs += [x, x]
        ys += [ys[-1], min(ys[-1], y)]
        if k + 1 < len(points):
            continue
        xs.append(x)
        ys.append(0.0)
    return xs, ys


def plot_skylines(skylines: dict, path, title=None):
    """One staircase plus convex chain per labelled skyline.

    ``skylines`` maps a label (``bsl``/``apx``) to a LinearSkyline or a list of
    cost vectors. Axes are seconds and dollars.
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for label, ls in skylines.items():
        pts = [(cv.st / 1000, cv.sc / 100) for cv in _vectors(ls)]
        color, marker = STYLE.get(label, ("tab:gray", "^"))
        xs, ys = _staircase(pts)
        ax.plot(xs, ys, color=color, lw=0.8, ls=":", alpha=0.8)
        ax.fill_between(xs, ys, step=None, color=color, alpha=0.08)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], color=color, lw=1.8,
                marker=marker, label=f"{label} ({len(pts)} routes)")
    ax.set_xlabel("shopping time (s)")
    ax.set_ylabel("shopping cost ($)")
    ax.set_xlim(left=0)
    ax.set_ylim(bottom=0)
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_gap_distribution(opt_gaps, cov_gaps, path, title=None):
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    bins = [k / 20 for k in range(21)]
    ax.hist([opt_gaps, cov_gaps], bins=bins, label=["optimality gap", "coverage gap"],
            color=["tab:purple", "tab:green"])
    ax.set_xlabel("gap")
    ax.set_ylabel("queries")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_sweep(axis, values, summaries, path):
    """Mean gaps and mean runtimes across one swept setting.

    ``summaries`` holds one dict per value with keys ``opt_gap``, ``cov_gap``,
    ``bsl_ms`` and ``apx_ms`` (missing or None entries are skipped).
    """
    fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
    ticks = list(range(len(values)))
    labels = [str(v) for v in values]

    def series(key):
        pts = [(k, s.get(key)) for k, s in zip(ticks, summaries) if s.get(key) is not None]
        return [p[0] for p in pts], [p[1] for p in pts]

    for key, color in (("opt_gap", "tab:purple"), ("cov_gap", "tab:green")):
        xs, ys = series(key)
        if xs:
            left.plot(xs, ys, marker="o", color=color, label=key.replace("_", " "))
    left.set_ylabel("mean gap")
    for key, label in (("bsl_ms", "bsl"), ("apx_ms", "apx")):
        xs, ys = series(key)
        if xs:
            color, marker = STYLE[label]
            right.plot(xs, ys, marker=marker, color=color, label=label)
    right.set_ylabel("mean runtime (ms)")
    right.set_yscale("log")
    for ax in (left, right):
        ax.set_xticks(ticks)
        ax.set_xticklabels(labels)
        ax.set_xlabel(axis.replace("_", " "))
        if ax.get_lines():
            ax.legend(frameon=False)
        else:
            ax.text(0.5, 0.5, "no data", ha="center", va="center", transform=ax.transAxes)
    return _save(fig, path)
