"""Matplotlib rendering of the report CSV series to PNG files."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_STRATEGY_LABELS = (
    ("no_rej", "No Rej"),
    ("universal", "Uni."),
    ("design_aware", "Des."),
    ("design_workload_aware", "D&W"),
    ("min", "Min."),
    ("nominal", "Nom."),
)


def compare_figure(rows, averages, design_name, path):
    """Grouped bars: aging per workload and strategy, one design."""
    drows = [r for r in rows if r["design"] == design_name]
    drows += [a for a in averages if a["design"] == design_name]
    labels = [r["workload"] for r in drows]
    x = np.arange(len(drows))
    fig, ax = plt.subplots(figsize=(8, 4))
    width = 0.14
    for i, (key, label) in enumerate(_STRATEGY_LABELS):
        vals = [r[key] for r in drows]
        ax.bar(x + (i - 2.5) * width, vals, width, label=label)
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=45, ha="right")
    ax.set_ylabel("Aging [%]")
    ax.set_ylim(bottom=95)
    ax.set_title(design_name)
    ax.legend(ncol=3, fontsize=8)
    ax.grid(axis="y", alpha=0.4)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def overhead_figure(ratios, series, floors, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, vals in series.items():
        line, = ax.plot([100 * r for r in ratios], vals, marker="o", label=name)
        ax.plot([100 * ratios[-1]], [floors[name]], marker="x", markersize=10,
                color=line.get_color())
    ax.set_xlabel("Overhead [%]")
    ax.set_ylabel("Aging [%]")
    ax.grid(alpha=0.4)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def years_figure(years_grid, series, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, curves in series.items():
        line, = ax.plot(years_grid, curves["no_rej"], label=f"{name} no rej.")
        ax.plot(years_grid, curves["mitigated"], linestyle="--",
                color=line.get_color(), label=f"{name} mitigated")
    ax.set_xlabel("Years")
    ax.set_ylabel("Aging [%]")
    ax.grid(alpha=0.4)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def assess_figure(report, path):
    """Per-output nominal / aged critical delays, one panel per group."""
    groups = sorted({r.group for r in report.paths})
    fig, axes = plt.subplots(1, len(groups), figsize=(4 * len(groups), 3.5),
                             squeeze=False)
    for ax, g in zip(axes[0], groups):
        rows = [r for r in report.paths if r.group == g]
        outputs = sorted({r.output_index for r in rows})
        nom = [max(r.nominal for r in rows if r.output_index == o) for o in outputs]
        aged = [max(r.aged for r in rows if r.output_index == o) for o in outputs]
        y = np.arange(len(outputs))
        ax.barh(y, nom, height=0.6, label="time-zero", color="0.7")
        ax.barh(y, [a - n for n, a in zip(nom, aged)], height=0.6, left=nom,
                label="BTI-induced", color="tab:red")
        ax.axvline(report.slack_remaining + report.aged_critical, linestyle="--",
                   color="k", linewidth=1)
        ax.set_yticks(y)
        ax.set_yticklabels([f"out{o}" for o in outputs], fontsize=7)
        ax.set_xlabel("delay [units]")
        ax.set_title(f"group {g}", fontsize=9)
    axes[0][0].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
