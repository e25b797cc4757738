"""Figure rendering for iteration reports.

Renders the classic dual/primal energy curves from the delimited report
table so solver behavior can be inspected at a glance.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .subgradient import RunReport  # noqa: E402


def plot_energy_curves(report: RunReport, out_path, title: str = "") -> None:
    ts = [r.t for r in report.records]
    fig, (ax_e, ax_c) = plt.subplots(
        2, 1, figsize=(7, 6), sharex=True,
        gridspec_kw={"height_ratios": [3, 1]})
    ax_e.plot(ts, [r.dual for r in report.records], label="dual",
              color="tab:blue", alpha=0.6)
    ax_e.plot(ts, [r.primal for r in report.records], label="primal",
              color="tab:red", alpha=0.6)
    ax_e.plot(ts, [r.best_dual for r in report.records], label="best dual",
              color="tab:blue", linestyle="--")
    ax_e.plot(ts, [r.best_primal for r in report.records], label="best primal",
              color="tab:red", linestyle="--")
    ax_e.set_ylabel("energy")
    ax_e.legend(loc="best", fontsize=8)
    if title:
        ax_e.set_title(title)
    ax_c.plot(ts, [r.conflicts for r in report.records], color="tab:gray")
    ax_c.set_ylabel("conflicts")
    ax_c.set_xlabel("iteration")
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
