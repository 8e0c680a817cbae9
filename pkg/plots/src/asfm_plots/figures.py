"""Figure and table rendering for finished runs.

Filenames and figure dimensions are fixed so repeated renders diff
cleanly; every number shown is read from the run's artifacts or is a
plain aggregation of them.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .frames import RunFrame, SchemaMismatch, load_run

RUN_FILES = ("activity.png", "sector_prices.png", "agent_returns.png", "summary.txt")
COMPARE_FILES = ("returns_overlay.png", "final_returns.png")

_DPI = 100


def _save(fig, path: Path) -> None:
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def _activity_figure(frame: RunFrame, path: Path) -> None:
    days = frame.metrics["day"]
    fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(8.0, 6.0))
    top.plot(days, frame.metrics["average_stock_return"], color="tab:blue")
    top.axhline(0.0, color="grey", linewidth=0.8)
    top.set_ylabel("average stock return")
    bottom.bar(days, frame.metrics["order_number"], color="tab:orange")
    bottom.set_ylabel("orders placed")
    bottom.set_xlabel("day")
    fig.suptitle(f"market activity: {frame.run_id}")
    _save(fig, path)


def _sector_figure(frame: RunFrame, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(8.0, 5.0))
    for code in frame.closes:
        series = frame.closes[code]
        base = series[0]
        ax.plot(
            range(len(series)),
            [close / base for close in series],
            label=f"{code} {frame.sectors[code]}",
        )
    ax.set_xlabel("day")
    ax.set_ylabel("close relative to day 0")
    ax.legend(fontsize=7, ncol=2)
    fig.suptitle(f"price paths by sector: {frame.run_id}")
    _save(fig, path)


def _agent_figure(frame: RunFrame, path: Path) -> None:
    returns = frame.final_returns()
    fig, (bars, scatter) = plt.subplots(1, 2, figsize=(10.0, 4.5))
    bars.bar(range(len(frame.agent_ids)), [returns[a] for a in frame.agent_ids],
             color="tab:green")
    bars.set_xticks(range(len(frame.agent_ids)))
    bars.set_xticklabels(frame.agent_ids, rotation=45, ha="right", fontsize=7)
    bars.axhline(0.0, color="grey", linewidth=0.8)
    bars.set_ylabel("return over the run")
    scatter.scatter(
        [frame.initial_capital[a] for a in frame.agent_ids],
        [returns[a] for a in frame.agent_ids],
        color="tab:red",
    )
    scatter.set_xlabel("initial capital")
    scatter.set_ylabel("return over the run")
    fig.suptitle(f"agent outcomes: {frame.run_id}")
    fig.tight_layout()
    _save(fig, path)


def _fmt(value) -> str:
    if value is None:
        return "n/a"
    return repr(value)


def summary_table(frame: RunFrame) -> str:
    """Headline metrics in a two-column table, values exactly as recorded."""
    rows = [
        ("metric", frame.run_id),
        ("order number (ON)", _fmt(frame.summary["order_number"])),
        ("order execution rate (OER)", _fmt(frame.summary["order_execution_rate"])),
        ("turnover rate (TR)", _fmt(frame.summary["turnover_rate"])),
        ("volatility (VO)", _fmt(frame.summary["volatility"])),
    ]
    width = max(len(label) for label, _ in rows) + 2
    return "".join(f"{label:<{width}}{value}\n" for label, value in rows)


def plot_run(run_dir, out_dir) -> list[Path]:
    """Render one run's figures and summary table into out_dir."""
    frame = load_run(run_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _activity_figure(frame, out / "activity.png")
    _sector_figure(frame, out / "sector_prices.png")
    _agent_figure(frame, out / "agent_returns.png")
    (out / "summary.txt").write_text(summary_table(frame), encoding="utf-8")
    return [out / name for name in RUN_FILES]


def compare_runs(run_dirs, labels=None, out_dir=".") -> list[Path]:
    """Overlay per-agent return curves and final returns across runs."""
    frames = [load_run(run_dir) for run_dir in run_dirs]
    if len(frames) < 2:
        raise ValueError("compare_runs needs at least two runs")
    if labels is None:
        labels = [frame.run_id for frame in frames]
    if len(labels) != len(frames):
        raise ValueError("one label per run, please")
    first = frames[0].agent_ids
    for frame in frames[1:]:
        if frame.agent_ids != first:
            raise SchemaMismatch(
                f"{frame.run_id} lists agents {frame.agent_ids}, "
                f"{frames[0].run_id} lists {first}"
            )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rows = (len(first) + 4) // 5
    fig, axes = plt.subplots(rows, 5, figsize=(12.0, 2.4 * rows),
                             sharex=True, squeeze=False)
    for idx, agent in enumerate(first):
        ax = axes[idx // 5][idx % 5]
        for frame, label in zip(frames, labels):
            ax.plot(frame.metrics["day"], frame.agent_curves[agent], label=label)
        ax.set_title(agent, fontsize=8)
        ax.tick_params(labelsize=6)
    for idx in range(len(first), rows * 5):
        axes[idx // 5][idx % 5].axis("off")
    axes[0][0].legend(fontsize=6)
    fig.suptitle("return to date per agent")
    fig.tight_layout()
    _save(fig, out / "returns_overlay.png")

    fig, ax = plt.subplots(figsize=(10.0, 4.5))
    width = 0.8 / len(frames)
    for offset, (frame, label) in enumerate(zip(frames, labels)):
        returns = frame.final_returns()
        ax.bar(
            [i + offset * width for i in range(len(first))],
            [returns[a] for a in first],
            width=width,
            label=label,
        )
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(first))])
    ax.set_xticklabels(first, rotation=45, ha="right", fontsize=7)
    ax.axhline(0.0, color="grey", linewidth=0.8)
    ax.set_ylabel("return over the run")
    ax.legend(fontsize=7)
    fig.suptitle("final returns per agent")
    fig.tight_layout()
    _save(fig, out / "final_returns.png")

    return [out / name for name in COMPARE_FILES]
