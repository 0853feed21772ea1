"""Report rendering: JSON documents, plain-text tables, CSV, and score
figures written beside them."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .introeval import IntroEvalReport
from .retrieval import RetrievalReport

_P_COLUMNS = (1, 3, 5)


def format_retrieval_table(report: RetrievalReport) -> str:
    """Plain-text table: strategy, n, MRR, p@1, p@3, p@5."""
    lines = [
        f"# ranker={report.ranker_name} seed={report.seed}",
        f"{'strategy':<18} {'n':>3} {'MRR':>7} "
        + " ".join(f"{'p@' + str(k):>7}" for k in _P_COLUMNS)
        + f" {'cases':>6} {'skip':>5} {'fail':>5}",
    ]
    for row in report.rows:
        cells = [f"{row.strategy:<18}", f"{row.n:>3}", f"{row.mrr:>7.3f}"]
        for k in _P_COLUMNS:
            value = row.p_at_k.get(k)
            cells.append(f"{value:>7.3f}" if value is not None else f"{'':>7}")
        cells.append(f"{row.case_count:>6}")
        cells.append(f"{row.skipped:>5}")
        cells.append(f"{row.failed:>5}")
        lines.append(" ".join(cells))
    return "\n".join(lines) + "\n"


def _write_retrieval_csv(report: RetrievalReport, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["strategy", "n", "mrr"]
            + [f"p_at_{k}" for k in _P_COLUMNS]
            + ["cases", "skipped", "failed"]
        )
        for row in report.rows:
            writer.writerow(
                [row.strategy, row.n, f"{row.mrr:.6f}"]
                + [
                    f"{row.p_at_k[k]:.6f}" if k in row.p_at_k else ""
                    for k in _P_COLUMNS
                ]
                + [row.case_count, row.skipped, row.failed]
            )


def _plot_retrieval(report: RetrievalReport, path: Path) -> None:
    strategies = sorted({row.strategy for row in report.rows})
    ns = sorted({row.n for row in report.rows})
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.8 / max(len(strategies), 1)
    for i, strategy in enumerate(strategies):
        values = []
        for n in ns:
            match = [r.mrr for r in report.rows if r.strategy == strategy and r.n == n]
            values.append(match[0] if match else 0.0)
        positions = [j + i * width for j in range(len(ns))]
        ax.bar(positions, values, width=width, label=strategy)
    ax.set_xticks([j + width * (len(strategies) - 1) / 2 for j in range(len(ns))])
    ax.set_xticklabels([str(n) for n in ns])
    ax.set_xlabel("candidate count n")
    ax.set_ylabel("MRR")
    ax.set_ylim(0, 1.05)
    ax.set_title(f"Ground-truth retrieval, ranker={report.ranker_name}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_retrieval_report(report: RetrievalReport, out_dir: str | Path) -> dict[str, Path]:
    """Write report.json, report.txt, report.csv, and the MRR figure."""
    out = Path(out_dir)
    (out / "figures").mkdir(parents=True, exist_ok=True)
    paths = {
        "json": out / "report.json",
        "text": out / "report.txt",
        "csv": out / "report.csv",
        "figure": out / "figures" / "mrr_by_condition.png",
    }
    paths["json"].write_text(
        json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    paths["text"].write_text(format_retrieval_table(report), encoding="utf-8")
    _write_retrieval_csv(report, paths["csv"])
    _plot_retrieval(report, paths["figure"])
    return paths


def format_intro_table(report: IntroEvalReport) -> str:
    lines = [
        f"# pairs={len(report.pairs)} claims={report.claim_count} "
        f"entailed={report.entailed_count}",
        f"{'pair':>4} {'rouge1_r':>9} {'rouge1_p':>9} {'rouge1_f1':>9} "
        f"{'claims':>6} {'yes':>4}",
    ]
    for pair in report.pairs:
        r = pair.rouge
        yes = sum(1 for c in pair.claims if c.label == "yes")
        lines.append(
            f"{pair.pair_index:>4} "
            + (
                f"{100 * r.recall:>9.1f} {100 * r.precision:>9.1f} {100 * r.f1:>9.1f}"
                if r
                else f"{'':>9} {'':>9} {'':>9}"
            )
            + f" {len(pair.claims):>6} {yes:>4}"
        )
    return "\n".join(lines) + "\n"


def _write_intro_csv(report: IntroEvalReport, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["pair_index", "rouge1_recall", "rouge1_precision", "rouge1_f1", "claim", "label", "p_yes"]
        )
        for pair in report.pairs:
            r = pair.rouge
            base = [
                pair.pair_index,
                f"{r.recall:.6f}" if r else "",
                f"{r.precision:.6f}" if r else "",
                f"{r.f1:.6f}" if r else "",
            ]
            if pair.claims:
                for claim in pair.claims:
                    writer.writerow(
                        base
                        + [claim.claim, claim.label, f"{claim.p_yes:.6f}" if claim.p_yes is not None else ""]
                    )
            else:
                writer.writerow(base + ["", "", ""])


def _histogram(values: list[float], title: str, xlabel: str, path: Path, x100: bool = False) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    plotted = [100 * v for v in values] if x100 else values
    if plotted:
        ax.hist(plotted, bins=min(20, max(5, len(plotted))), edgecolor="black")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_intro_report(report: IntroEvalReport, out_dir: str | Path) -> dict[str, Path]:
    """Write report.json/.txt/.csv plus score-distribution figures."""
    out = Path(out_dir)
    (out / "figures").mkdir(parents=True, exist_ok=True)
    paths = {
        "json": out / "report.json",
        "text": out / "report.txt",
        "csv": out / "report.csv",
        "rouge_figure": out / "figures" / "rouge_distribution.png",
        "entailment_figure": out / "figures" / "entailment_distribution.png",
    }
    paths["json"].write_text(
        json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    paths["text"].write_text(format_intro_table(report), encoding="utf-8")
    _write_intro_csv(report, paths["csv"])
    _histogram(
        report.rouge_f1_values(),
        "Overlap with original introductions",
        "ROUGE-1 F1 (x100)",
        paths["rouge_figure"],
        x100=True,
    )
    _histogram(
        report.p_yes_values(),
        "Claim entailment probabilities",
        "P(entailed)",
        paths["entailment_figure"],
    )
    return paths
