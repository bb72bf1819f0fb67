"""Input-rate robustness evaluation.

A sweep runs a fixed classifier over the 15-point input-alpha grid
{0.2, 0.4, ..., 3.0}, records top-1 accuracy per alpha, and summarizes:

* std: population standard deviation over the 15 accuracies (the
  stability number; lower means more rate-robust),
* per-class accuracy pooled into the four rate bins, with the bin mean
  (ma) and the worst bin-to-bin gap (md),
* a Type verdict: models whose accuracy range over the sweep exceeds a
  threshold (default 10 points) are "TypeI" (rate-fragile), the rest
  "TypeII" (inherently stable).

Every aggregate is recomputable from the per-sample log that is written
next to each report.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .dataset import BINS, bin_of_rate
from .pipeline import PipelineSpec, run_pipeline
from .schedules import ScheduleState
from .toy import LabeledSequence, ToyClassifier, predict

logger = logging.getLogger(__name__)

ALPHA_GRID = tuple(i / 5 for i in range(1, 16))  # 0.2, 0.4, ..., 3.0
DEFAULT_TYPE_THRESHOLD = 10.0


@dataclass
class SampleRecord:
    sample_id: str
    alpha: float
    true_label: int
    pred_label: int
    correct: bool


@dataclass
class ClassBinStats:
    bin_acc: dict[str, float]  # percent, only bins with samples present
    ma: float
    md: float


@dataclass
class AlphaSweepReport:
    alphas: list[float]
    accuracy_at: dict[float, float]  # percent
    acc_uniform: float
    std: float
    per_class: dict[int, ClassBinStats]
    model_tag: str = ""
    dataset_tag: str = ""
    checkpoint_tag: str = ""
    sample_log: list[SampleRecord] = field(default_factory=list, compare=False, repr=False)


def stability(accuracies: list[float] | np.ndarray) -> float:
    """Population standard deviation of the 15 sweep accuracies."""
    vals = np.asarray(accuracies, dtype=np.float64)
    if vals.shape != (len(ALPHA_GRID),):
        raise ValueError(f"expected {len(ALPHA_GRID)} accuracies, got {vals.shape}")
    return float(np.sqrt(np.mean((vals - vals.mean()) ** 2)))


def class_bin_stats(
    per_sample: list[tuple[int, float, bool]],
) -> dict[int, ClassBinStats]:
    """Per-class accuracy pooled into rate bins from (class, rate, correct) rows.

    Bin accuracy weights every sample in the bin equally; bins with no
    samples are left out of the map and out of ma/md.
    """
    correct: dict[int, dict[str, int]] = {}
    total: dict[int, dict[str, int]] = {}
    for cls, rate, ok in per_sample:
        b = bin_of_rate(rate)
        correct.setdefault(cls, {}).setdefault(b, 0)
        total.setdefault(cls, {}).setdefault(b, 0)
        total[cls][b] += 1
        if ok:
            correct[cls][b] += 1
    out: dict[int, ClassBinStats] = {}
    for cls in sorted(total):
        accs = {
            b: 100.0 * correct[cls][b] / total[cls][b] for b in BINS if total[cls].get(b)
        }
        vals = list(accs.values())
        out[cls] = ClassBinStats(
            bin_acc=accs, ma=float(np.mean(vals)), md=float(max(vals) - min(vals))
        )
    return out


def classify_temporal_type(
    report: AlphaSweepReport, range_threshold: float = DEFAULT_TYPE_THRESHOLD
) -> str:
    """"TypeI" when the sweep's accuracy range strictly exceeds the threshold."""
    accs = [report.accuracy_at[a] for a in report.alphas]
    return "TypeI" if max(accs) - min(accs) > range_threshold else "TypeII"


def input_alpha_test(
    classifier: ToyClassifier,
    test_samples: list[LabeledSequence],
    pipeline: PipelineSpec,
    schedule_for_test: ScheduleState | None = None,
    rng_seed: int = 0,
    model_tag: str = "",
    dataset_tag: str = "",
) -> AlphaSweepReport:
    """Sweep the input resampling factor over the 15-point grid.

    Each test sample runs through the pipeline in test mode at every grid
    alpha; accuracy is the exact percentage of correct top-1 predictions.
    For constant schedules the pipeline's own resampling stays at the
    trained constant, otherwise at 1.0.
    """
    if not test_samples:
        raise ValueError("test split is empty")
    records: list[SampleRecord] = []
    accuracy_at: dict[float, float] = {}
    for alpha in ALPHA_GRID:
        n_correct = 0
        for s in test_samples:
            out = run_pipeline(
                s.seq, pipeline, "test", input_alpha=alpha,
                schedule=schedule_for_test, rng_seed=rng_seed,
            )
            label, _ = predict(classifier, out)
            ok = label == s.label
            n_correct += ok
            records.append(SampleRecord(s.seq.id, alpha, s.label, label, ok))
        accuracy_at[alpha] = 100.0 * n_correct / len(test_samples)

    per_class = class_bin_stats([(r.true_label, r.alpha, r.correct) for r in records])
    accs = [accuracy_at[a] for a in ALPHA_GRID]
    return AlphaSweepReport(
        alphas=list(ALPHA_GRID),
        accuracy_at=accuracy_at,
        acc_uniform=accuracy_at[1.0],
        std=stability(accs),
        per_class=per_class,
        model_tag=model_tag,
        dataset_tag=dataset_tag,
        sample_log=records,
    )


def checkpoint_sweep(
    checkpoints: list[tuple[str, ToyClassifier]],
    test_samples: list[LabeledSequence],
    pipeline: PipelineSpec,
    schedule_for_test: ScheduleState | None = None,
    rng_seed: int = 0,
    model_tag: str = "",
    dataset_tag: str = "",
) -> list[AlphaSweepReport]:
    """One sweep report per (tag, classifier), in the given order.

    A failing checkpoint is logged and skipped rather than aborting the
    remaining sweeps.
    """
    if not checkpoints:
        raise ValueError("need at least one checkpoint")
    reports = []
    for tag, clf in checkpoints:
        try:
            report = input_alpha_test(
                clf, test_samples, pipeline, schedule_for_test,
                rng_seed=rng_seed, model_tag=model_tag, dataset_tag=dataset_tag,
            )
        except Exception as exc:
            logger.warning("checkpoint %s failed: %s", tag, exc)
            continue
        report.checkpoint_tag = tag
        reports.append(report)
    return reports


# --- report emission ----------------------------------------------------------


def _alpha_str(alpha: float) -> str:
    return f"{alpha:.1f}"


def write_sample_log(report: AlphaSweepReport, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        f"{r.sample_id}\t{_alpha_str(r.alpha)}\t{r.true_label}\t{r.pred_label}\t{int(r.correct)}"
        for r in report.sample_log
    ]
    p.write_text("\n".join(lines) + "\n")
    return p


def report_to_json_dict(report: AlphaSweepReport) -> dict:
    return {
        "alphas": [_alpha_str(a) for a in report.alphas],
        "accuracy_at": {_alpha_str(a): report.accuracy_at[a] for a in report.alphas},
        "acc_uniform": report.acc_uniform,
        "std": report.std,
        "type": classify_temporal_type(report),
        "per_class": {
            str(cls): {"bin_acc": st.bin_acc, "ma": st.ma, "md": st.md}
            for cls, st in report.per_class.items()
        },
        "model_tag": report.model_tag,
        "dataset_tag": report.dataset_tag,
        "checkpoint_tag": report.checkpoint_tag,
    }


def report_from_json_dict(d: dict) -> AlphaSweepReport:
    alphas = [float(a) for a in d["alphas"]]
    return AlphaSweepReport(
        alphas=alphas,
        accuracy_at={float(a): v for a, v in d["accuracy_at"].items()},
        acc_uniform=d["acc_uniform"],
        std=d["std"],
        per_class={
            int(cls): ClassBinStats(bin_acc=st["bin_acc"], ma=st["ma"], md=st["md"])
            for cls, st in d["per_class"].items()
        },
        model_tag=d["model_tag"],
        dataset_tag=d["dataset_tag"],
        checkpoint_tag=d["checkpoint_tag"],
    )


def class_stats_rows(
    per_class: dict[int, ClassBinStats], names: dict[int, str] | None = None
) -> list[str]:
    """Per-class summary rows in the "<name>  M.A. <x>  M.D. <y>" layout."""
    rows = []
    for cls in sorted(per_class):
        st = per_class[cls]
        name = names[cls] if names else f"class_{cls}"
        rows.append(f"{name}  M.A. {st.ma:.3g}  M.D. {st.md:.3g}")
    return rows


def emit_report(report: AlphaSweepReport, path: str | Path, format: str = "csv") -> Path:
    """Write a report as CSV or JSON; the per-sample log lands next to it."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    if format == "csv":
        lines = ["alpha,accuracy"]
        lines += [f"{_alpha_str(a)},{report.accuracy_at[a]!r}" for a in report.alphas]
        lines += [
            f"acc_uniform,{report.acc_uniform!r}",
            f"std,{report.std!r}",
            f"type,{classify_temporal_type(report)}",
        ]
        p.write_text("\n".join(lines) + "\n")
    elif format == "json":
        p.write_text(json.dumps(report_to_json_dict(report), indent=2, sort_keys=True) + "\n")
    else:
        raise ValueError(f"format must be csv or json, got {format!r}")
    if report.sample_log:
        write_sample_log(report, p.with_name(p.stem + "_samples.tsv"))
    return p


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def emit_plot(reports: list[AlphaSweepReport], path: str | Path) -> Path:
    """Accuracy-vs-alpha SVG: one polyline per report, legend of model tags."""
    if not reports:
        raise ValueError("need at least one report to plot")
    width, height = 640, 440
    ml, mr, mt, mb = 60, 160, 20, 45
    plot_w = width - ml - mr
    plot_h = height - mt - mb

    def px(alpha: float) -> float:
        return ml + (alpha - 0.2) / (3.0 - 0.2) * plot_w

    def py(acc: float) -> float:
        return mt + (100.0 - acc) / 100.0 * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="{ml}" y="{mt}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#333"/>',
    ]
    for acc in range(0, 101, 20):
        y = py(acc)
        parts.append(
            f'<line x1="{ml}" y1="{y:.1f}" x2="{ml + plot_w}" y2="{y:.1f}" '
            'stroke="#ddd" stroke-width="0.5"/>'
        )
        parts.append(
            f'<text x="{ml - 8}" y="{y + 4:.1f}" text-anchor="end" font-size="11">{acc}</text>'
        )
    for alpha in (0.2, 1.0, 2.0, 3.0):
        x = px(alpha)
        parts.append(
            f'<text x="{x:.1f}" y="{mt + plot_h + 16}" text-anchor="middle" '
            f'font-size="11">{alpha:g}</text>'
        )
    parts.append(
        f'<text x="{ml + plot_w / 2:.1f}" y="{height - 8}" text-anchor="middle" '
        'font-size="12">input resampling factor</text>'
    )
    for i, report in enumerate(reports):
        color = _PALETTE[i % len(_PALETTE)]
        points = " ".join(
            f"{px(a):.1f},{py(report.accuracy_at[a]):.1f}" for a in report.alphas
        )
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        tag = report.model_tag or f"model {i + 1}"
        if report.checkpoint_tag:
            tag += f" [{report.checkpoint_tag}]"
        ly = mt + 14 + 18 * i
        parts.append(
            f'<line x1="{ml + plot_w + 10}" y1="{ly - 4}" x2="{ml + plot_w + 30}" '
            f'y2="{ly - 4}" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{ml + plot_w + 35}" y="{ly}" font-size="11">{tag}</text>'
        )
    parts.append("</svg>")
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text("\n".join(parts) + "\n")
    return p


def report_with_tag(report: AlphaSweepReport, checkpoint_tag: str) -> AlphaSweepReport:
    return replace(report, checkpoint_tag=checkpoint_tag)
