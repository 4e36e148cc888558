"""Evaluation report assembly and deterministic rendering.

A report holds one CorpusScore per (model, method, temperature) group plus
enough metadata to account for every input record. Rendering is byte-stable
for a given report: Markdown mirrors the four-metric table layout
("WPR > t ratio", "LPR > t ratio", "Average WPR", "Average LPR"), CSV is
one row per group, and JSON carries exact fractions so a report can be
re-rendered losslessly.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import __version__
from .errors import InputDataError
from .metrics import CorpusScore

#: Canonical column order for methods, matching how result tables are laid out.
METHOD_ORDER = ("base", "sft", "dpo", "orpo")

MARKDOWN_METRICS = ("wpr_ratio", "lpr_ratio", "mean_wpr", "mean_lpr")


def fixed4(value: Fraction) -> str:
    """Render an exact rational to 4 decimal places (banker's rounding)."""
    with localcontext() as ctx:
        ctx.prec = 60
        dec = Decimal(value.numerator) / Decimal(value.denominator)
        return str(dec.quantize(Decimal("0.0001"), rounding=ROUND_HALF_EVEN))


def trim_decimal(value: Fraction) -> str:
    """Short display form: '0.9' rather than '0.9000'."""
    text = fixed4(value)
    return text.rstrip("0").rstrip(".") if "." in text else text


def format_temperature(temperature: float) -> str:
    return repr(float(temperature))


@dataclass(frozen=True)
class ReportRow:
    model: str
    method: str
    temperature: float
    score: CorpusScore
    excluded: int = 0

    @property
    def label(self) -> str:
        return f"{self.model} {self.method} T={format_temperature(self.temperature)}"


def _row_sort_key(row: ReportRow) -> Tuple:
    rank = METHOD_ORDER.index(row.method) if row.method in METHOD_ORDER else len(METHOD_ORDER)
    return (row.model, row.temperature, rank, row.method)


@dataclass
class EvalReport:
    rows: List[ReportRow]
    threshold: Fraction
    repeats: int
    version: str = __version__
    counts: Dict[str, int] = field(default_factory=dict)
    skipped_groups: List[Dict] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.rows = sorted(self.rows, key=_row_sort_key)

    def metric_values(self, row: ReportRow) -> Dict[str, Fraction]:
        return {
            "wpr_ratio": row.score.wpr_over_threshold_ratio,
            "lpr_ratio": row.score.lpr_over_threshold_ratio,
            "mean_wpr": row.score.mean_wpr,
            "mean_lpr": row.score.mean_lpr,
        }

    def metric_labels(self) -> Dict[str, str]:
        thr = trim_decimal(self.threshold)
        return {
            "wpr_ratio": f"WPR > {thr} ratio",
            "lpr_ratio": f"LPR > {thr} ratio",
            "mean_wpr": "Average WPR",
            "mean_lpr": "Average LPR",
        }


def render_markdown(report: EvalReport) -> bytes:
    labels = report.metric_labels()
    lines = [
        "# Language confusion report",
        "",
        f"- tool: langmix {report.version}",
        f"- threshold: {trim_decimal(report.threshold)}, repeats per prompt: {report.repeats}",
    ]
    counts = report.counts
    if counts:
        lines.append(
            "- records: total={total}, scored={scored}, excluded={excluded}, skipped={skipped}".format(
                **counts
            )
        )
    lines.append("")
    header = ["Metric"] + [row.label for row in report.rows]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "|".join([" --- "] * len(header)) + "|")
    for metric in MARKDOWN_METRICS:
        cells = [labels[metric]] + [fixed4(report.metric_values(row)[metric]) for row in report.rows]
        lines.append("| " + " | ".join(cells) + " |")
    lines.append("")
    excluded_rows = [r for r in report.rows if r.excluded]
    if excluded_rows:
        lines.append("Excluded (no valid tokens):")
        for row in excluded_rows:
            lines.append(f"- {row.label}: {row.excluded}")
        lines.append("")
    if report.skipped_groups:
        lines.append("Skipped groups:")
        for item in report.skipped_groups:
            lines.append(
                "- {model} {method} T={temperature}: {reason}".format(
                    model=item["model"],
                    method=item["method"],
                    temperature=item["temperature"],
                    reason=item["reason"],
                )
            )
        lines.append("")
    return ("\n".join(lines)).encode("utf-8")


CSV_COLUMNS = (
    "model",
    "method",
    "temperature",
    "n_responses",
    "excluded",
    "wpr_over_threshold_ratio",
    "lpr_over_threshold_ratio",
    "mean_wpr",
    "mean_lpr",
    "threshold",
)


def render_csv(report: EvalReport) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in report.rows:
        writer.writerow(
            [
                row.model,
                row.method,
                format_temperature(row.temperature),
                row.score.n_responses,
                row.excluded,
                fixed4(row.score.wpr_over_threshold_ratio),
                fixed4(row.score.lpr_over_threshold_ratio),
                fixed4(row.score.mean_wpr),
                fixed4(row.score.mean_lpr),
                trim_decimal(report.threshold),
            ]
        )
    return buf.getvalue().encode("utf-8")


def parse_csv(data: bytes) -> List[Dict]:
    """Read a rendered CSV back into typed row dicts (numbers as Fractions)."""
    reader = csv.DictReader(io.StringIO(data.decode("utf-8")))
    rows = []
    for raw in reader:
        rows.append(
            {
                "model": raw["model"],
                "method": raw["method"],
                "temperature": float(raw["temperature"]),
                "n_responses": int(raw["n_responses"]),
                "excluded": int(raw["excluded"]),
                "wpr_over_threshold_ratio": Fraction(raw["wpr_over_threshold_ratio"]),
                "lpr_over_threshold_ratio": Fraction(raw["lpr_over_threshold_ratio"]),
                "mean_wpr": Fraction(raw["mean_wpr"]),
                "mean_lpr": Fraction(raw["mean_lpr"]),
                "threshold": Fraction(raw["threshold"]),
            }
        )
    return rows


_EXACT_FIELDS = (
    "wpr_over_threshold_ratio",
    "lpr_over_threshold_ratio",
    "mean_wpr",
    "mean_lpr",
)


def to_json_dict(report: EvalReport) -> Dict:
    rows = []
    for row in report.rows:
        score = row.score
        entry = {
            "model": row.model,
            "method": row.method,
            "temperature": float(row.temperature),
            "n_responses": score.n_responses,
            "excluded": row.excluded,
            "exact": {},
        }
        for name in _EXACT_FIELDS:
            value: Fraction = getattr(score, name)
            entry[name] = fixed4(value)
            entry["exact"][name] = f"{value.numerator}/{value.denominator}"
        rows.append(entry)
    return {
        "metadata": {
            "tool": "langmix",
            "version": report.version,
            "threshold": trim_decimal(report.threshold),
            "threshold_exact": f"{report.threshold.numerator}/{report.threshold.denominator}",
            "repeats": report.repeats,
            "counts": dict(report.counts),
            "skipped_groups": list(report.skipped_groups),
        },
        "rows": rows,
    }


def render_json(report: EvalReport) -> bytes:
    return (json.dumps(to_json_dict(report), indent=2, sort_keys=True) + "\n").encode("utf-8")


def report_from_json(data) -> EvalReport:
    """Rebuild a report from its JSON rendering (exact fields, no rounding)."""
    if isinstance(data, (bytes, str)):
        data = json.loads(data)
    try:
        meta = data["metadata"]
        rows = []
        for entry in data["rows"]:
            exact_fields = {name: Fraction(entry["exact"][name]) for name in _EXACT_FIELDS}
            score = CorpusScore(
                n_responses=int(entry["n_responses"]),
                mean_wpr=exact_fields["mean_wpr"],
                mean_lpr=exact_fields["mean_lpr"],
                wpr_over_threshold_ratio=exact_fields["wpr_over_threshold_ratio"],
                lpr_over_threshold_ratio=exact_fields["lpr_over_threshold_ratio"],
                threshold=Fraction(meta["threshold_exact"]),
            )
            rows.append(
                ReportRow(
                    model=entry["model"],
                    method=entry["method"],
                    temperature=float(entry["temperature"]),
                    score=score,
                    excluded=int(entry["excluded"]),
                )
            )
        return EvalReport(
            rows=rows,
            threshold=Fraction(meta["threshold_exact"]),
            repeats=int(meta["repeats"]),
            version=meta["version"],
            counts=dict(meta.get("counts", {})),
            skipped_groups=list(meta.get("skipped_groups", [])),
        )
    except (KeyError, ValueError, TypeError) as err:
        raise InputDataError(f"malformed report JSON: {err}") from err


def render(report: EvalReport, fmt: str) -> bytes:
    if fmt == "markdown":
        return render_markdown(report)
    if fmt == "csv":
        return render_csv(report)
    if fmt == "json":
        return render_json(report)
    raise ValueError(f"unknown report format {fmt!r}")
