"""Scoring orchestration: generation files in, evaluation reports out.

A generations file is JSONL, one record per line with prompt_id / model /
method / temperature / repeat / text; (prompt_id, model, method,
temperature, repeat) must be unique per file. Scoring groups records by
(model, method, temperature), checks each group's prompt x repeat shape,
scores every response, and aggregates.

Responses with no valid token are excluded from the statistics and
reported in a separate tally, so scored + excluded + skipped always equals
the number of input records.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import InputDataError, NoValidTokens, ShapeMismatch
from .metrics import DEFAULT_TAU, ScoredResponse, aggregate, exact, score_text
from .reporting import EvalReport, ReportRow, format_temperature
from .textscan import KOREAN, ScriptConfig

METHODS = ("base", "sft", "dpo", "orpo")


@dataclass(frozen=True)
class GenerationRecord:
    prompt_id: str
    model: str
    method: str
    temperature: float
    repeat: int
    text: str

    @property
    def key(self) -> Tuple[str, str, str, float, int]:
        return (self.prompt_id, self.model, self.method, self.temperature, self.repeat)

    @property
    def group(self) -> Tuple[str, str, float]:
        return (self.model, self.method, self.temperature)


def record_from_obj(obj: Dict, where: str = "") -> GenerationRecord:
    try:
        rec = GenerationRecord(
            prompt_id=str(obj["prompt_id"]),
            model=str(obj["model"]),
            method=str(obj["method"]),
            temperature=float(obj["temperature"]),
            repeat=int(obj["repeat"]),
            text=obj["text"],
        )
    except (KeyError, ValueError, TypeError) as err:
        raise InputDataError(f"{where}: bad generation record ({err})") from err
    if rec.method not in METHODS:
        raise InputDataError(f"{where}: unknown method {rec.method!r}")
    if rec.temperature <= 0:
        raise InputDataError(f"{where}: temperature must be > 0")
    if rec.repeat < 1:
        raise InputDataError(f"{where}: repeat must be >= 1")
    if not isinstance(rec.text, str):
        raise InputDataError(f"{where}: text must be a string")
    return rec


def read_generations(path) -> List[GenerationRecord]:
    records = []
    seen = set()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as err:
            raise InputDataError(f"{path}:{lineno}: invalid JSON ({err})") from err
        rec = record_from_obj(obj, f"{path}:{lineno}")
        if rec.key in seen:
            raise InputDataError(f"{path}:{lineno}: duplicate key {rec.key}")
        seen.add(rec.key)
        records.append(rec)
    return records


def generation_to_obj(rec: GenerationRecord) -> Dict:
    return {
        "prompt_id": rec.prompt_id,
        "model": rec.model,
        "method": rec.method,
        "temperature": rec.temperature,
        "repeat": rec.repeat,
        "text": rec.text,
    }


def write_generations(path, records: Sequence[GenerationRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(generation_to_obj(rec), ensure_ascii=False) + "\n")


def _check_group_shape(records: Sequence[GenerationRecord], repeats: int) -> None:
    by_prompt: Dict[str, List[int]] = {}
    for rec in records:
        by_prompt.setdefault(rec.prompt_id, []).append(rec.repeat)
    for prompt_id, indices in by_prompt.items():
        if len(indices) != repeats:
            raise ShapeMismatch(
                f"prompt {prompt_id!r} has {len(indices)} repeats, expected {repeats}"
            )
        if len(set(indices)) != len(indices):
            raise ShapeMismatch(f"prompt {prompt_id!r} has duplicate repeat indices")


def score_generations(
    records: Sequence[GenerationRecord],
    threshold=DEFAULT_TAU,
    repeats: int = 3,
    target: ScriptConfig = KOREAN,
    workers: int = 1,
) -> EvalReport:
    """Score and aggregate a generations file into an EvalReport.

    Groups whose prompt/repeat shape is broken are skipped (with the reason
    recorded) rather than failing the whole run. Scoring is pure per record,
    so `workers` changes throughput only, never the report bytes.
    """
    if not records:
        raise InputDataError("no generation records to score")
    thr = exact(threshold)

    def score_one(rec: GenerationRecord) -> Optional[ScoredResponse]:
        try:
            return score_text(
                rec.text,
                response_id=f"{rec.prompt_id}#{rec.repeat}",
                prompt_id=rec.prompt_id,
                repeat=rec.repeat,
                target=target,
                tau=thr,
            )
        except NoValidTokens:
            return None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = dict(zip((r.key for r in records), pool.map(score_one, records)))
    else:
        outcomes = {rec.key: score_one(rec) for rec in records}

    groups: Dict[Tuple[str, str, float], List[GenerationRecord]] = {}
    for rec in records:
        groups.setdefault(rec.group, []).append(rec)

    rows: List[ReportRow] = []
    skipped_groups: List[Dict] = []
    scored_total = 0
    excluded_total = 0
    skipped_records = 0

    for group_key in sorted(groups, key=lambda g: (g[0], g[1], g[2])):
        model, method, temperature = group_key
        members = groups[group_key]

        def skip(reason: str) -> None:
            skipped_groups.append(
                {
                    "model": model,
                    "method": method,
                    "temperature": format_temperature(temperature),
                    "reason": reason,
                }
            )

        try:
            _check_group_shape(members, repeats)
        except ShapeMismatch as err:
            skip(str(err))
            skipped_records += len(members)
            continue

        scored = [outcomes[rec.key] for rec in members if outcomes[rec.key] is not None]
        excluded = len(members) - len(scored)
        if not scored:
            skip("all responses excluded (no valid tokens)")
            skipped_records += len(members)
            continue

        score = aggregate(scored, repeats, thr, partial_prompts_ok=True)
        rows.append(
            ReportRow(
                model=model,
                method=method,
                temperature=temperature,
                score=score,
                excluded=excluded,
            )
        )
        scored_total += len(scored)
        excluded_total += excluded

    return EvalReport(
        rows=rows,
        threshold=thr,
        repeats=repeats,
        counts={
            "total": len(records),
            "scored": scored_total,
            "excluded": excluded_total,
            "skipped": skipped_records,
        },
        skipped_groups=skipped_groups,
    )


def score_file(
    path,
    threshold=DEFAULT_TAU,
    repeats: int = 3,
    target: ScriptConfig = KOREAN,
    workers: int = 1,
) -> EvalReport:
    return score_generations(read_generations(path), threshold, repeats, target, workers)
