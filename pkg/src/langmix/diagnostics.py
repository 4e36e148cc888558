"""Loss-trajectory analysis and preference-loss calculators.

Consumes loss logs exported by external training/eval runs (this package
never loads a model): per-checkpoint chosen/rejected losses for trajectory
and delta-loss analysis, and per-sequence log-probabilities for the ORPO
and DPO objectives. All log quantities are natural-log (nats).

ORPO odds use the length-normalized sequence likelihood p = exp(mean token
log-prob), which keeps odds finite regardless of sequence length; the DPO
margin uses total (mean x token count) log-probs against a reference model.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence

from .errors import (
    DegenerateProbability,
    EmptyInput,
    InputDataError,
    MissingReference,
    NonFiniteLoss,
)
from .rng import SplitMix64

LOSS_CSV_HEADER = ["checkpoint_id", "tokens_seen", "example_id", "chosen_loss", "rejected_loss"]
OPTIONAL_TOKEN_COLUMNS = ["chosen_tokens", "rejected_tokens"]


@dataclass(frozen=True)
class LossRecord:
    """One (checkpoint, example) row of mean per-token NLL in nats."""

    checkpoint_id: str
    tokens_seen: int
    example_id: str
    chosen_loss: float
    rejected_loss: float
    chosen_tokens: Optional[int] = None
    rejected_tokens: Optional[int] = None


def _check_record(rec: LossRecord) -> None:
    for name, value in (("chosen_loss", rec.chosen_loss), ("rejected_loss", rec.rejected_loss)):
        if not math.isfinite(value) or value < 0:
            raise NonFiniteLoss(f"{rec.checkpoint_id}/{rec.example_id}: {name}={value!r}")
    if rec.tokens_seen < 0:
        raise InputDataError(f"{rec.checkpoint_id}: tokens_seen must be >= 0")


@dataclass(frozen=True)
class TrajectoryPoint:
    checkpoint_id: str
    tokens_seen: int
    mean_chosen_loss: float
    mean_rejected_loss: float
    delta: float
    n_examples: int


def trajectory(records: Sequence[LossRecord], weighting: str = "example") -> List[TrajectoryPoint]:
    """One point per checkpoint, ascending in tokens_seen.

    `weighting="example"` averages losses uniformly over the checkpoint's
    examples; `"token"` weights each example by its token count, which
    requires the optional token-count columns.
    """
    if not records:
        raise EmptyInput("trajectory over empty records")
    if weighting not in ("example", "token"):
        raise ValueError("weighting must be 'example' or 'token'")

    by_checkpoint: Dict[str, List[LossRecord]] = {}
    for rec in records:
        _check_record(rec)
        by_checkpoint.setdefault(rec.checkpoint_id, []).append(rec)

    points = []
    for checkpoint_id, group in by_checkpoint.items():
        tokens_seen = {rec.tokens_seen for rec in group}
        if len(tokens_seen) != 1:
            raise InputDataError(f"checkpoint {checkpoint_id!r} has conflicting tokens_seen values")
        if weighting == "example":
            mean_c = math.fsum(r.chosen_loss for r in group) / len(group)
            mean_r = math.fsum(r.rejected_loss for r in group) / len(group)
        else:
            if any(r.chosen_tokens is None or r.rejected_tokens is None for r in group):
                raise InputDataError(
                    f"checkpoint {checkpoint_id!r}: token weighting needs "
                    "chosen_tokens/rejected_tokens columns"
                )
            mean_c = math.fsum(r.chosen_loss * r.chosen_tokens for r in group) / math.fsum(
                r.chosen_tokens for r in group
            )
            mean_r = math.fsum(r.rejected_loss * r.rejected_tokens for r in group) / math.fsum(
                r.rejected_tokens for r in group
            )
        points.append(
            TrajectoryPoint(
                checkpoint_id=checkpoint_id,
                tokens_seen=tokens_seen.pop(),
                mean_chosen_loss=mean_c,
                mean_rejected_loss=mean_r,
                delta=mean_r - mean_c,
                n_examples=len(group),
            )
        )
    points.sort(key=lambda p: (p.tokens_seen, p.checkpoint_id))
    return points


def delta_loss(records: Sequence[LossRecord]) -> float:
    """Mean of (rejected_loss - chosen_loss) over all records."""
    if not records:
        raise EmptyInput("delta_loss over empty records")
    for rec in records:
        _check_record(rec)
    return math.fsum(r.rejected_loss - r.chosen_loss for r in records) / len(records)


@dataclass(frozen=True)
class SequenceLogProb:
    """Length-normalized sequence log-likelihood for one example."""

    example_id: str
    mean_token_logprob: float
    token_count: int
    reference_mean_token_logprob: Optional[float] = None


def _log_odds(mean_logprob: float) -> float:
    """log(p / (1 - p)) for p = exp(mean_logprob), computed stably."""
    if not math.isfinite(mean_logprob):
        raise DegenerateProbability(f"non-finite log-prob {mean_logprob!r}")
    if mean_logprob >= 0:
        raise DegenerateProbability(f"mean log-prob {mean_logprob} implies p >= 1")
    p = math.exp(mean_logprob)
    if p == 0.0:
        raise DegenerateProbability(f"mean log-prob {mean_logprob} underflows to p = 0")
    return mean_logprob - math.log1p(-p)


def _softplus(z: float) -> float:
    # -log(sigmoid(x)) == softplus(-x); stable for large |z|
    return max(z, 0.0) + math.log1p(math.exp(-abs(z)))


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


class OrpoLoss(NamedTuple):
    total: float
    sft_term: float
    or_term: float


def orpo_loss(chosen: SequenceLogProb, rejected: SequenceLogProb, beta: float = 0.1) -> OrpoLoss:
    """SFT term plus beta-weighted log-odds-ratio penalty.

    or_term = -log sigmoid(log odds(p_chosen) - log odds(p_rejected)) with
    p = exp(mean token log-prob); sft_term = -mean token log-prob of chosen.
    """
    log_odds_gap = _log_odds(chosen.mean_token_logprob) - _log_odds(rejected.mean_token_logprob)
    or_term = _softplus(-log_odds_gap)
    sft_term = -chosen.mean_token_logprob
    return OrpoLoss(total=sft_term + beta * or_term, sft_term=sft_term, or_term=or_term)


def orpo_chosen_grad(chosen: SequenceLogProb, rejected: SequenceLogProb) -> float:
    """Analytic d(or_term)/d(chosen mean log-prob); used to cross-check numerics."""
    lo_c = _log_odds(chosen.mean_token_logprob)
    lo_r = _log_odds(rejected.mean_token_logprob)
    p_c = math.exp(chosen.mean_token_logprob)
    # d or_term/d lo_c = -sigmoid(lo_r - lo_c); d lo_c/d lp_c = 1/(1 - p_c)
    return -_sigmoid(lo_r - lo_c) / (1.0 - p_c)


def dpo_loss(chosen: SequenceLogProb, rejected: SequenceLogProb, beta: float = 0.1) -> float:
    """-log sigmoid(beta * margin) with the margin over total log-probs.

    margin = (chosen - its reference) - (rejected - its reference), each a
    mean token log-prob scaled by the sequence's token count.
    """
    for rec in (chosen, rejected):
        if rec.reference_mean_token_logprob is None:
            raise MissingReference(f"example {rec.example_id!r} lacks a reference log-prob")
    margin = (
        chosen.mean_token_logprob - chosen.reference_mean_token_logprob
    ) * chosen.token_count - (
        rejected.mean_token_logprob - rejected.reference_mean_token_logprob
    ) * rejected.token_count
    return _softplus(-beta * margin)


def read_loss_csv(path) -> List[LossRecord]:
    """Parse a loss log; header must match the documented schema."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        missing = [col for col in LOSS_CSV_HEADER if col not in fields]
        if missing:
            raise InputDataError(f"{path}: missing columns {missing}")
        records = []
        for lineno, row in enumerate(reader, 2):
            try:
                rec = LossRecord(
                    checkpoint_id=row["checkpoint_id"],
                    tokens_seen=int(row["tokens_seen"]),
                    example_id=row["example_id"],
                    chosen_loss=float(row["chosen_loss"]),
                    rejected_loss=float(row["rejected_loss"]),
                    chosen_tokens=int(row["chosen_tokens"]) if row.get("chosen_tokens") else None,
                    rejected_tokens=int(row["rejected_tokens"]) if row.get("rejected_tokens") else None,
                )
            except (ValueError, KeyError) as err:
                raise InputDataError(f"{path}:{lineno}: {err}") from err
            _check_record(rec)
            records.append(rec)
    return records


def write_trajectory_csv(path, points: Sequence[TrajectoryPoint]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["checkpoint_id", "tokens_seen", "mean_chosen_loss", "mean_rejected_loss", "delta", "n_examples"]
        )
        for p in points:
            writer.writerow(
                [p.checkpoint_id, p.tokens_seen, repr(p.mean_chosen_loss), repr(p.mean_rejected_loss), repr(p.delta), p.n_examples]
            )


def delta_summary(records: Sequence[LossRecord], weighting: str = "example") -> Dict:
    points = trajectory(records, weighting)
    return {
        "n_records": len(records),
        "n_checkpoints": len(points),
        "delta_loss": delta_loss(records),
        "by_checkpoint": {p.checkpoint_id: p.delta for p in points},
    }


def write_delta_summary(path, records: Sequence[LossRecord], weighting: str = "example") -> None:
    Path(path).write_text(
        json.dumps(delta_summary(records, weighting), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def read_logprobs_jsonl(path) -> List[SequenceLogProb]:
    """Parse {"example_id", "mean_token_logprob", "token_count", ...} rows."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            rows.append(
                SequenceLogProb(
                    example_id=str(obj["example_id"]),
                    mean_token_logprob=float(obj["mean_token_logprob"]),
                    token_count=int(obj["token_count"]),
                    reference_mean_token_logprob=(
                        float(obj["reference_mean_token_logprob"])
                        if obj.get("reference_mean_token_logprob") is not None
                        else None
                    ),
                )
            )
        except (json.JSONDecodeError, KeyError, ValueError, TypeError) as err:
            raise InputDataError(f"{path}:{lineno}: {err}") from err
    return rows


def synthesize_loss_log(
    n_checkpoints: int, n_examples: int, seed: int = 0, gap: float = 0.5
) -> List[LossRecord]:
    """Small deterministic loss log for tests and demos.

    Chosen loss decays across checkpoints with per-example jitter; rejected
    loss tracks it `gap` nats higher, mimicking exported training logs.
    """
    rng = SplitMix64(seed)
    records = []
    for ck in range(n_checkpoints):
        tokens_seen = (ck + 1) * 1_000_000
        base = 4.0 * (0.8 ** ck) + 0.5
        for ex in range(n_examples):
            jitter = (rng.next() % 1000) / 10000.0  # [0, 0.1)
            chosen = base + jitter
            records.append(
                LossRecord(
                    checkpoint_id=f"ck{ck:03d}",
                    tokens_seen=tokens_seen,
                    example_id=f"ex{ex:04d}",
                    chosen_loss=chosen,
                    rejected_loss=chosen + gap,
                    chosen_tokens=32 + (ex % 7),
                    rejected_tokens=32 + (ex % 5),
                )
            )
    return records
