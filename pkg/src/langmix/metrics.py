"""Word- and line-level language precision metrics.

WPR is the fraction of valid tokens written in the target script, pooled
over the whole token set when computed corpus-wide. LPR is the fraction of
sentences whose valid tokens are at least 90% target-script. Both are kept
as exact rationals end to end; floats only appear when a caller asks for
them, and the reporting layer renders to 4 decimal places.

Threshold conventions, applied literally from where each appears:
the per-sentence indicator is inclusive (fraction >= tau), while the
reported "> threshold" response ratios are strict.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import EmptyInput, NoValidTokens, ShapeMismatch
from .textscan import KOREAN, ScriptClass, ScriptConfig, SentenceSpan, TokenRecord, scan

#: Default sentence indicator / reporting threshold.
DEFAULT_TAU = Fraction(9, 10)


def exact(value) -> Fraction:
    """Coerce to Fraction, reading floats by their decimal repr (0.9 -> 9/10)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float) or isinstance(value, str):
        return Fraction(str(value))
    raise TypeError(f"cannot convert {type(value).__name__} to Fraction")


def _counts(tokens: Iterable[TokenRecord]) -> Tuple[int, int]:
    valid = 0
    target = 0
    for tok in tokens:
        if tok.valid:
            valid += 1
            if tok.script is ScriptClass.TARGET:
                target += 1
    return target, valid


def response_wpr(tokens: Sequence[TokenRecord]) -> Fraction:
    """Target-script fraction of this response's valid tokens."""
    target, valid = _counts(tokens)
    if valid == 0:
        raise NoValidTokens("response has no valid tokens")
    return Fraction(target, valid)


def corpus_wpr(responses: Sequence[Sequence[TokenRecord]]) -> Fraction:
    """Pooled target fraction over the union of all responses' valid tokens.

    This is not the mean of per-response ratios: responses with more valid
    tokens weigh more.
    """
    target_total = 0
    valid_total = 0
    for tokens in responses:
        target, valid = _counts(tokens)
        target_total += target
        valid_total += valid
    if valid_total == 0:
        raise NoValidTokens("no response has a valid token")
    return Fraction(target_total, valid_total)


def response_lpr(
    spans: Sequence[SentenceSpan],
    tokens: Sequence[TokenRecord],
    tau: Fraction = DEFAULT_TAU,
) -> Fraction:
    """Fraction of sentences whose valid tokens are >= tau target-script.

    Sentences without any valid token (punctuation-only lines and the like)
    are skipped and do not count toward the denominator.
    """
    tau = exact(tau)
    if not Fraction(0) < tau <= 1:
        raise ValueError("tau must be in (0, 1]")
    passed = 0
    scored = 0
    for span in spans:
        target, valid = _counts(tokens[span.token_indices.start : span.token_indices.stop])
        if valid == 0:
            continue
        scored += 1
        if Fraction(target, valid) >= tau:
            passed += 1
    if scored == 0:
        raise NoValidTokens("every sentence lacks valid tokens")
    return Fraction(passed, scored)


def threshold_ratio(scores: Sequence, threshold=Fraction(9, 10)) -> Fraction:
    """Fraction of scores strictly greater than the threshold."""
    if not scores:
        raise EmptyInput("threshold_ratio over empty scores")
    thr = exact(threshold)
    over = sum(1 for s in scores if exact(s) > thr)
    return Fraction(over, len(scores))


@dataclass(frozen=True)
class ScoredResponse:
    """Per-response metric view: token tallies plus WPR/LPR as rationals."""

    response_id: str
    token_total: int
    target_token_total: int
    wpr: Fraction
    lpr: Fraction
    sentence_count: int
    prompt_id: Optional[str] = None
    repeat: Optional[int] = None


def score_text(
    text: str,
    response_id: str = "",
    prompt_id: Optional[str] = None,
    repeat: Optional[int] = None,
    target: ScriptConfig = KOREAN,
    tau: Fraction = DEFAULT_TAU,
) -> ScoredResponse:
    """Scan and score one response; raises NoValidTokens on letterless text."""
    tokens, spans = scan(text, target)
    target_count, valid_count = _counts(tokens)
    if valid_count == 0:
        raise NoValidTokens(f"response {response_id!r} has no valid tokens")
    return ScoredResponse(
        response_id=response_id,
        token_total=valid_count,
        target_token_total=target_count,
        wpr=Fraction(target_count, valid_count),
        lpr=response_lpr(spans, tokens, tau),
        sentence_count=_scored_sentences(spans, tokens),
        prompt_id=prompt_id,
        repeat=repeat,
    )


def _scored_sentences(spans: Sequence[SentenceSpan], tokens: Sequence[TokenRecord]) -> int:
    return sum(
        1
        for span in spans
        if _counts(tokens[span.token_indices.start : span.token_indices.stop])[1] > 0
    )


@dataclass(frozen=True)
class CorpusScore:
    """Aggregate statistics for one response group, mirroring a report column."""

    n_responses: int
    mean_wpr: Fraction
    mean_lpr: Fraction
    wpr_over_threshold_ratio: Fraction
    lpr_over_threshold_ratio: Fraction
    threshold: Fraction


def aggregate(
    scored: Sequence[ScoredResponse],
    repeats_per_prompt: int,
    threshold=Fraction(9, 10),
    partial_prompts_ok: bool = False,
) -> CorpusScore:
    """Average scores per prompt across repeats, then across prompts.

    Threshold ratios are computed over all individual responses. With
    `partial_prompts_ok` a prompt may carry fewer than `repeats_per_prompt`
    responses (the caller has accounted for the gap, e.g. excluded rows);
    otherwise an incomplete or duplicated prompt raises ShapeMismatch.
    """
    if not scored:
        raise EmptyInput("aggregate over empty response list")
    if repeats_per_prompt < 1:
        raise ValueError("repeats_per_prompt must be >= 1")
    thr = exact(threshold)

    groups: Dict[str, List[ScoredResponse]] = {}
    for idx, resp in enumerate(scored):
        if resp.prompt_id is None:
            if repeats_per_prompt > 1:
                raise ShapeMismatch(f"response {resp.response_id!r} lacks a prompt_id")
            key = f"__row{idx}"
        else:
            key = resp.prompt_id
        groups.setdefault(key, []).append(resp)

    for prompt_id, members in groups.items():
        repeats = [m.repeat for m in members if m.repeat is not None]
        if len(set(repeats)) != len(repeats):
            raise ShapeMismatch(f"prompt {prompt_id!r} has duplicate repeat indices")
        if len(members) > repeats_per_prompt:
            raise ShapeMismatch(
                f"prompt {prompt_id!r} has {len(members)} responses, expected {repeats_per_prompt}"
            )
        if len(members) < repeats_per_prompt and not partial_prompts_ok:
            raise ShapeMismatch(
                f"prompt {prompt_id!r} has {len(members)} responses, expected {repeats_per_prompt}"
            )

    def prompt_mean(values: List[Fraction]) -> Fraction:
        return sum(values, Fraction(0)) / len(values)

    wpr_means = [prompt_mean([m.wpr for m in g]) for g in groups.values()]
    lpr_means = [prompt_mean([m.lpr for m in g]) for g in groups.values()]

    return CorpusScore(
        n_responses=len(scored),
        mean_wpr=prompt_mean(wpr_means),
        mean_lpr=prompt_mean(lpr_means),
        wpr_over_threshold_ratio=threshold_ratio([r.wpr for r in scored], thr),
        lpr_over_threshold_ratio=threshold_ratio([r.lpr for r in scored], thr),
        threshold=thr,
    )
