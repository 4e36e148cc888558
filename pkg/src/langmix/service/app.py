"""HTTP endpoints wrapping the scoring/forging/diagnostics core.

Domain errors (no valid tokens, lexicon misses, degenerate probabilities)
surface as HTTP 400 with the error message as detail; schema violations
are FastAPI's usual 422.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..diagnostics import LossRecord, SequenceLogProb, delta_loss, dpo_loss, orpo_loss
from ..errors import LangmixError
from ..forge import SubstitutionLexicon, inject_code_mix
from ..harness import GenerationRecord, score_generations
from ..metrics import exact, score_text
from ..reporting import to_json_dict
from . import schemas


def _seq(model: schemas.SequenceLogProbIn) -> SequenceLogProb:
    return SequenceLogProb(
        example_id=model.example_id,
        mean_token_logprob=model.mean_token_logprob,
        token_count=model.token_count,
        reference_mean_token_logprob=model.reference_mean_token_logprob,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="langmix", version=__version__)

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/score/text", response_model=schemas.ScoreTextResponse)
    def score_one(request: schemas.ScoreTextRequest) -> schemas.ScoreTextResponse:
        try:
            scored = score_text(request.text, tau=exact(request.threshold))
        except (LangmixError, ValueError) as err:
            raise HTTPException(status_code=400, detail=str(err))
        return schemas.ScoreTextResponse(
            wpr=float(scored.wpr),
            lpr=float(scored.lpr),
            wpr_exact=f"{scored.wpr.numerator}/{scored.wpr.denominator}",
            lpr_exact=f"{scored.lpr.numerator}/{scored.lpr.denominator}",
            token_total=scored.token_total,
            target_token_total=scored.target_token_total,
            sentence_count=scored.sentence_count,
        )

    @app.post("/score/batch")
    def score_batch(request: schemas.ScoreBatchRequest) -> dict:
        records = [
            GenerationRecord(
                prompt_id=r.prompt_id,
                model=r.model,
                method=r.method,
                temperature=r.temperature,
                repeat=r.repeat,
                text=r.text,
            )
            for r in request.responses
        ]
        try:
            report = score_generations(
                records, threshold=exact(request.threshold), repeats=request.repeats
            )
        except (LangmixError, ValueError) as err:
            raise HTTPException(status_code=400, detail=str(err))
        return to_json_dict(report)

    @app.post("/forge/inject", response_model=schemas.InjectResponse)
    def inject(request: schemas.InjectRequest) -> schemas.InjectResponse:
        try:
            lexicon = SubstitutionLexicon(
                (e.word, e.lang, e.replacement) for e in request.lexicon
            )
            result = inject_code_mix(
                request.text,
                lexicon,
                seed=request.seed,
                k=request.k,
                langs=request.langs,
                row_id=request.row_id,
            )
        except (LangmixError, ValueError) as err:
            raise HTTPException(status_code=400, detail=str(err))
        return schemas.InjectResponse(
            text=result.text,
            replaced_positions=list(result.replaced_positions),
            languages=list(result.languages),
            insufficient_words=result.insufficient_words,
        )

    @app.post("/diagnostics/orpo", response_model=schemas.OrpoResponse)
    def orpo(request: schemas.OrpoRequest) -> schemas.OrpoResponse:
        try:
            result = orpo_loss(_seq(request.chosen), _seq(request.rejected), request.beta)
        except LangmixError as err:
            raise HTTPException(status_code=400, detail=str(err))
        return schemas.OrpoResponse(
            total=result.total, sft_term=result.sft_term, or_term=result.or_term
        )

    @app.post("/diagnostics/dpo", response_model=schemas.DpoResponse)
    def dpo(request: schemas.DpoRequest) -> schemas.DpoResponse:
        try:
            loss = dpo_loss(_seq(request.chosen), _seq(request.rejected), request.beta)
        except LangmixError as err:
            raise HTTPException(status_code=400, detail=str(err))
        return schemas.DpoResponse(loss=loss)

    @app.post("/diagnostics/delta", response_model=schemas.DeltaResponse)
    def delta(request: schemas.DeltaRequest) -> schemas.DeltaResponse:
        records = [
            LossRecord(
                checkpoint_id=r.checkpoint_id,
                tokens_seen=r.tokens_seen,
                example_id=r.example_id,
                chosen_loss=r.chosen_loss,
                rejected_loss=r.rejected_loss,
            )
            for r in request.records
        ]
        try:
            value = delta_loss(records)
        except LangmixError as err:
            raise HTTPException(status_code=400, detail=str(err))
        return schemas.DeltaResponse(delta_loss=value, n_records=len(records))

    return app


app = create_app()
