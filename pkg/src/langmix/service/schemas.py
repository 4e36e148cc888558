"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from typing import List, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class ScoreTextRequest(BaseModel):
    text: str
    threshold: str = Field("0.9", description="sentence indicator threshold, decimal string")


class ScoreTextResponse(BaseModel):
    wpr: float
    lpr: float
    wpr_exact: str
    lpr_exact: str
    token_total: int
    target_token_total: int
    sentence_count: int


class GenerationIn(BaseModel):
    prompt_id: str
    model: str
    method: str
    temperature: float = Field(gt=0)
    repeat: int = Field(ge=1)
    text: str


class ScoreBatchRequest(BaseModel):
    responses: List[GenerationIn]
    threshold: str = "0.9"
    repeats: int = Field(3, ge=1)


class LexiconEntryIn(BaseModel):
    word: str
    lang: str
    replacement: str


class InjectRequest(BaseModel):
    text: str
    lexicon: List[LexiconEntryIn]
    seed: int = 0
    k: int = Field(8, ge=0)
    langs: List[str] = ["en", "zh"]
    row_id: str = ""


class InjectResponse(BaseModel):
    text: str
    replaced_positions: List[int]
    languages: List[str]
    insufficient_words: bool


class SequenceLogProbIn(BaseModel):
    example_id: str = ""
    mean_token_logprob: float
    token_count: int = Field(1, ge=1)
    reference_mean_token_logprob: Optional[float] = None


class OrpoRequest(BaseModel):
    chosen: SequenceLogProbIn
    rejected: SequenceLogProbIn
    beta: float = 0.1


class OrpoResponse(BaseModel):
    total: float
    sft_term: float
    or_term: float


class DpoRequest(BaseModel):
    chosen: SequenceLogProbIn
    rejected: SequenceLogProbIn
    beta: float = 0.1


class DpoResponse(BaseModel):
    loss: float


class LossRecordIn(BaseModel):
    checkpoint_id: str
    tokens_seen: int = Field(ge=0)
    example_id: str
    chosen_loss: float
    rejected_loss: float


class DeltaRequest(BaseModel):
    records: List[LossRecordIn]


class DeltaResponse(BaseModel):
    delta_loss: float
    n_records: int
