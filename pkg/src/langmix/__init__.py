"""langmix: language-confusion metrics, dataset forging, and loss diagnostics."""

__version__ = "0.1.0"

from .metrics import (  # noqa: F401
    CorpusScore,
    ScoredResponse,
    aggregate,
    corpus_wpr,
    response_lpr,
    response_wpr,
    score_text,
    threshold_ratio,
)
from .textscan import (  # noqa: F401
    KOREAN,
    CharClass,
    ScriptClass,
    ScriptConfig,
    SentenceSpan,
    TokenRecord,
    classify_token,
    segment_sentences,
    tokenize,
)
