"""Token and sentence scanning over raw model output text.

The scanner is the substrate for the word- and line-level language metrics:
it splits text into whitespace tokens, strips surrounding punctuation,
takes a per-character script census, classifies each token against a
configurable target script, and groups tokens into sentence spans.

All functions are pure and total on Unicode input; there is no shared
mutable state, so concurrent use is safe.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Sequence, Tuple


class CharClass(Enum):
    """Character-level script census class; every code point gets exactly one."""

    HANGUL = "hangul"
    LATIN = "latin"
    HAN = "han"
    OTHER_LETTER = "other_letter"
    NON_LETTER = "non_letter"


class ScriptClass(Enum):
    """Token-level verdict against the configured target script."""

    TARGET = "target"
    OTHER = "other"
    UNCLASSIFIED = "unclassified"


# Unicode block reference: https://unicode.org/charts/
HANGUL_BLOCKS: Tuple[Tuple[int, int], ...] = (
    (0xAC00, 0xD7AF),  # Hangul Syllables
    (0x1100, 0x11FF),  # Hangul Jamo
    (0x3130, 0x318F),  # Hangul Compatibility Jamo
    (0xA960, 0xA97F),  # Hangul Jamo Extended-A
    (0xD7B0, 0xD7FF),  # Hangul Jamo Extended-B
)

LATIN_BLOCKS: Tuple[Tuple[int, int], ...] = (
    (0x0041, 0x005A),  # A-Z
    (0x0061, 0x007A),  # a-z
    (0x00C0, 0x00FF),  # Latin-1 letters (x and / signs excluded by letter check)
    (0x0100, 0x024F),  # Latin Extended-A/B
    (0x1E00, 0x1EFF),  # Latin Extended Additional
    (0x2C60, 0x2C7F),  # Latin Extended-C
    (0xA720, 0xA7FF),  # Latin Extended-D
    (0xFF21, 0xFF3A),  # fullwidth A-Z
    (0xFF41, 0xFF5A),  # fullwidth a-z
)

HAN_BLOCKS: Tuple[Tuple[int, int], ...] = (
    (0x4E00, 0x9FFF),  # CJK Unified Ideographs
    (0x3400, 0x4DBF),  # Extension A
    (0xF900, 0xFAFF),  # Compatibility Ideographs
    (0x20000, 0x2A6DF),  # Extension B
    (0x2A700, 0x2EBEF),  # Extensions C-F
    (0x30000, 0x3134F),  # Extension G
)


@dataclass(frozen=True)
class ScriptConfig:
    """Target script = the Unicode blocks whose letters count as in-language."""

    name: str
    blocks: Tuple[Tuple[int, int], ...]

    def contains(self, char: str) -> bool:
        cp = ord(char)
        return any(lo <= cp <= hi for lo, hi in self.blocks)


KOREAN = ScriptConfig("korean", HANGUL_BLOCKS)
ENGLISH = ScriptConfig("english", LATIN_BLOCKS)

#: Raw runs ending in one of these close a sentence; newlines always do.
SENTENCE_TERMINATORS = frozenset({".", "!", "?", "…", "。"})

_RUN_RE = re.compile(r"\S+")
_NEWLINE_CHARS = ("\n", "\r")


def is_letter(char: str) -> bool:
    return unicodedata.category(char).startswith("L")


def char_class(char: str) -> CharClass:
    """Census class of a single code point."""
    if not is_letter(char):
        return CharClass.NON_LETTER
    cp = ord(char)
    for lo, hi in HANGUL_BLOCKS:
        if lo <= cp <= hi:
            return CharClass.HANGUL
    for lo, hi in HAN_BLOCKS:
        if lo <= cp <= hi:
            return CharClass.HAN
    for lo, hi in LATIN_BLOCKS:
        if lo <= cp <= hi:
            return CharClass.LATIN
    return CharClass.OTHER_LETTER


@dataclass(frozen=True)
class TokenRecord:
    """One whitespace-delimited run of the source text.

    `text` is the run with leading/trailing punctuation and symbol characters
    stripped; `raw` is the untouched run. Offsets index into the source
    string: [start, end) covers `raw`, [core_start, core_end) covers `text`.
    A token is valid iff it contains at least one letter.
    """

    text: str
    raw: str
    start: int
    end: int
    core_start: int
    core_end: int
    valid: bool
    script: ScriptClass
    char_counts: Dict[CharClass, int]


@dataclass(frozen=True)
class SentenceSpan:
    """Contiguous token range forming one sentence; spans partition the tokens."""

    text: str
    token_indices: range


def _strippable(char: str) -> bool:
    return unicodedata.category(char)[0] in ("P", "S")


def _classify_text(text: str, target: ScriptConfig) -> ScriptClass:
    letters = [c for c in text if is_letter(c)]
    if not letters:
        return ScriptClass.UNCLASSIFIED
    in_target = sum(1 for c in letters if target.contains(c))
    # Strict majority; a 50/50 split counts as foreign.
    if 2 * in_target > len(letters):
        return ScriptClass.TARGET
    return ScriptClass.OTHER


def classify_token(token: TokenRecord, target: ScriptConfig = KOREAN) -> ScriptClass:
    """Re-derive the token's script class for an arbitrary target script."""
    return _classify_text(token.text, target)


def tokenize(text: str, target: ScriptConfig = KOREAN) -> List[TokenRecord]:
    """Split text into classified tokens.

    Tokens are maximal runs of non-whitespace in source order. Leading and
    trailing punctuation/symbol characters are stripped before the census;
    runs that strip to nothing stay in the list as invalid tokens so that
    sentence spans keep covering every run.
    """
    records = []
    for match in _RUN_RE.finditer(text):
        raw = match.group()
        start, end = match.span()
        i, j = 0, len(raw)
        while i < j and _strippable(raw[i]):
            i += 1
        while j > i and _strippable(raw[j - 1]):
            j -= 1
        core = raw[i:j]
        counts: Dict[CharClass, int] = {}
        for c in core:
            cls = char_class(c)
            counts[cls] = counts.get(cls, 0) + 1
        letter_total = sum(n for cls, n in counts.items() if cls is not CharClass.NON_LETTER)
        records.append(
            TokenRecord(
                text=core,
                raw=raw,
                start=start,
                end=end,
                core_start=start + i,
                core_end=start + j,
                valid=letter_total > 0,
                script=_classify_text(core, target),
                char_counts=counts,
            )
        )
    return records


def segment_sentences(text: str, tokens: Sequence[TokenRecord]) -> List[SentenceSpan]:
    """Group tokens into sentence spans.

    A boundary falls after any token whose raw run ends with a sentence
    terminator, and wherever the whitespace between two runs contains a
    newline. Whatever remains at the end forms a final unterminated span.
    """
    spans: List[SentenceSpan] = []
    if not tokens:
        return spans
    first = 0
    last_idx = len(tokens) - 1
    for idx, tok in enumerate(tokens):
        boundary = bool(tok.raw) and tok.raw[-1] in SENTENCE_TERMINATORS
        if idx < last_idx:
            gap = text[tok.end : tokens[idx + 1].start]
            boundary = boundary or any(nl in gap for nl in _NEWLINE_CHARS)
        if boundary or idx == last_idx:
            spans.append(
                SentenceSpan(
                    text=text[tokens[first].start : tok.end],
                    token_indices=range(first, idx + 1),
                )
            )
            first = idx + 1
    return spans


def scan(text: str, target: ScriptConfig = KOREAN) -> Tuple[List[TokenRecord], List[SentenceSpan]]:
    """Tokenize and segment in one call."""
    tokens = tokenize(text, target)
    return tokens, segment_sentences(text, tokens)
