"""Independent brute-force re-implementations used to cross-check the package.

Everything here is written from the documented rules with plain character
loops and integer arithmetic, deliberately sharing no code with langmix.
"""

import unicodedata
from fractions import Fraction

HANGUL_RANGES = (
    (0xAC00, 0xD7AF),
    (0x1100, 0x11FF),
    (0x3130, 0x318F),
    (0xA960, 0xA97F),
    (0xD7B0, 0xD7FF),
)

TERMINATORS = ".!?…。"


def _is_letter(ch):
    return unicodedata.category(ch).startswith("L")


def _is_hangul(ch):
    cp = ord(ch)
    for lo, hi in HANGUL_RANGES:
        if lo <= cp <= hi:
            return True
    return False


def _is_punct_or_symbol(ch):
    return unicodedata.category(ch)[0] in "PS"


def token_stats(run):
    """(valid, target) flags of one whitespace run, recomputed from scratch."""
    i, j = 0, len(run)
    while i < j and _is_punct_or_symbol(run[i]):
        i += 1
    while j > i and _is_punct_or_symbol(run[j - 1]):
        j -= 1
    letters = 0
    hangul = 0
    for ch in run[i:j]:
        if _is_letter(ch):
            letters += 1
            if _is_hangul(ch):
                hangul += 1
    valid = letters > 0
    return valid, valid and 2 * hangul > letters


def scan_sentences(text):
    """Sentences as lists of whitespace runs, via a manual character walk."""
    sentences = []
    current = []
    i = 0
    n = len(text)
    while i < n:
        if not text[i].isspace():
            j = i
            while j < n and not text[j].isspace():
                j += 1
            current.append(text[i:j])
            if text[j - 1] in TERMINATORS:
                sentences.append(current)
                current = []
            i = j
        else:
            if text[i] in "\n\r" and current:
                sentences.append(current)
                current = []
            i += 1
    if current:
        sentences.append(current)
    return sentences


def wpr_lpr(text, tau=Fraction(9, 10)):
    """(wpr, lpr) as exact rationals, or None where no valid token exists."""
    total_valid = 0
    total_target = 0
    lpr_pass = 0
    lpr_den = 0
    for runs in scan_sentences(text):
        s_valid = 0
        s_target = 0
        for run in runs:
            valid, target = token_stats(run)
            if valid:
                s_valid += 1
                if target:
                    s_target += 1
        total_valid += s_valid
        total_target += s_target
        if s_valid:
            lpr_den += 1
            if Fraction(s_target, s_valid) >= tau:
                lpr_pass += 1
    wpr = Fraction(total_target, total_valid) if total_valid else None
    lpr = Fraction(lpr_pass, lpr_den) if lpr_den else None
    return wpr, lpr


_MASK = (1 << 64) - 1


def splitmix64_step(state):
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


def fnv1a64(text):
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & _MASK
    return h


def injection_plan(eligible_positions, seed, row_id, need, n_langs=2):
    """Expected (positions, language bit per position) for the pinned RNG procedure."""
    state = (seed & _MASK) ^ fnv1a64(row_id)
    arr = list(eligible_positions)
    for i in range(len(arr) - 1, 0, -1):
        state, out = splitmix64_step(state)
        j = out % (i + 1)
        arr[i], arr[j] = arr[j], arr[i]
    selected = sorted(arr[:need])
    lang_bits = []
    for _ in selected:
        if n_langs == 2:
            state, out = splitmix64_step(state)
            lang_bits.append(out & 1)
        else:
            lang_bits.append(0)
    return selected, lang_bits
