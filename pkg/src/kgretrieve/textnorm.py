"""Claim and relation-name normalisation for contextual retrieval.

Claims are cut into alphanumeric runs, case-folded, ASCII-folded where
possible and reduced with the Porter (1980) stemmer. Relation identifiers
such as ``birthPlace`` or ``~foundedBy`` are split into their word parts
first and pass through the same reduction, so ``located`` in a claim and
the relation ``location`` both land on ``locat``.
"""

from __future__ import annotations

import re
import unicodedata
from functools import lru_cache

__all__ = [
    "TokenStemSet",
    "split_relation_name",
    "stem",
    "normalize_token",
    "claim_token_set",
    "relation_stems",
    "relation_matches_claim",
]

TokenStemSet = frozenset  # frozenset[str]; every member non-empty, no whitespace


# ---------------------------------------------------------------------------
# Porter stemmer, original 1980 rule set
# ---------------------------------------------------------------------------

_VOWELS = frozenset("aeiou")


def _is_cons(w: str, i: int) -> bool:
    c = w[i]
    if c in _VOWELS:
        return False
    if c == "y":
        return i == 0 or not _is_cons(w, i - 1)
    return True


def _measure(stem_: str) -> int:
    """Number of VC sequences in ``[C](VC){m}[V]``."""
    m = 0
    prev_vowel = False
    for i in range(len(stem_)):
        cons = _is_cons(stem_, i)
        if cons and prev_vowel:
            m += 1
        prev_vowel = not cons
    return m


def _has_vowel(stem_: str) -> bool:
    return any(not _is_cons(stem_, i) for i in range(len(stem_)))


def _ends_double_cons(w: str) -> bool:
    return len(w) >= 2 and w[-1] == w[-2] and _is_cons(w, len(w) - 1)


def _ends_cvc(w: str) -> bool:
    if len(w) < 3:
        return False
    n = len(w)
    return (
        _is_cons(w, n - 3)
        and not _is_cons(w, n - 2)
        and _is_cons(w, n - 1)
        and w[-1] not in "wxy"
    )


def _apply_rules(word: str, rules, min_measure: int) -> str:
    # only the longest matching suffix is considered, per the reference algorithm
    for suffix, repl in rules:
        if word.endswith(suffix):
            base = word[: len(word) - len(suffix)]
            if _measure(base) > min_measure:
                return base + repl
            return word
    return word


_STEP2 = sorted(
    [
        ("ational", "ate"),
        ("tional", "tion"),
        ("enci", "ence"),
        ("anci", "ance"),
        ("izer", "ize"),
        ("abli", "able"),
        ("alli", "al"),
        ("entli", "ent"),
        ("eli", "e"),
        ("ousli", "ous"),
        ("ization", "ize"),
        ("ation", "ate"),
        ("ator", "ate"),
        ("alism", "al"),
        ("iveness", "ive"),
        ("fulness", "ful"),
        ("ousness", "ous"),
        ("aliti", "al"),
        ("iviti", "ive"),
        ("biliti", "ble"),
    ],
    key=lambda r: -len(r[0]),
)

_STEP3 = sorted(
    [
        ("icate", "ic"),
        ("ative", ""),
        ("alize", "al"),
        ("iciti", "ic"),
        ("ical", "ic"),
        ("ful", ""),
        ("ness", ""),
    ],
    key=lambda r: -len(r[0]),
)

_STEP4 = sorted(
    [
        "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
        "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
    ],
    key=len,
    reverse=True,
)


def _step1a(w: str) -> str:
    if w.endswith("sses"):
        return w[:-2]
    if w.endswith("ies"):
        return w[:-2]
    if w.endswith("ss"):
        return w
    if w.endswith("s"):
        return w[:-1]
    return w


def _step1b(w: str) -> str:
    if w.endswith("eed"):
        return w[:-1] if _measure(w[:-3]) > 0 else w
    for suffix in ("ed", "ing"):
        if w.endswith(suffix):
            base = w[: -len(suffix)]
            if not _has_vowel(base):
                return w
            return _step1b_tidy(base)
    return w


def _step1b_tidy(w: str) -> str:
    if w.endswith(("at", "bl", "iz")):
        return w + "e"
    if _ends_double_cons(w) and w[-1] not in "lsz":
        return w[:-1]
    if _measure(w) == 1 and _ends_cvc(w):
        return w + "e"
    return w


def _step1c(w: str) -> str:
    if w.endswith("y") and _has_vowel(w[:-1]):
        return w[:-1] + "i"
    return w


def _step4(w: str) -> str:
    for suffix in _STEP4:
        if w.endswith(suffix):
            base = w[: -len(suffix)]
            if suffix == "ion" and not base.endswith(("s", "t")):
                continue
            return base if _measure(base) > 1 else w
    return w


def _step5(w: str) -> str:
    if w.endswith("e"):
        base = w[:-1]
        m = _measure(base)
        if m > 1 or (m == 1 and not _ends_cvc(base)):
            w = base
    if _measure(w) > 1 and _ends_double_cons(w) and w.endswith("l"):
        w = w[:-1]
    return w


@lru_cache(maxsize=1 << 16)
def stem(token: str) -> str:
    """Porter stem of a lowercase ASCII token; other tokens are returned unchanged."""
    if len(token) <= 2 or not token.isascii() or not token.islower():
        return token
    w = _step1a(token)
    w = _step1b(w)
    w = _step1c(w)
    w = _apply_rules(w, _STEP2, 0)
    w = _apply_rules(w, _STEP3, 0)
    w = _step4(w)
    w = _step5(w)
    return w


# ---------------------------------------------------------------------------
# tokenisation
# ---------------------------------------------------------------------------


def _alnum_runs(text: str) -> list[str]:
    """Maximal alphanumeric runs; combining marks stay with the letter they follow."""
    runs = []
    cur: list[str] = []
    for c in text:
        if c.isalnum() or (cur and unicodedata.category(c)[0] == "M"):
            cur.append(c)
        elif cur:
            runs.append("".join(cur))
            cur = []
    if cur:
        runs.append("".join(cur))
    return runs


def _ascii_fold(token: str) -> str:
    decomposed = unicodedata.normalize("NFKD", token)
    return "".join(c for c in decomposed if not unicodedata.combining(c))


def normalize_token(token: str) -> str:
    """Case-fold, ASCII-fold when the result is pure ASCII, then stem."""
    t = token.casefold()
    folded = _ascii_fold(t)
    if folded.isascii():
        return stem(folded)
    return unicodedata.normalize("NFC", t)


def claim_token_set(claim: str) -> frozenset[str]:
    text = unicodedata.normalize("NFKC", claim).casefold()
    out = set()
    for tok in _alnum_runs(text):
        # folding can expose separators (e.g. compatibility forms); re-split
        out.update(_alnum_runs(normalize_token(tok)))
    return frozenset(out)


def _camel_split(run: str) -> list[str]:
    parts = []
    start = 0
    n = len(run)
    for i in range(1, n):
        a, b = run[i - 1], run[i]
        if a.islower() and b.isupper():
            cut = True
        elif a.isupper() and b.isupper() and i + 1 < n and run[i + 1].islower():
            cut = True
        else:
            cut = False
        if cut:
            parts.append(run[start:i])
            start = i
    parts.append(run[start:])
    return parts


_ALPHA_OR_DIGITS = re.compile(r"[^\W\d_]+|\d+")


def split_relation_name(relation: str) -> list[str]:
    """``"birthPlace"`` -> ``["birth", "place"]``; a leading ``~`` is ignored."""
    if relation.startswith("~"):
        relation = relation[1:]
    relation = unicodedata.normalize("NFC", relation)
    tokens = []
    for run in _ALPHA_OR_DIGITS.findall(relation):
        if run[0].isdigit():
            tokens.append(run)
        else:
            tokens.extend(p.lower() for p in _camel_split(run))
    return tokens


@lru_cache(maxsize=1 << 16)
def relation_stems(relation: str) -> frozenset[str]:
    out = set()
    for tok in split_relation_name(relation):
        out.update(_alnum_runs(normalize_token(tok)))
    return frozenset(out)


def relation_matches_claim(relation: str, claim_stems: frozenset[str]) -> bool:
    """True iff every stemmed part of ``relation`` occurs in ``claim_stems``."""
    stems = relation_stems(relation)
    return bool(stems) and stems <= claim_stems
