"""String canonicalization and edit-distance primitives.

Everything here is pure and deterministic; the matching kernels build on
these functions.
"""

from __future__ import annotations

__all__ = [
    "canonicalize_name",
    "canonicalize_value",
    "tokenize",
    "levenshtein",
    "lev_sim",
]


def canonicalize_name(text: str) -> str:
    """Lowercase a name, turn punctuation and underscores into spaces, collapse runs.

    Idempotent: applying it twice yields the same string.
    """
    lowered = text.lower()
    cleaned = [ch if (ch.isalnum() or ch.isspace()) else " " for ch in lowered]
    return " ".join("".join(cleaned).split())


def canonicalize_value(text: str) -> str:
    """Lowercase a cell value, trim it, and collapse internal whitespace.

    Punctuation is kept: values are compared as data, not as labels.
    """
    return " ".join(text.lower().split())


def tokenize(text: str) -> list[str]:
    """Split text into canonical word tokens."""
    return canonicalize_name(text).split()


def levenshtein(s: str, t: str, max_dist: int | None = None) -> int:
    """Edit distance between two strings (insert/delete/substitute, unit cost).

    With ``max_dist`` set, computation stays inside a diagonal band and any
    distance above the cap is reported as ``max_dist + 1``. Results at or
    below the cap are exact.
    """
    if s == t:
        return 0
    # Common prefix/suffix never contributes to the distance.
    lo = 0
    hi_s, hi_t = len(s), len(t)
    while lo < hi_s and lo < hi_t and s[lo] == t[lo]:
        lo += 1
    while hi_s > lo and hi_t > lo and s[hi_s - 1] == t[hi_t - 1]:
        hi_s -= 1
        hi_t -= 1
    s, t = s[lo:hi_s], t[lo:hi_t]
    if len(s) > len(t):
        s, t = t, s
    m, n = len(s), len(t)
    if max_dist is not None and n - m > max_dist:
        return max_dist + 1
    if m == 0:
        return n
    if max_dist is None:
        band = n
    else:
        band = max_dist
    prev = list(range(n + 1))
    cur = [0] * (n + 1)
    big = n + m  # sentinel larger than any real distance
    for i in range(1, m + 1):
        cur[0] = i
        j_lo = max(1, i - band)
        j_hi = min(n, i + band)
        if j_lo > 1:
            cur[j_lo - 1] = big
        row_min = big
        for j in range(j_lo, j_hi + 1):
            cost = 0 if s[i - 1] == t[j - 1] else 1
            val = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
            cur[j] = val
            if val < row_min:
                row_min = val
        if j_hi < n:
            cur[j_hi + 1] = big
        if max_dist is not None and row_min > max_dist:
            return max_dist + 1
        prev, cur = cur, prev
    dist = prev[n]
    if max_dist is not None and dist > max_dist:
        return max_dist + 1
    return dist


def lev_sim(s: str, t: str) -> float:
    """Normalized edit similarity: 1 - distance / max(len); 1.0 for two empties."""
    longest = max(len(s), len(t))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(s, t) / longest
