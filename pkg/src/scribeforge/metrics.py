"""Recognition quality metrics: CER, WER, string accuracy, relative train time.

Comparison is case-sensitive by default; a lowercase switch exists only
to reproduce evaluation protocols that fold case.
"""

import math
from dataclasses import dataclass


def edit_distance(a, b):
    """Levenshtein distance with unit costs, over any two sequences."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(
                prev[j] + 1,          # deletion
                cur[j - 1] + 1,       # insertion
                prev[j - 1] + (ca != cb),  # substitution
            ))
        prev = cur
    return prev[-1]


def cer(pred, truth):
    """Character error rate: edit distance / len(truth)."""
    if not truth:
        raise ValueError("truth must be non-empty")
    return edit_distance(pred, truth) / len(truth)


def wer(pred, truth):
    """Word error rate over whitespace-separated tokens."""
    truth_words = truth.split()
    if not truth_words:
        raise ValueError("truth must contain at least one word")
    return edit_distance(pred.split(), truth_words) / len(truth_words)


def string_acc(pairs):
    """Exact-match percentage over (pred, truth) pairs."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("need at least one pair")
    hits = sum(1 for p, t in pairs if p == t)
    return 100.0 * hits / len(pairs)


def t_arb(t_ms, t_min_ms=33.6):
    """Train time in arbitrary units: log2(t / t_min)."""
    if t_min_ms <= 0:
        raise ValueError("t_min_ms must be positive")
    if t_ms < t_min_ms:
        raise ValueError(f"t_ms={t_ms} below the floor {t_min_ms}")
    return math.log2(t_ms / t_min_ms)


@dataclass
class EvalReport:
    cer: float  # percent
    wer: float  # percent
    acc: float  # percent
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("report needs at least one pair")
        if not (0.0 <= self.acc <= 100.0 and self.cer >= 0 and self.wer >= 0):
            raise ValueError("metric values out of range")

    def to_json(self):
        return {"cer": self.cer, "wer": self.wer, "acc": self.acc, "n": self.n}


def evaluate(pairs, lowercase=False):
    """Corpus-level report: error sums normalized by total truth length."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("need at least one pair")
    if lowercase:
        pairs = [(p.lower(), t.lower()) for p, t in pairs]
    char_errs = char_total = word_errs = word_total = 0
    for p, t in pairs:
        if not t.split():
            raise ValueError("truth lines must be non-empty")
        char_errs += edit_distance(p, t)
        char_total += len(t)
        word_errs += edit_distance(p.split(), t.split())
        word_total += len(t.split())
    return EvalReport(
        cer=100.0 * char_errs / char_total,
        wer=100.0 * word_errs / word_total,
        acc=string_acc(pairs),
        n=len(pairs),
    )
