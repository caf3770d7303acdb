"""Synthetic labeled line generation by horizontal segment stacking.

Corpus text is tokenized greedily against the bank keys (token length
capped by a draw from the tokenizer mixture), one image segment is
sampled per token, and the crops are concatenated at the bank height
with no padding.  The transcript of the generated line is exactly the
input text.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyCorpusError, VocabularyError
from .pngio import write_gray
from .segbank import sample_segment

MIXTURE_MAX_LENS = (3, 4, 5, 6, 7, 8)
MIXTURE_PROBS = (0.05, 0.15, 0.2, 0.2, 0.2, 0.2)


@dataclass(frozen=True)
class TokenizerMixture:
    """Distribution over the maximum token length used for one line."""

    max_lens: tuple = MIXTURE_MAX_LENS
    probs: tuple = MIXTURE_PROBS

    def __post_init__(self):
        if len(self.max_lens) != len(self.probs):
            raise ValueError("max_lens and probs must have equal length")
        if abs(sum(self.probs) - 1.0) > 1e-9:
            raise ValueError("probs must sum to 1")
        if any(p < 0 for p in self.probs):
            raise ValueError("probs must be non-negative")

    def draw(self, rng):
        i = rng.choice(len(self.probs), p=np.asarray(self.probs))
        return int(self.max_lens[int(i)])

    @classmethod
    def from_json(cls, obj):
        return cls(max_lens=tuple(obj["max_lens"]), probs=tuple(obj["probs"]))


@dataclass
class GeneratedLine:
    image: np.ndarray
    transcript: str
    provenance: list = field(default_factory=list)  # (token, source_line_id)


def mwe_tokenize(text, bank, max_len):
    """Greedy longest-match of `text` against bank keys of length <= max_len.

    Joining the tokens reproduces the input exactly.  Characters with no
    matching key are emitted as single-character tokens when they are in
    the bank alphabet, and rejected otherwise.
    """
    allowed = set(bank.alphabet.symbols)
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        for length in range(min(max_len, n - i), 0, -1):
            cand = text[i:i + length]
            if cand in bank.entries:
                tokens.append(cand)
                i += length
                break
        else:
            c = text[i]
            if c not in allowed:
                raise VocabularyError(
                    f"character {c!r} not in bank alphabet", characters=[c]
                )
            tokens.append(c)
            i += 1
    return tokens


def _flatten_background(img):
    # max-normalize so the paper level is 255; softens seams when stacking
    peak = int(img.max())
    if peak in (0, 255):
        return img
    return np.rint(img.astype(np.float64) * (255.0 / peak)).astype(np.uint8)


def stackmix_line(text, bank, mix, rng):
    """Generate one labeled line image for `text`."""
    if not text:
        raise ValueError("text must be non-empty")
    max_len = mix.draw(rng)
    tokens = mwe_tokenize(text, bank, max_len)
    segments = [sample_segment(bank, tok, rng) for tok in tokens]
    image = np.hstack([_flatten_background(s.image) for s in segments])
    return GeneratedLine(
        image=image,
        transcript=text,
        provenance=[(s.token, s.source_line_id) for s in segments],
    )


def usable_corpus_lines(lines, alphabet, drop_chars=False):
    """Restrict corpus lines to the bank alphabet.

    With drop_chars, offending characters are removed; otherwise the
    whole line is skipped.  Returns (usable_lines, skipped_count).
    """
    allowed = set(alphabet.symbols)
    usable = []
    skipped = 0
    for line in lines:
        if set(line) <= allowed:
            if line:
                usable.append(line)
            else:
                skipped += 1
        elif drop_chars:
            kept = "".join(c for c in line if c in allowed)
            if kept:
                usable.append(kept)
            else:
                skipped += 1
        else:
            skipped += 1
    return usable, skipped


def generate_corpus(corpus_path, bank, mix, n_lines, out_dir, base_seed=0,
                    drop_chars=False):
    """Write `n_lines` generated images plus a TSV manifest.

    Line i uses its own random stream seeded base_seed + i, so output is
    reproducible no matter how generation is parallelized.
    """
    with open(corpus_path, encoding="utf-8") as fh:
        raw = [line.rstrip("\n") for line in fh]
    texts, skipped = usable_corpus_lines(raw, bank.alphabet, drop_chars)
    if not texts:
        raise EmptyCorpusError(
            f"no usable line in {corpus_path} after alphabet filtering"
        )

    out_dir = Path(out_dir)
    img_dir = out_dir / "images"
    img_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / "manifest.tsv"
    with open(manifest_path, "w", encoding="utf-8") as mf:
        for i in range(n_lines):
            line_id, image, transcript = generate_one(
                texts, bank, mix, base_seed, i
            )
            rel = f"images/{line_id}.png"
            write_gray(out_dir / rel, image)
            mf.write(f"{line_id}\t{rel}\t{transcript}\n")
    return {
        "manifest": str(manifest_path),
        "generated": n_lines,
        "skipped_corpus_lines": skipped,
    }


def generate_one(texts, bank, mix, base_seed, index):
    """One derived-stream generation step; shared with the parallel CLI path."""
    rng = np.random.default_rng(base_seed + index)
    text = texts[int(rng.integers(0, len(texts)))]
    gl = stackmix_line(text, bank, mix, rng)
    return f"stackmix_{index:06d}", gl.image, gl.transcript
