"""Token -> image-segment bank built from aligned training lines.

Every contiguous character run of an aligned line, up to a maximum token
length, is cropped from its image (spaces and punctuation included) and
stored under the run's text, height-normalized.  The line generator
samples these segments back out.
"""

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .ctc_align import Alphabet, read_annotations
from .errors import VocabularyError
from .pngio import read_gray, write_gray

DEFAULT_NORM_HEIGHT = 128
DEFAULT_SEGMENT_CAP = 500


@dataclass
class Segment:
    token: str
    image: np.ndarray  # (norm_height, w) uint8
    source_line_id: str

    @property
    def height(self):
        return self.image.shape[0]

    @property
    def width(self):
        return self.image.shape[1]


@dataclass
class SegmentBank:
    entries: dict = field(default_factory=dict)  # token -> list[Segment]
    alphabet: Alphabet = None
    norm_height: int = DEFAULT_NORM_HEIGHT

    def tokens(self):
        return self.entries.keys()

    def __contains__(self, token):
        return token in self.entries

    def count(self, token):
        return len(self.entries.get(token, ()))


def normalize_height(img, norm_height):
    """Resize to the bank height, preserving aspect ratio (width >= 1)."""
    h, w = img.shape
    if h == norm_height:
        return img
    new_w = max(1, round(w * norm_height / h))
    pil = Image.fromarray(img, mode="L").resize(
        (new_w, norm_height), Image.BILINEAR
    )
    return np.asarray(pil, dtype=np.uint8)


def build_bank(annotations_path, images_dir, max_token_len,
               norm_height=DEFAULT_NORM_HEIGHT, alphabet=None,
               segment_cap=DEFAULT_SEGMENT_CAP, seed=0):
    """Crop every token of length 1..max_token_len from the aligned lines.

    Images are looked up as ``images_dir/<line_id>.png``.  Tokens are
    capped at `segment_cap` stored segments each via reservoir sampling
    (seeded, so builds are reproducible).  When `alphabet` is None it is
    derived from the characters seen in the annotations.
    """
    images_dir = Path(images_dir)
    records = list(read_annotations(annotations_path))

    if alphabet is None:
        seen = sorted({c for r in records for c in r["transcript"]})
        alphabet = Alphabet(symbols="".join(seen))
    allowed = set(alphabet.symbols)

    bank = SegmentBank(entries={}, alphabet=alphabet, norm_height=norm_height)
    rng = np.random.default_rng(seed)
    accepted = {}  # token -> total candidates offered, for reservoir math

    for rec in records:
        line_id = rec["line_id"]
        transcript = rec["transcript"]
        try:
            img = read_gray(images_dir / f"{line_id}.png")
        except (OSError, ValueError) as exc:
            warnings.warn(f"{line_id}: unreadable image, skipped ({exc})")
            continue
        bounds = rec["boundaries"]
        if any(b["end"] > img.shape[1] for b in bounds):
            warnings.warn(f"{line_id}: boundary outside image, skipped")
            continue
        if set(transcript) - allowed:
            warnings.warn(f"{line_id}: transcript outside alphabet, skipped")
            continue
        for i in range(len(transcript)):
            for j in range(i + 1, min(i + max_token_len, len(transcript)) + 1):
                token = transcript[i:j]
                crop = img[:, bounds[i]["start"]:bounds[j - 1]["end"]]
                seg = Segment(
                    token=token,
                    image=normalize_height(crop, norm_height),
                    source_line_id=line_id,
                )
                _reservoir_add(bank.entries, accepted, token, seg,
                               segment_cap, rng)
    return bank


def _reservoir_add(entries, offered, token, seg, cap, rng):
    bucket = entries.setdefault(token, [])
    offered[token] = offered.get(token, 0) + 1
    if len(bucket) < cap:
        bucket.append(seg)
    else:
        # classic reservoir: keep each candidate with probability cap/seen
        slot = int(rng.integers(0, offered[token]))
        if slot < cap:
            bucket[slot] = seg


def sample_segment(bank, token, rng):
    """Uniformly sample a stored segment for `token`.

    Unknown tokens fall back to a greedy longest-match decomposition into
    known sub-tokens whose sampled crops are concatenated; a character
    with no segment at all raises VocabularyError.
    """
    bucket = bank.entries.get(token)
    if bucket:
        return bucket[int(rng.integers(0, len(bucket)))]

    parts = decompose(bank, token)
    imgs = []
    for part in parts:
        b = bank.entries[part]
        imgs.append(b[int(rng.integers(0, len(b)))].image)
    return Segment(
        token=token,
        image=np.hstack(imgs),
        source_line_id="composite",
    )


def decompose(bank, token):
    """Greedy longest-match split of `token` into bank keys."""
    parts = []
    i = 0
    max_len = max((len(t) for t in bank.entries), default=0)
    while i < len(token):
        for length in range(min(max_len, len(token) - i), 0, -1):
            cand = token[i:i + length]
            if cand in bank.entries:
                parts.append(cand)
                i += length
                break
        else:
            raise VocabularyError(
                f"no segment covers character {token[i]!r}",
                characters=[token[i]],
            )
    return parts


def save_bank(bank, out_dir):
    """Persist as a directory: manifest.json plus one PNG per segment."""
    out_dir = Path(out_dir)
    seg_dir = out_dir / "segments"
    seg_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "norm_height": bank.norm_height,
        "alphabet": bank.alphabet.to_json(),
        "entries": {},
    }
    counter = 0
    for token in sorted(bank.entries):
        items = []
        for seg in bank.entries[token]:
            fname = f"segments/seg_{counter:06d}.png"
            counter += 1
            write_gray(out_dir / fname, seg.image)
            items.append({"file": fname, "source": seg.source_line_id})
        manifest["entries"][token] = items
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, ensure_ascii=False, indent=1, sort_keys=True)
    return out_dir


def load_bank(bank_dir):
    bank_dir = Path(bank_dir)
    with open(bank_dir / "manifest.json", encoding="utf-8") as fh:
        manifest = json.load(fh)
    bank = SegmentBank(
        entries={},
        alphabet=Alphabet.from_json(manifest["alphabet"]),
        norm_height=int(manifest["norm_height"]),
    )
    for token, items in manifest["entries"].items():
        bank.entries[token] = [
            Segment(
                token=token,
                image=read_gray(bank_dir / item["file"]),
                source_line_id=item["source"],
            )
            for item in items
        ]
    return bank
