"""Character boundary extraction by forced alignment of a CTC output matrix.

The training network's per-timestep softmax rows carry where each
character sits: the maximum-probability path through the transcript's
extended label sequence (blank, c1, blank, c2, ..., blank) assigns every
timestep to a character or to blank, and a timestep maps to a pixel
column span of width W/N.  A character covering k timesteps therefore
spans k*W/N pixels.

Scores are base-2 log-probabilities.  Zero-probability cells are floored
at ``LOG_FLOOR`` rather than -inf so that a path through a zero cell
stays comparable; internally the kernels carry (floored-cell count,
finite sum) pairs so the huge floor can never absorb finite score
differences, and the reported score is count * LOG_FLOOR + sum.
"""

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._backend import viterbi_fill
from ._viterbi_py import pair_better
from .errors import (
    AlignmentInfeasibleError,
    ProbMatrixFormatError,
    VocabularyError,
)

LOG_FLOOR = -1e30
NEG_INF_SCORE = float("-inf")

_MAGIC = b"CTCP"
_VERSION = 1


@dataclass(frozen=True)
class Alphabet:
    """Character classes of the network output layer, plus the blank."""

    symbols: str
    blank_index: int = 0

    def __post_init__(self):
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("alphabet symbols must be distinct")
        if not 0 <= self.blank_index <= len(self.symbols):
            raise ValueError("blank_index outside the dense class range")

    @property
    def num_classes(self):
        return len(self.symbols) + 1

    def class_of(self, char):
        """Matrix column of `char`; symbols skip over the blank column."""
        try:
            i = self.symbols.index(char)
        except ValueError:
            raise VocabularyError(
                f"character {char!r} not in alphabet", characters=[char]
            ) from None
        return i if i < self.blank_index else i + 1

    def encode(self, text):
        return [self.class_of(c) for c in text]

    def to_json(self):
        return {"symbols": self.symbols, "blank_index": self.blank_index}

    @classmethod
    def from_json(cls, obj):
        symbols = obj["symbols"]
        if isinstance(symbols, list):
            symbols = "".join(symbols)
        return cls(symbols=symbols, blank_index=int(obj.get("blank_index", 0)))

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


@dataclass
class ProbMatrix:
    """Per-timestep class probabilities for one line image of width W."""

    rows: np.ndarray  # (N, C) float
    source_width: int

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise ProbMatrixFormatError("rows must be a non-empty (N, C) matrix")
        if np.any(rows < 0):
            raise ProbMatrixFormatError("probabilities must be >= 0")
        sums = rows.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-4):
            t = int(np.argmax(np.abs(sums - 1.0)))
            raise ProbMatrixFormatError(
                f"row {t} sums to {sums[t]:.6f}, expected 1 within 1e-4"
            )
        if self.source_width < 1:
            raise ProbMatrixFormatError("source_width must be >= 1")
        self.rows = rows

    @property
    def timesteps(self):
        return self.rows.shape[0]

    @property
    def classes(self):
        return self.rows.shape[1]


def write_prob_matrix(path, pm):
    """Serialize: magic, version u16, N u32, C u32, W u32, N*C little-endian f32."""
    n, c = pm.rows.shape
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<HIII", _VERSION, n, c, pm.source_width))
        fh.write(pm.rows.astype("<f4").tobytes(order="C"))


def read_prob_matrix(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != _MAGIC:
        raise ProbMatrixFormatError(f"{path}: bad magic, not a probability matrix")
    if len(blob) < 18:
        raise ProbMatrixFormatError(f"{path}: truncated header")
    version, n, c, w = struct.unpack_from("<HIII", blob, 4)
    if version != _VERSION:
        raise ProbMatrixFormatError(f"{path}: unsupported version {version}")
    expected = 18 + 4 * n * c
    if len(blob) != expected:
        raise ProbMatrixFormatError(
            f"{path}: expected {expected} bytes, found {len(blob)}"
        )
    rows = np.frombuffer(blob, dtype="<f4", offset=18).reshape(n, c)
    return ProbMatrix(rows=rows, source_width=w)


@dataclass(frozen=True)
class CharBoundary:
    """Half-open pixel span of one aligned character."""

    char: str
    start_px: int
    end_px: int
    k: int  # timesteps assigned


@dataclass
class Alignment:
    path: np.ndarray  # (N,) state index into the extended sequence
    score: float  # base-2 log-probability of the path
    boundaries: list = field(default_factory=list)


def extended_sequence(labels):
    """blank, c1, blank, c2, ..., blank as class indices; plus skip legality."""
    s = 2 * len(labels) + 1
    skip = np.zeros(s, dtype=np.uint8)
    for i in range(3, s, 2):
        # advance-by-2 lands on a char state; legal unless it repeats the
        # previous char (which must keep its separating blank)
        if labels[(i - 1) // 2] != labels[(i - 3) // 2]:
            skip[i] = 1
    return s, skip


def min_timesteps(labels):
    """Shortest CTC path length: one step per char plus repeat separators."""
    repeats = sum(1 for a, b in zip(labels, labels[1:]) if a == b)
    return len(labels) + repeats


def forced_align(probs, transcript, alphabet):
    """Maximum-probability legal CTC path emitting `transcript`.

    Ties are broken deterministically: prefer staying in the current
    state, then advancing by 1, then by 2 (equivalently, the returned
    path is the last-coordinate-lexicographically greatest optimum).
    Raises VocabularyError for unknown characters and
    AlignmentInfeasibleError when the transcript cannot fit in N steps.
    """
    labels = alphabet.encode(transcript)
    if probs.classes != alphabet.num_classes:
        raise ProbMatrixFormatError(
            f"matrix has {probs.classes} classes, alphabet defines "
            f"{alphabet.num_classes}"
        )
    n = probs.timesteps
    need = min_timesteps(labels)
    if n < need:
        raise AlignmentInfeasibleError(
            f"transcript needs >= {need} timesteps, matrix has {n}"
        )

    s, skip = extended_sequence(labels)
    state_class = np.empty(s, dtype=np.intp)
    state_class[0::2] = alphabet.blank_index
    state_class[1::2] = labels

    nonzero = probs.rows > 0.0
    logp_all = np.zeros(probs.rows.shape)
    np.log2(probs.rows, out=logp_all, where=nonzero)
    val = np.ascontiguousarray(logp_all[:, state_class])
    floored = np.ascontiguousarray((~nonzero[:, state_class]).astype(np.uint8))

    bp = np.empty((n, s), dtype=np.int8)
    cnt, fin = viterbi_fill(val, floored, skip, bp)

    # legal end states: last blank (preferred on ties) or last char
    end = s - 1
    if s >= 2 and pair_better(cnt[s - 2], fin[s - 2], cnt[end], fin[end]):
        end = s - 2
    if fin[end] == NEG_INF_SCORE:
        raise AlignmentInfeasibleError("no legal path through the matrix")
    score = float(cnt[end]) * LOG_FLOOR + float(fin[end])

    path = np.empty(n, dtype=np.int32)
    state = end
    for t in range(n - 1, -1, -1):
        path[t] = state
        state -= bp[t, state]

    align = Alignment(path=path, score=score)
    align.boundaries = boundaries_from_path(align, probs, transcript)
    return align


def boundaries_from_path(align, probs, transcript):
    """Map per-timestep states to half-open pixel spans per character.

    A character on timesteps [t_first, t_last] spans
    [floor(t_first*W/N), ceil((t_last+1)*W/N)); outward rounding keeps
    crops from clipping ink.  Adjacent spans may meet after rounding, so
    each start is clamped to the previous end to keep spans disjoint.
    """
    w = probs.source_width
    n = probs.timesteps
    path = align.path
    boundaries = []
    prev_end = 0
    for u, char in enumerate(transcript):
        state = 2 * u + 1
        ts = np.nonzero(path == state)[0]
        t_first = int(ts[0])
        t_last = int(ts[-1])
        start = (t_first * w) // n
        end = -((-(t_last + 1) * w) // n)  # ceil division
        start = max(start, prev_end)
        if end <= start:
            end = start + 1
        if end > w:
            raise AlignmentInfeasibleError(
                f"image width {w} too small for {len(transcript)} character spans"
            )
        prev_end = end
        boundaries.append(
            CharBoundary(char=char, start_px=start, end_px=end, k=t_last - t_first + 1)
        )
    return boundaries


def _align_one(task):
    """Align one manifest row; returns ("ok", record) or ("fail", info)."""
    line_id, transcript, probs_path, alphabet = task
    try:
        pm = read_prob_matrix(probs_path)
        align = forced_align(pm, transcript, alphabet)
    except (OSError, ProbMatrixFormatError, VocabularyError,
            AlignmentInfeasibleError) as exc:
        return "fail", {"line_id": line_id, "reason": str(exc)}
    return "ok", {
        "line_id": line_id,
        "transcript": transcript,
        "boundaries": [
            {"char": b.char, "start": b.start_px, "end": b.end_px, "k": b.k}
            for b in align.boundaries
        ],
        "score": align.score,
    }


def align_dataset(manifest_path, probs_dir, out_path, alphabet, jobs=1):
    """Align every manifest line against its probability-matrix file.

    Manifest rows are ``line_id<TAB>image_path<TAB>transcript``; the
    matrix for a line lives at ``probs_dir/<line_id>.ctcp``.  Successful
    alignments are written as JSON records in manifest order; failures
    are collected with reasons and the batch continues.  Lines are
    independent, so jobs > 1 fans them over a process pool without
    changing the output.
    """
    probs_dir = Path(probs_dir)
    tasks = []
    failures = []
    with open(manifest_path, encoding="utf-8") as mf:
        for raw in mf:
            raw = raw.rstrip("\n")
            if not raw:
                continue
            try:
                line_id, _image_path, transcript = raw.split("\t", 2)
            except ValueError:
                failures.append(
                    {"line_id": raw[:40], "reason": "malformed manifest row"}
                )
                continue
            tasks.append((line_id, transcript,
                          probs_dir / f"{line_id}.ctcp", alphabet))

    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_align_one, tasks))
    else:
        results = [_align_one(t) for t in tasks]

    records = 0
    with open(out_path, "w", encoding="utf-8") as out:
        for status, payload in results:
            if status == "ok":
                out.write(json.dumps(payload, ensure_ascii=False) + "\n")
                records += 1
            else:
                failures.append(payload)
    return {"aligned": records, "failed": len(failures), "failures": failures}


def read_annotations(path):
    """Yield boundary records from an annotations file."""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)
