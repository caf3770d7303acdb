"""External text corpus ingestion: alphabet filtering and line-length caps."""

from collections import Counter
from dataclasses import dataclass, field

from .errors import CorpusDecodeError

DEFAULT_MAX_LINE_LEN = 120


@dataclass
class CorpusStats:
    total_lines: int = 0
    usable_lines: int = 0
    dropped_chars: Counter = field(default_factory=Counter)

    def to_json(self):
        return {
            "total_lines": self.total_lines,
            "usable_lines": self.usable_lines,
            "dropped_chars": dict(self.dropped_chars),
        }


def _split_long(line, cap):
    """Split a too-long line at spaces into chunks of at most `cap` chars.

    The delimiter space stays on the left chunk so no character is lost;
    space-free stretches are hard-split at the cap.
    """
    chunks = []
    while len(line) > cap:
        cut = line.rfind(" ", 1, cap + 1)
        if cut == -1:
            cut = cap
        else:
            cut += 1  # keep the space
        chunks.append(line[:cut])
        line = line[cut:]
    if line:
        chunks.append(line)
    return chunks


def filter_corpus(input_path, output_path, alphabet, mode="skip-line",
                  max_line_len=DEFAULT_MAX_LINE_LEN):
    """Write a copy of the corpus restricted to the alphabet.

    mode "skip-line" drops any line containing a foreign character; mode
    "drop-chars" removes just the foreign characters.  Either way the
    dropped characters are tallied.  Lines longer than `max_line_len`
    are split at spaces.  Undecodable input raises CorpusDecodeError
    with the byte offset.
    """
    if mode not in ("skip-line", "drop-chars"):
        raise ValueError(f"unknown mode {mode!r}")
    allowed = set(alphabet.symbols)
    stats = CorpusStats()

    with open(input_path, "rb") as fh:
        blob = fh.read()
    try:
        text = blob.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusDecodeError(
            f"{input_path}: invalid UTF-8 at byte {exc.start}", exc.start
        ) from None

    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()  # trailing newline

    with open(output_path, "w", encoding="utf-8") as out:
        for line in lines:
            stats.total_lines += 1
            if not line:
                out.write("\n")  # pass empty lines through unchanged
                continue
            foreign = [c for c in line if c not in allowed]
            if foreign:
                stats.dropped_chars.update(foreign)
                if mode == "skip-line":
                    continue
                line = "".join(c for c in line if c in allowed)
                if not line:
                    continue
            for chunk in _split_long(line, max_line_len):
                out.write(chunk + "\n")
                stats.usable_lines += 1
    return stats
