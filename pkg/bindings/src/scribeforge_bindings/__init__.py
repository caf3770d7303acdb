"""Training-loop adapter for the scribeforge augmentations.

Training pipelines want arrays in and arrays out, no files: this package
exposes exactly that surface.  ``bind_apply_blot`` and
``bind_stackmix_line`` are byte-identical to the core operations under
the same seed, so anything validated against the CLI holds here too.

Banks are loaded once per process by ``bank_open`` and shared read-only;
every call takes its own seed, so there is no mutable global state and
calls are safe to issue from concurrent dataloader workers.
"""

from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from scribeforge.blot import BlotParams, apply_blot
from scribeforge.segbank import load_bank
from scribeforge.stackmix import TokenizerMixture, stackmix_line

__all__ = ["ImageBuffer", "bank_open", "bind_apply_blot", "bind_stackmix_line"]


@dataclass(frozen=True)
class ImageBuffer:
    """A height x width, contiguous 8-bit grayscale buffer.

    Wraps any object supporting the buffer protocol without copying;
    ``as_array`` gives the numpy view back (zero-copy).
    """

    height: int
    width: int
    data: object

    def __post_init__(self):
        view = memoryview(self.data).cast("B")
        if self.height < 1 or self.width < 1:
            raise ValueError("height and width must be >= 1")
        if view.nbytes != self.height * self.width:
            raise ValueError(
                f"buffer holds {view.nbytes} bytes, expected "
                f"{self.height * self.width} ({self.height}x{self.width})"
            )

    @classmethod
    def from_numpy(cls, arr):
        arr = np.ascontiguousarray(arr)
        if arr.ndim != 2:
            raise ValueError(
                f"expected a single-channel 2-D image, got shape {arr.shape}"
                + (" (multi-channel input is not supported; convert to "
                   "grayscale first)" if arr.ndim == 3 else "")
            )
        if arr.dtype != np.uint8:
            raise ValueError(f"expected uint8 pixels, got {arr.dtype}")
        return cls(height=arr.shape[0], width=arr.shape[1], data=arr)

    def as_array(self):
        """Zero-copy (height, width) uint8 view of the buffer."""
        if isinstance(self.data, np.ndarray):
            return self.data.reshape(self.height, self.width)
        return np.frombuffer(self.data, dtype=np.uint8).reshape(
            self.height, self.width
        )


def _coerce_image(img):
    if isinstance(img, ImageBuffer):
        return img.as_array()
    return ImageBuffer.from_numpy(np.asarray(img)).as_array()


def _coerce_params(params):
    if isinstance(params, BlotParams):
        return params
    known = {f.name for f in fields(BlotParams)}
    unknown = set(params) - known
    if unknown:
        raise ValueError(
            f"unknown blot parameter(s) {sorted(unknown)}; "
            f"valid names: {sorted(known)}"
        )
    return BlotParams(**params)


def bind_apply_blot(img, params, seed):
    """Strike through one image; byte-identical to the core under `seed`.

    img: ImageBuffer or 2-D uint8 array.  params: mapping of BlotParams
    field names (missing fields take the defaults).  Returns a new
    ImageBuffer; the input is never mutated.
    """
    arr = _coerce_image(img)
    out = apply_blot(arr, _coerce_params(params), np.random.default_rng(seed))
    return ImageBuffer.from_numpy(out)


_BANKS = {}


def bank_open(path):
    """Load a segment bank once per process; repeated opens are free."""
    key = str(Path(path).resolve())
    if key not in _BANKS:
        _BANKS[key] = load_bank(key)
    return _BANKS[key]


def bind_stackmix_line(text, bank_path, seed, mixture=None):
    """Generate one labeled line; identical to the core under `seed`.

    Returns (ImageBuffer, transcript).  Vocabulary problems raise the
    core's VocabularyError unchanged.
    """
    bank = bank_open(bank_path) if not hasattr(bank_path, "entries") else bank_path
    mix = mixture if mixture is not None else TokenizerMixture()
    gl = stackmix_line(text, bank, mix, np.random.default_rng(seed))
    return ImageBuffer.from_numpy(gl.image), gl.transcript
