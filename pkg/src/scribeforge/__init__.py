"""Training-data toolkit for handwriting recognition.

Three pillars: strikethrough augmentation of line images, character
boundary recovery from CTC output matrices, and synthetic line
generation by stacking character segments sampled from aligned data.
"""

from ._backend import KERNEL_BACKEND
from .blot import BlotParams, BlotRegion, apply_blot, choose_region, generate_blot_points
from .ctc_align import (
    Alignment,
    Alphabet,
    CharBoundary,
    ProbMatrix,
    align_dataset,
    boundaries_from_path,
    forced_align,
    read_prob_matrix,
    write_prob_matrix,
)
from .corpus import CorpusStats, filter_corpus
from .geometry import (
    ControlPolygon,
    CoverageMask,
    CurveSample,
    Point2,
    bernstein,
    bezier_point,
    rasterize_curve,
    sample_curve,
)
from .metrics import EvalReport, cer, edit_distance, evaluate, string_acc, t_arb, wer
from .segbank import Segment, SegmentBank, build_bank, load_bank, sample_segment, save_bank
from .stackmix import (
    GeneratedLine,
    TokenizerMixture,
    generate_corpus,
    mwe_tokenize,
    stackmix_line,
)

__version__ = "0.1.0"
