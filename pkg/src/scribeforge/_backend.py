"""Kernel selection: compiled Viterbi fill if built, numpy fallback otherwise."""

try:
    from ._viterbi_c import viterbi_fill

    KERNEL_BACKEND = "cython"
except ImportError:  # extension not built on this install
    from ._viterbi_py import viterbi_fill

    KERNEL_BACKEND = "python"

__all__ = ["viterbi_fill", "KERNEL_BACKEND"]
