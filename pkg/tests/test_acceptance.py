"""Acceptance suite: one test per release criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line
per criterion with its measured runtime.  Every tolerance is pinned
here; a criterion that cannot hold must fail loudly, not be loosened.
"""

import time

import numpy as np
import pytest
from scipy.stats import chisquare

from scribeforge.blot import BlotParams, apply_blot, plan_blots
from scribeforge.ctc_align import (
    align_dataset,
    forced_align,
    read_annotations,
    write_prob_matrix,
)
from scribeforge.geometry import ControlPolygon, bernstein, bezier_point
from scribeforge.metrics import cer, t_arb, wer
from scribeforge.pngio import write_gray
from scribeforge.segbank import build_bank, sample_segment
from scribeforge.stackmix import TokenizerMixture, mwe_tokenize, stackmix_line

from oracles import convex_hull, point_in_hull
from synthfont import (
    cell_width,
    emission_matrix,
    make_alphabet,
    random_text,
    render_line,
)
from test_ctc_align import oracle_align, random_instance


def report(name, t0, budget):
    elapsed = time.time() - t0
    print(f"PASS: {name} ({elapsed:.2f}s, budget {budget:.0f}s)")
    assert elapsed < budget


def test_bernstein_partition_of_unity():
    t0 = time.time()
    rng = np.random.default_rng(1)
    for n in range(11):
        for s in rng.random(1000):
            total = sum(bernstein(j, n, float(s)) for j in range(n + 1))
            assert abs(total - 1.0) <= 1e-9
    report("Bernstein partition of unity (n <= 10, 1000 random s)", t0, 1.0)


def test_bezier_invariants_10k_polygons():
    t0 = time.time()
    rng = np.random.default_rng(2)
    for _ in range(10_000):
        m = int(rng.integers(2, 8))  # degree <= 6
        pts = rng.uniform(-100, 100, (m, 2))
        poly = ControlPolygon(pts)

        p0 = bezier_point(poly, 0.0)
        p1 = bezier_point(poly, 1.0)
        assert abs(p0.x - pts[0, 0]) <= 1e-12 and abs(p0.y - pts[0, 1]) <= 1e-12
        assert abs(p1.x - pts[-1, 0]) <= 1e-12 and abs(p1.y - pts[-1, 1]) <= 1e-12

        s = float(rng.random())
        p = bezier_point(poly, s)
        assert point_in_hull(np.array(p), convex_hull(pts), tol=1e-9)

        q = bezier_point(ControlPolygon(pts[::-1]), 1.0 - s)
        assert abs(p.x - q.x) <= 1e-9 and abs(p.y - q.y) <= 1e-9
    report("Bezier endpoint/convex-hull/symmetry on 10000 polygons", t0, 5.0)


def test_forced_alignment_oracle_10k():
    t0 = time.time()
    rng = np.random.default_rng(3)
    n_instances = 10_000
    for _ in range(n_instances):
        pm, transcript, alphabet = random_instance(rng)
        expected_score, expected_path = oracle_align(pm, transcript, alphabet)
        al = forced_align(pm, transcript, alphabet)
        assert abs(al.score - expected_score) <= 1e-9
        assert tuple(al.path) == expected_path
        assert boundaries_match_path(al, pm, transcript)
    report(f"CTC forced alignment vs exhaustive oracle ({n_instances} instances)",
           t0, 60.0)


def boundaries_match_path(al, pm, transcript):
    """Recompute spans from the path with an inline floor/ceil/clamp."""
    w, n = pm.source_width, pm.timesteps
    prev_end = 0
    for u, b in enumerate(al.boundaries):
        ts = np.nonzero(al.path == 2 * u + 1)[0]
        start = max((int(ts[0]) * w) // n, prev_end)
        end = -((-(int(ts[-1]) + 1) * w) // n)
        end = max(end, start + 1)
        prev_end = end
        if (b.char, b.start_px, b.end_px, b.k) != (
                transcript[u], start, end, len(ts)):
            return False
    return True


def test_boundary_width_formula_on_oracle_instances():
    t0 = time.time()
    rng = np.random.default_rng(4)
    for _ in range(2000):
        pm, transcript, alphabet = random_instance(rng)
        al = forced_align(pm, transcript, alphabet)
        w, n = pm.source_width, pm.timesteps
        cell = w / n
        for b in al.boundaries:
            width = b.end_px - b.start_px
            assert abs(width - b.k * cell) <= max(cell, 2.0) + 1e-9
    report("Boundary width = k*W/N within one pixel-cell of rounding", t0, 60.0)


def test_synthetic_end_to_end_200_lines(tmp_path):
    t0 = time.time()
    rng = np.random.default_rng(5)
    alphabet = make_alphabet()
    texts = [random_text(rng, n_words=(2, 4), word_len=(2, 5))
             for _ in range(200)]

    img_dir = tmp_path / "images"
    probs_dir = tmp_path / "probs"
    img_dir.mkdir()
    probs_dir.mkdir()
    truth = {}
    rows = []
    for i, text in enumerate(texts):
        line_id = f"line_{i:04d}"
        img, extents = render_line(text)
        write_gray(img_dir / f"{line_id}.png", img)
        write_prob_matrix(probs_dir / f"{line_id}.ctcp",
                          emission_matrix(text, alphabet))
        truth[line_id] = extents
        rows.append(f"{line_id}\timages/{line_id}.png\t{text}\n")
    manifest = tmp_path / "manifest.tsv"
    manifest.write_text("".join(rows), encoding="utf-8")

    ann = tmp_path / "ann.jsonl"
    summary = align_dataset(manifest, probs_dir, ann, alphabet)
    assert summary["failed"] == 0 and summary["aligned"] == 200

    # boundary accuracy against true glyph extents
    cw = cell_width(3)
    total = close = 0
    for rec in read_annotations(ann):
        for b, (t_start, t_end) in zip(rec["boundaries"], truth[rec["line_id"]]):
            total += 1
            close += (abs(b["start"] - t_start) <= 0.1 * cw
                      and abs(b["end"] - t_end) <= 0.1 * cw)
    assert close / total >= 0.95

    bank = build_bank(ann, img_dir, max_token_len=4,
                      norm_height=render_line("a")[0].shape[0])
    mix = TokenizerMixture()
    for i in range(200):
        gen_rng = np.random.default_rng(1000 + i)
        text = texts[int(gen_rng.integers(0, len(texts)))]
        gl = stackmix_line(text, bank, mix, gen_rng)
        assert gl.transcript == text  # fidelity

        replay = np.random.default_rng(1000 + i)
        _ = replay.integers(0, len(texts))
        tokens = mwe_tokenize(text, bank, mix.draw(replay))
        widths = [sample_segment(bank, tok, replay).width for tok in tokens]
        assert gl.image.shape[1] == sum(widths)  # additivity, exact

    report(f"Synthetic end-to-end (200 aligned lines, 200 generated, "
           f"{100 * close / total:.1f}% boundaries within 10%)", t0, 120.0)


def test_blot_determinism_and_locality_1000_images():
    t0 = time.time()
    rng = np.random.default_rng(6)
    params = BlotParams()
    identity = BlotParams(proba=0.0)
    for i in range(1000):
        h = int(rng.integers(64, 160))
        w = int(rng.integers(64, 600))
        img = rng.integers(80, 256, (h, w)).astype(np.uint8)
        seed = int(rng.integers(0, 2**63))

        out1 = apply_blot(img, params, np.random.default_rng(seed))
        out2 = apply_blot(img, params, np.random.default_rng(seed))
        assert np.array_equal(out1, out2)  # byte determinism

        assert np.all(out1 <= img)  # monotone darkening

        plan = plan_blots(img, params, np.random.default_rng(seed))
        allowed = np.zeros(img.shape, dtype=bool)
        t = params.thickness
        for region, _poly in plan:
            allowed[max(0, region.y0 - t):region.y1 + t,
                    max(0, region.x0 - t):region.x1 + t] = True
        assert not np.any((out1 != img) & ~allowed)  # locality

        assert np.array_equal(
            apply_blot(img, identity, np.random.default_rng(seed)), img
        )  # identity at proba=0
    report("Blot determinism/locality/monotonicity on 1000 images", t0, 30.0)


def test_tokenizer_mixture_frequencies():
    t0 = time.time()
    mix = TokenizerMixture()
    assert mix.probs == (0.05, 0.15, 0.2, 0.2, 0.2, 0.2)
    rng = np.random.default_rng(7)
    draws = np.array([mix.draw(rng) for _ in range(60_000)])
    counts = np.array([np.sum(draws == m) for m in mix.max_lens])
    p = chisquare(counts, np.array(mix.probs) * 60_000).pvalue
    assert p > 0.01
    report(f"Tokenizer mixture chi-square over 60000 draws (p={p:.3f})", t0, 30.0)


def test_metrics_fixtures():
    t0 = time.time()
    assert cer("abd", "abc") == pytest.approx(1 / 3)
    assert wer("a b", "a c") == 0.5
    assert t_arb(67.2, 33.6) == 1.0  # exact
    report("Metric fixtures (cer=1/3, wer=0.5, t_arb=1)", t0, 5.0)
