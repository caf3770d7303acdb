"""Whole-pipeline check against the synthetic font's known glyph extents."""

import json

import numpy as np

from scribeforge.ctc_align import align_dataset, read_annotations, write_prob_matrix
from scribeforge.pngio import write_gray
from scribeforge.segbank import build_bank
from scribeforge.stackmix import TokenizerMixture, generate_corpus

from synthfont import (
    cell_width,
    emission_matrix,
    make_alphabet,
    random_text,
    render_line,
)


def build_synth_dataset(tmp_path, texts, scale=3):
    alphabet = make_alphabet()
    img_dir = tmp_path / "images"
    probs_dir = tmp_path / "probs"
    img_dir.mkdir()
    probs_dir.mkdir()
    truth = {}
    rows = []
    for i, text in enumerate(texts):
        line_id = f"line_{i:04d}"
        img, extents = render_line(text, scale)
        write_gray(img_dir / f"{line_id}.png", img)
        write_prob_matrix(probs_dir / f"{line_id}.ctcp",
                          emission_matrix(text, alphabet, scale))
        truth[line_id] = extents
        rows.append(f"{line_id}\timages/{line_id}.png\t{text}\n")
    manifest = tmp_path / "manifest.tsv"
    manifest.write_text("".join(rows), encoding="utf-8")
    return alphabet, manifest, img_dir, probs_dir, truth


def test_boundary_recovery_accuracy(tmp_path):
    rng = np.random.default_rng(404)
    texts = [random_text(rng) for _ in range(30)]
    alphabet, manifest, _imgs, probs_dir, truth = build_synth_dataset(
        tmp_path, texts
    )
    ann = tmp_path / "ann.jsonl"
    summary = align_dataset(manifest, probs_dir, ann, alphabet)
    assert summary["failed"] == 0
    assert summary["aligned"] == len(texts)

    cw = cell_width(3)
    total = 0
    close = 0
    for rec in read_annotations(ann):
        extents = truth[rec["line_id"]]
        assert [b["char"] for b in rec["boundaries"]] == list(rec["transcript"])
        for b, (t_start, t_end) in zip(rec["boundaries"], extents):
            total += 1
            if (abs(b["start"] - t_start) <= 0.1 * cw
                    and abs(b["end"] - t_end) <= 0.1 * cw):
                close += 1
    assert total > 0
    assert close / total >= 0.95


def test_full_generation_pipeline(tmp_path):
    rng = np.random.default_rng(505)
    texts = [random_text(rng, n_words=(2, 4), word_len=(2, 5))
             for _ in range(25)]
    alphabet, manifest, img_dir, probs_dir, _truth = build_synth_dataset(
        tmp_path, texts
    )
    ann = tmp_path / "ann.jsonl"
    align_dataset(manifest, probs_dir, ann, alphabet)
    bank = build_bank(ann, img_dir, max_token_len=4,
                      norm_height=render_line("a")[0].shape[0])

    corpus = tmp_path / "corpus.txt"
    corpus.write_text("".join(t + "\n" for t in texts), encoding="utf-8")
    out = generate_corpus(corpus, bank, TokenizerMixture(), 40,
                          tmp_path / "gen", base_seed=9)
    assert out["generated"] == 40

    rows = (tmp_path / "gen" / "manifest.tsv").read_text().splitlines()
    assert len(rows) == 40
    corpus_lines = set(texts)
    for row in rows:
        _line_id, rel, transcript = row.split("\t")
        assert transcript in corpus_lines
        assert (tmp_path / "gen" / rel).exists()
