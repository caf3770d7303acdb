"""Command-line surface: blot, align, bank build, stackmix, filter, eval.

Every subcommand is byte-deterministic under --seed (falling back to the
SCRIBEFORGE_SEED environment variable, then to fresh entropy echoed on
stderr).  Batch commands derive one seed per item (base + item index) so
results do not depend on --jobs.
"""

import argparse
import dataclasses
import json
import os
import secrets
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .blot import BlotParams, apply_blot
from .corpus import DEFAULT_MAX_LINE_LEN, filter_corpus
from .ctc_align import Alphabet, align_dataset
from .errors import ScribeforgeError
from .metrics import evaluate
from .pngio import read_gray, write_gray
from .segbank import DEFAULT_NORM_HEIGHT, build_bank, load_bank, save_bank
from .stackmix import TokenizerMixture, generate_one, usable_corpus_lines

SEED_ENV = "SCRIBEFORGE_SEED"


def resolve_seed(value):
    if value is not None:
        return int(value)
    env = os.environ.get(SEED_ENV)
    if env is not None:
        return int(env)
    seed = secrets.randbits(32)
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def load_blot_params(args):
    """Config file first, explicit flags override, defaults fill the rest."""
    values = {}
    if args.params:
        with open(args.params, encoding="utf-8") as fh:
            values.update(json.load(fh))
    for f in dataclasses.fields(BlotParams):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    return BlotParams(**values)


def _emit(summary):
    print(json.dumps(summary, ensure_ascii=False))


# --- blot -----------------------------------------------------------------

def _blot_one(task):
    in_path, out_path, params_values, seed = task
    img = read_gray(in_path)
    params = BlotParams(**params_values)
    out = apply_blot(img, params, np.random.default_rng(seed))
    write_gray(out_path, out)


def cmd_blot(args):
    seed = resolve_seed(args.seed)
    params = load_blot_params(args)
    in_dir = Path(args.in_dir)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = sorted(p for p in in_dir.iterdir() if p.suffix.lower() == ".png")

    tasks = [
        (str(p), str(out_dir / p.name), dataclasses.asdict(params), seed + i)
        for i, p in enumerate(files)
    ]
    failures = run_pool(_blot_one, tasks, args.jobs,
                        labels=[p.name for p in files])
    summary = {
        "command": "blot",
        "seed": seed,
        "processed": len(files) - len(failures),
        "failed": len(failures),
        "failures": failures,
    }
    _emit(summary)
    return exit_code(failures, args.keep_going)


def run_pool(fn, tasks, jobs, labels):
    """Order-preserving worker pool; collects per-item failures."""
    failures = []
    if jobs <= 1:
        for label, task in zip(labels, tasks):
            try:
                fn(task)
            except Exception as exc:
                failures.append({"item": label, "reason": str(exc)})
        return failures
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(fn, t) for t in tasks]
        for label, fut in zip(labels, futures):
            try:
                fut.result()
            except Exception as exc:
                failures.append({"item": label, "reason": str(exc)})
    return failures


def exit_code(failures, keep_going):
    if failures and not keep_going:
        return 1
    return 0


# --- align ----------------------------------------------------------------

def cmd_align(args):
    alphabet = Alphabet.load(args.alphabet)
    summary = align_dataset(args.manifest, args.probs_dir, args.out, alphabet,
                            jobs=args.jobs)
    summary["command"] = "align"
    _emit(summary)
    return exit_code(summary["failures"], args.keep_going)


# --- bank -----------------------------------------------------------------

def cmd_bank_build(args):
    alphabet = Alphabet.load(args.alphabet) if args.alphabet else None
    bank = build_bank(
        args.annotations,
        args.images_dir,
        max_token_len=args.max_token_len,
        norm_height=args.norm_height,
        alphabet=alphabet,
        segment_cap=args.segment_cap,
        seed=resolve_seed(args.seed),
    )
    save_bank(bank, args.out)
    summary = {
        "command": "bank build",
        "tokens": len(bank.entries),
        "segments": sum(len(v) for v in bank.entries.values()),
        "norm_height": bank.norm_height,
    }
    _emit(summary)
    return 0


# --- stackmix ---------------------------------------------------------------

_WORKER_BANK = None
_WORKER_TEXTS = None
_WORKER_MIX = None


def _stackmix_init(bank_dir, corpus_lines, mix_json):
    global _WORKER_BANK, _WORKER_TEXTS, _WORKER_MIX
    _WORKER_BANK = load_bank(bank_dir)
    _WORKER_TEXTS = corpus_lines
    _WORKER_MIX = TokenizerMixture.from_json(mix_json)


def _stackmix_one(task):
    base_seed, index, out_dir = task
    line_id, image, transcript = generate_one(
        _WORKER_TEXTS, _WORKER_BANK, _WORKER_MIX, base_seed, index
    )
    rel = f"images/{line_id}.png"
    write_gray(Path(out_dir) / rel, image)
    return f"{line_id}\t{rel}\t{transcript}\n"


def cmd_stackmix(args):
    seed = resolve_seed(args.seed)
    bank = load_bank(args.bank)
    if args.mixture:
        with open(args.mixture, encoding="utf-8") as fh:
            mix = TokenizerMixture.from_json(json.load(fh))
    else:
        mix = TokenizerMixture()
    with open(args.corpus, encoding="utf-8") as fh:
        raw = [line.rstrip("\n") for line in fh]
    texts, skipped = usable_corpus_lines(raw, bank.alphabet, args.drop_chars)
    if not texts and args.n > 0:
        print("error: no usable corpus line after alphabet filtering",
              file=sys.stderr)
        return 1

    out_dir = Path(args.out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    mix_json = {"max_lens": list(mix.max_lens), "probs": list(mix.probs)}

    rows = []
    if args.jobs <= 1:
        _stackmix_init(args.bank, texts, mix_json)
        for i in range(args.n):
            rows.append(_stackmix_one((seed, i, str(out_dir))))
    else:
        with ProcessPoolExecutor(
            max_workers=args.jobs,
            initializer=_stackmix_init,
            initargs=(args.bank, texts, mix_json),
        ) as pool:
            rows = list(pool.map(
                _stackmix_one,
                [(seed, i, str(out_dir)) for i in range(args.n)],
            ))

    manifest = out_dir / "manifest.tsv"
    with open(manifest, "w", encoding="utf-8") as mf:
        mf.writelines(rows)

    if args.page_lines:
        pages = write_pages(out_dir, rows, args.page_lines)
    else:
        pages = 0
    _emit({
        "command": "stackmix",
        "seed": seed,
        "generated": args.n,
        "skipped_corpus_lines": skipped,
        "manifest": str(manifest),
        "pages": pages,
    })
    return 0


def write_pages(out_dir, manifest_rows, per_page):
    """Convenience only: stack consecutive generated lines into page images."""
    page_dir = out_dir / "pages"
    page_dir.mkdir(exist_ok=True)
    images = []
    for row in manifest_rows:
        _line_id, rel, _t = row.rstrip("\n").split("\t", 2)
        images.append(read_gray(out_dir / rel))
    count = 0
    for start in range(0, len(images), per_page):
        batch = images[start:start + per_page]
        width = max(im.shape[1] for im in batch)
        padded = [
            np.pad(im, ((0, 0), (0, width - im.shape[1])), constant_values=255)
            for im in batch
        ]
        write_gray(page_dir / f"page_{count:04d}.png", np.vstack(padded))
        count += 1
    return count


# --- filter -----------------------------------------------------------------

def cmd_filter(args):
    alphabet = Alphabet.load(args.alphabet)
    stats = filter_corpus(
        args.input, args.output, alphabet,
        mode=args.mode, max_line_len=args.max_line_len,
    )
    summary = stats.to_json()
    summary["command"] = "filter"
    _emit(summary)
    return 0


# --- eval -------------------------------------------------------------------

def cmd_eval(args):
    with open(args.pred, encoding="utf-8") as fh:
        preds = fh.read().splitlines()
    with open(args.truth, encoding="utf-8") as fh:
        truths = fh.read().splitlines()
    if len(preds) != len(truths):
        print(
            f"error: {args.pred} has {len(preds)} lines, "
            f"{args.truth} has {len(truths)}",
            file=sys.stderr,
        )
        return 1
    report = evaluate(zip(preds, truths), lowercase=args.lowercase)
    summary = report.to_json()
    summary["command"] = "eval"
    _emit(summary)
    return 0


# --- parser -----------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="scribeforge",
        description="Strikethrough augmentation, boundary alignment and "
                    "segment-stacking line synthesis for HTR training data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("blot", help="strike through every PNG in a directory")
    p.add_argument("in_dir")
    p.add_argument("out_dir")
    p.add_argument("--params", help="JSON file with BlotParams fields")
    for f in dataclasses.fields(BlotParams):
        kind = f.type if f.type in (int, float) else float
        p.add_argument(f"--{f.name.replace('_', '-')}", type=kind,
                       default=None, dest=f.name)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--keep-going", action="store_true")
    p.set_defaults(fn=cmd_blot)

    p = sub.add_parser("align", help="recover character boundaries from "
                                     "probability matrices")
    p.add_argument("--manifest", required=True)
    p.add_argument("--probs-dir", required=True)
    p.add_argument("--alphabet", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--keep-going", action="store_true")
    p.set_defaults(fn=cmd_align)

    p = sub.add_parser("bank", help="segment bank operations")
    bank_sub = p.add_subparsers(dest="bank_command", required=True)
    b = bank_sub.add_parser("build", help="crop token segments from aligned lines")
    b.add_argument("--annotations", required=True)
    b.add_argument("--images-dir", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--max-token-len", type=int, default=8)
    b.add_argument("--norm-height", type=int, default=DEFAULT_NORM_HEIGHT)
    b.add_argument("--segment-cap", type=int, default=500)
    b.add_argument("--alphabet")
    b.add_argument("--seed", type=int)
    b.set_defaults(fn=cmd_bank_build)

    p = sub.add_parser("stackmix", help="generate labeled lines from corpus text")
    p.add_argument("--corpus", required=True)
    p.add_argument("--bank", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mixture", help="JSON file with max_lens and probs")
    p.add_argument("--drop-chars", action="store_true",
                   help="drop foreign characters instead of skipping lines")
    p.add_argument("--page-lines", type=int, default=0,
                   help="also stack every K lines into page images")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=cmd_stackmix)

    p = sub.add_parser("filter", help="restrict a text corpus to an alphabet")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--alphabet", required=True)
    p.add_argument("--mode", choices=["skip-line", "drop-chars"],
                   default="skip-line")
    p.add_argument("--max-line-len", type=int, default=DEFAULT_MAX_LINE_LEN)
    p.set_defaults(fn=cmd_filter)

    p = sub.add_parser("eval", help="score predictions against references")
    p.add_argument("pred")
    p.add_argument("truth")
    p.add_argument("--lowercase", action="store_true")
    p.set_defaults(fn=cmd_eval)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ScribeforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
