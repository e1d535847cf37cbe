"""Command line surface: corpus generation, oracle inspection, training,
parsing, and evaluation.

All file I/O uses the frame notation corpus format (a sequence of
top-level document frames), so any file written by one subcommand is
readable by the others.  Every subcommand is deterministic given its
flags; seeds default to 1.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .corpus import generate_corpus
from .document import Document, doc_from_frame, doc_to_frame, tokenize
from .evaluation import EvalReport, TokenMismatchError, evaluate, evaluate_corpus
from .model import (ModelConfig, Parameters, grad_check, load_checkpoint,
                    parse_tokens, save_checkpoint, train)
from .model.train import TrainingError, oracle_sequences
from .notation import parse_notation, print_notation, print_with_labels
from .oracle import UnrepresentableDocumentError, action_stats, generate
from .store import Store


class CliError(Exception):
    pass


def read_corpus(path: str) -> list[Document]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(str(exc))
    store = Store()
    result = parse_notation(text, store)
    if not result.ok:
        details = "; ".join(f"byte {off}: {msg}" for off, msg in result.diagnostics[:5])
        raise CliError(f"{path}: parse failed: {details}")
    docs = []
    for index, handle in enumerate(result.top):
        try:
            docs.append(doc_from_frame(handle, store))
        except Exception as exc:
            raise CliError(f"{path}: document {index}: {exc}")
    return docs


def format_document(doc: Document) -> str:
    return print_notation([doc_to_frame(doc)], doc.store)


def format_corpus(docs: list[Document]) -> str:
    blocks = []
    label = 1
    for doc in docs:
        text, label = print_with_labels([doc_to_frame(doc)], doc.store, label)
        blocks.append(text)
    return "\n".join(blocks)


def write_corpus(docs: list[Document], path: str) -> None:
    body = format_corpus(docs)
    Path(path).write_text(body + "\n" if body else "", encoding="utf-8")


# -- gen-corpus --------------------------------------------------------------


def cmd_gen_corpus(args: argparse.Namespace) -> int:
    if args.n_docs < 0:
        raise CliError("--n-docs must be non-negative")
    docs = generate_corpus(args.seed, args.n_docs)
    write_corpus(docs, args.out)
    print(f"wrote {len(docs)} documents to {args.out}")
    return 0


# -- oracle ------------------------------------------------------------------


def cmd_oracle(args: argparse.Namespace) -> int:
    docs = read_corpus(args.input)
    blocks = []
    for index, doc in enumerate(docs):
        try:
            blocks.append(generate(doc).to_text())
        except UnrepresentableDocumentError as exc:
            raise CliError(f"document {index}: {exc}")
    output = "\n\n".join(blocks)
    if args.out:
        Path(args.out).write_text(output + "\n" if output else "", encoding="utf-8")
    else:
        if output:
            print(output)
    print(action_stats(docs).format_table())
    return 0


# -- train -------------------------------------------------------------------


def _apply_overrides(config: ModelConfig, overrides: list[str]) -> None:
    for item in overrides:
        if "=" not in item:
            raise CliError(f"--hparam expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        try:
            config.apply_override(key, value)
        except ValueError as exc:
            raise CliError(str(exc))


def cmd_train(args: argparse.Namespace) -> int:
    corpus = read_corpus(args.input)
    config = ModelConfig()
    _apply_overrides(config, args.hparam)
    if args.ema:
        config.use_ema = True
    dev = read_corpus(args.dev) if args.dev else None

    metric_lines: list[str] = []
    best = {"f1": None, "step": None, "arrays": None, "ema": None}

    def on_checkpoint(params: Parameters, ckpt) -> None:
        line = f"step={ckpt.step} loss={ckpt.loss:.6f} accuracy={ckpt.accuracy:.4f}"
        if dev is not None:
            preds = [parse_tokens(params, d.text, list(d.tokens)) for d in dev]
            f1 = evaluate_corpus(dev, preds).slot.f1
            line += f" dev_slot_f1={100 * f1:.2f}"
            if best["f1"] is None or f1 > best["f1"]:
                best["f1"] = f1
                best["step"] = ckpt.step
                best["arrays"] = {k: v.copy() for k, v in params.arrays.items()}
                best["ema"] = (None if params.ema is None else
                               {k: v.copy() for k, v in params.ema.items()})
        print(line)
        metric_lines.append(line)

    try:
        params = train(corpus, config, seed=args.seed, steps=args.steps,
                       checkpoint_every=args.checkpoint_every,
                       on_checkpoint=on_checkpoint)
    except (TrainingError, UnrepresentableDocumentError) as exc:
        raise CliError(str(exc))

    save_checkpoint(params, args.out)
    if best["arrays"] is not None:
        final_arrays, final_ema = params.arrays, params.ema
        params.arrays, params.ema = best["arrays"], best["ema"]
        save_checkpoint(params, args.out + ".best")
        params.arrays, params.ema = final_arrays, final_ema
        print(f"best checkpoint: step={best['step']} "
              f"dev_slot_f1={100 * best['f1']:.2f}")
    else:
        save_checkpoint(params, args.out + ".best")
    if args.metrics_out:
        Path(args.metrics_out).write_text(
            "\n".join(metric_lines) + "\n", encoding="utf-8")
    return 0


# -- parse -------------------------------------------------------------------


_WORKER_MODEL: Parameters | None = None


def _parse_worker_init(checkpoint_path: str) -> None:
    global _WORKER_MODEL
    _WORKER_MODEL = load_checkpoint(checkpoint_path)


def _parse_worker(job: tuple[int, str, list, bool]) -> tuple[int, Document]:
    index, text, tokens, use_ema = job
    assert _WORKER_MODEL is not None
    return index, parse_tokens(_WORKER_MODEL, text, tokens, use_ema=use_ema)


def cmd_parse(args: argparse.Namespace) -> int:
    if bool(args.input) == bool(args.text is not None):
        raise CliError("exactly one of --in or --text is required")
    params = load_checkpoint(args.model)
    if args.text is not None:
        inputs = [(args.text, tokenize(args.text))]
    else:
        inputs = [(d.text, list(d.tokens)) for d in read_corpus(args.input)]

    use_ema = args.ema
    if use_ema and params.ema is None:
        raise CliError("checkpoint holds no averaged parameters")

    if args.jobs > 1 and len(inputs) > 1:
        jobs = [(i, text, tokens, use_ema) for i, (text, tokens) in enumerate(inputs)]
        with ProcessPoolExecutor(max_workers=args.jobs,
                                 initializer=_parse_worker_init,
                                 initargs=(args.model,)) as pool:
            results = list(pool.map(_parse_worker, jobs))
        docs = [doc for _, doc in sorted(results, key=lambda r: r[0])]
    else:
        docs = [parse_tokens(params, text, tokens, use_ema=use_ema)
                for text, tokens in inputs]

    body = format_corpus(docs)
    if args.out:
        Path(args.out).write_text(body + "\n" if body else "", encoding="utf-8")
    else:
        print(body)
    return 0


# -- eval --------------------------------------------------------------------


def _eval_worker(job: tuple[str, str, int, int]) -> EvalReport:
    gold_path, pred_path, lo, hi = job
    gold = read_corpus(gold_path)[lo:hi]
    pred = read_corpus(pred_path)[lo:hi]
    return evaluate_corpus(gold, pred)


def cmd_eval(args: argparse.Namespace) -> int:
    gold = read_corpus(args.gold)
    pred = read_corpus(args.pred)
    if len(gold) != len(pred):
        raise CliError(f"corpus length mismatch: {len(gold)} gold vs {len(pred)} predicted")
    try:
        if args.jobs > 1 and len(gold) > 1:
            bounds = []
            chunk = (len(gold) + args.jobs - 1) // args.jobs
            for lo in range(0, len(gold), chunk):
                bounds.append((args.gold, args.pred, lo, min(lo + chunk, len(gold))))
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                report = EvalReport()
                for part in pool.map(_eval_worker, bounds):
                    report = report + part
        else:
            report = evaluate_corpus(gold, pred)
    except TokenMismatchError as exc:
        raise CliError(str(exc))
    print(report.format_table())
    print(report.format_machine())
    if args.metrics_out:
        Path(args.metrics_out).write_text(report.format_machine() + "\n",
                                          encoding="utf-8")
    return 0


# -- grad-check --------------------------------------------------------------


def cmd_grad_check(args: argparse.Namespace) -> int:
    import random

    from .model import build_lexicon
    rng = random.Random(args.seed)
    worst = 0.0
    for index in range(args.configs):
        corpus = generate_corpus(rng.randrange(1 << 30), 1)
        config = ModelConfig(
            lstm_dim=rng.randint(3, 6), hidden_dim=rng.randint(3, 6),
            word_dim=rng.randint(2, 4), affix_dim=2, shape_dim=2,
            link_dim=rng.randint(2, 3), k_attention=rng.randint(2, 4),
            k_history=rng.randint(1, 3), dtype="float64")
        sequences = oracle_sequences(corpus)
        lexicon = build_lexicon(corpus, config, sequences)
        params = Parameters(config, lexicon, seed=rng.randrange(1 << 30))
        error = grad_check(params, corpus[0], sequences[0])
        worst = max(worst, error)
        print(f"config {index}: max relative error {error:.3e}")
    print(f"worst over {args.configs} configs: {worst:.3e}")
    if worst >= args.threshold:
        print(f"FAIL: {worst:.3e} >= {args.threshold:.0e}", file=sys.stderr)
        return 1
    return 0


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="framekit",
        description="Frame-semantic parsing toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-corpus", help="generate a synthetic annotated corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--n-docs", type=int, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("oracle", help="emit canonical transition sequences")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("train", help="train the action predictor")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--dev", help="dev corpus for checkpoint selection")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--checkpoint-every", type=int, default=200)
    p.add_argument("--metrics-out")
    p.add_argument("--ema", action="store_true",
                   help="also keep an exponential moving average of parameters")
    p.add_argument("--hparam", action="append", default=[], metavar="KEY=VALUE",
                   help="model configuration override (repeatable)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("parse", help="parse text into predicted documents")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", help="gold corpus (tokens are reused)")
    p.add_argument("--text", help="raw text for a single document")
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--ema", action="store_true", help="decode with averaged parameters")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("eval", help="score predicted documents against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--metrics-out")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("grad-check", help="verify gradients by finite differences")
    p.add_argument("--configs", type=int, default=20)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--threshold", type=float, default=1e-4)
    p.set_defaults(func=cmd_grad_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
