"""``ts`` command line: reproducible pipelines over all toolkit modules."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import (
    aligner as aligner_mod,
    corpus_io,
    data as data_mod,
    decoder_search,
    evaluator,
    ngram_lm,
    sa_model,
    subword as subword_mod,
    synth,
    toy,
    trainer as trainer_mod,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_lines(path) -> list[list[str]]:
    with open(path, encoding="utf-8") as fh:
        return [line.split() for line in fh.read().splitlines()]


def _resolve_seed(args) -> int:
    seed = getattr(args, "seed", None)
    if seed is None:
        seed = int(os.environ.get("TS_SEED", "0"))
    return seed


def _echo(args, seed: int, extra: dict | None = None) -> None:
    resolved = {k: v for k, v in vars(args).items() if k != "func"}
    resolved["seed"] = seed
    if extra:
        resolved.update(extra)
    print("config: " + json.dumps(resolved, default=str, sort_keys=True))


def _load_subword(args) -> subword_mod.SubwordModel:
    return subword_mod.load_model(args.merges, args.vocab)


def _model_config_from_args(args, vocab_size: int) -> sa_model.ModelConfig:
    return sa_model.ModelConfig(
        vocab_size=vocab_size,
        d_model=args.d_model,
        n_heads=args.heads,
        encoder_layers=args.encoder_layers,
        decoder_layers=args.decoder_layers,
        ffn_dim=args.ffn_dim,
        dropout=args.dropout,
        max_positions=args.max_positions,
        independent_positions=not args.no_independent_positions,
        segment_embedding_in_input=not args.no_segment_embedding,
        segment_aware_attention=not args.no_segment_attention,
    )


def _add_model_flags(parser) -> None:
    parser.add_argument("--d-model", type=int, default=64)
    parser.add_argument("--heads", type=int, default=4)
    parser.add_argument("--encoder-layers", type=int, default=2)
    parser.add_argument("--decoder-layers", type=int, default=2)
    parser.add_argument("--ffn-dim", type=int, default=256)
    parser.add_argument("--dropout", type=float, default=0.1)
    parser.add_argument("--max-positions", type=int, default=512)
    parser.add_argument("--no-independent-positions", action="store_true",
                        help="ablation: global positions over the whole input")
    parser.add_argument("--no-segment-embedding", action="store_true",
                        help="ablation: drop the segment term from token representations")
    parser.add_argument("--no-segment-attention", action="store_true",
                        help="ablation: plain self-attention in the encoder")


def _add_train_flags(parser, default_steps: int, default_lr: float) -> None:
    parser.add_argument("--config", help="JSON file mirroring the training config fields")
    parser.add_argument("--steps", type=int, default=default_steps)
    parser.add_argument("--batch-tokens", type=int, default=1000)
    parser.add_argument("--lr", type=float, default=default_lr)
    parser.add_argument("--warmup-steps", type=int, default=100)
    parser.add_argument("--eval-interval", type=int, default=50)
    parser.add_argument("--checkpoint-dir")


def _train_config(args, phase: str, seed: int) -> trainer_mod.TrainConfig:
    cfg = {
        "phase": phase,
        "batch_tokens": args.batch_tokens,
        "lr": args.lr,
        "warmup_steps": args.warmup_steps,
        "max_steps": args.steps,
        "eval_interval": args.eval_interval,
        "seed": seed,
        "checkpoint_dir": args.checkpoint_dir,
    }
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg.update(json.load(fh))
    return trainer_mod.TrainConfig.from_dict(cfg)


# -- subcommand handlers -------------------------------------------------


def cmd_learn_bpe(args) -> int:
    seed = _resolve_seed(args)
    _echo(args, seed)
    corpus = []
    for path in args.input:
        corpus.extend(_read_lines(path))
    model = subword_mod.learn_bpe(corpus, args.merges_count)
    subword_mod.save_model(model, args.out_merges, args.out_vocab)
    print(f"learned {len(model.merges)} merges, vocab size {len(model.vocab)}")
    return EXIT_OK


def cmd_apply_bpe(args) -> int:
    seed = _resolve_seed(args)
    _echo(args, seed)
    model = _load_subword(args)
    with open(args.output, "w", encoding="utf-8") as out:
        for words in _read_lines(args.input):
            out.write(" ".join(subword_mod.apply_bpe(model, words)) + "\n")
    return EXIT_OK


def cmd_train_lm(args) -> int:
    seed = _resolve_seed(args)
    _echo(args, seed)
    corpus = _read_lines(args.input)
    model = ngram_lm.train_lm(corpus, order=args.order, smoothing=args.smoothing, k=args.k)
    ngram_lm.save_model(model, args.out)
    print(f"trained order-{model.order} LM ({model.smoothing}), vocab {len(model.vocab)}")
    return EXIT_OK


def cmd_align(args) -> int:
    seed = _resolve_seed(args)
    _echo(args, seed)
    src = _read_lines(args.src)
    tgt = _read_lines(args.tgt)
    if len(src) != len(tgt):
        raise corpus_io.RecordError("source and target line counts differ")
    bitext = list(zip(src, tgt))
    fwd = aligner_mod.em_train(bitext, args.iterations)
    rev = aligner_mod.em_train([(t, s) for s, t in bitext], args.iterations)
    link_sets = []
    for s, t in bitext:
        links_fwd = aligner_mod.viterbi_align(fwd, s, t)
        links_rev = {(i, j) for j, i in aligner_mod.viterbi_align(rev, t, s)}
        link_sets.append(
            aligner_mod.symmetrize(links_fwd, links_rev, len(s), len(t), args.mode)
        )
    aligner_mod.write_links(link_sets, args.out)
    print(f"aligned {len(link_sets)} sentence pairs "
          f"(final log-likelihood {fwd.log_likelihood[-1]:.4f})")
    return EXIT_OK


def cmd_build_synth(args) -> int:
    seed = _resolve_seed(args)
    _echo(args, seed)
    cfg = synth.SamplerConfig(
        max_span_len=args.max_span_len,
        p_null=args.p_null,
        samples_per_sentence=args.k,
        seed=seed,
        beta=args.beta,
        p_hint=args.hint_prob,
    )
    if args.method in ("golden", "align") and not args.target:
        raise UsageError(f"--target is required for method {args.method}")
    if args.method in ("pseudo", "align") and not args.mt:
        raise UsageError(f"--mt is required for method {args.method}")
    sources = _read_lines(args.source)
    if args.method == "golden":
        targets = _read_lines(args.target)
        examples, stats = synth.sample_golden(list(zip(sources, targets)), cfg)
    elif args.method == "pseudo":
        translations = _read_lines(args.mt)
        examples, stats = synth.sample_pseudo(sources, cfg, translations=translations)
    else:  # align
        targets = _read_lines(args.target)
        translations = _read_lines(args.mt)
        bitext = list(zip(translations, targets))
        fwd = aligner_mod.em_train(bitext, args.em_iterations)
        rev = aligner_mod.em_train([(t, s) for s, t in bitext], args.em_iterations)
        lm = ngram_lm.train_lm(targets, order=args.lm_order)
        triples = list(zip(sources, translations, targets))
        examples, stats = synth.extract_alignment_based(triples, fwd, rev, lm, cfg)
    corpus_io.write_ts_file(examples, args.out)
    synth.write_stats(stats, args.out + ".stats.json")
    print(f"wrote {stats.emitted} examples to {args.out}")
    return EXIT_OK


def cmd_make_toy(args) -> int:
    seed = _resolve_seed(args)
    _echo(args, seed)
    manifest = toy.make_toy(
        args.out,
        n_pairs=args.pairs,
        n_golden_train=args.golden_train,
        n_golden_test=args.golden_test,
        seed=seed,
        p_hint=args.hint_prob,
    )
    print(f"toy benchmark written to {args.out}: {json.dumps(manifest['files'])}")
    return EXIT_OK


def cmd_pretrain(args) -> int:
    seed = _resolve_seed(args)
    _echo(args, seed)
    subword = _load_subword(args)
    corpora = [corpus_io.read_ts_file(path) for path in args.data]
    import torch

    torch.manual_seed(seed)  # covers model init; the trainer re-seeds stepping
    model = sa_model.SaTransformer(_model_config_from_args(args, len(subword.vocab)))
    if args.init_encoder:
        sa_model.import_pretrained_encoder(model, args.init_encoder)
    cfg = _train_config(args, "pretrain", seed)
    metrics = trainer_mod.pretrain(model, corpora, cfg, subword)
    model.save_checkpoint(args.out)
    if metrics:
        print(f"pretrained {cfg.max_steps} steps, final loss {metrics[-1]['loss']:.4f}")
    return EXIT_OK


def cmd_finetune(args) -> int:
    seed = _resolve_seed(args)
    _echo(args, seed)
    subword = _load_subword(args)
    train_examples = corpus_io.read_ts_file(args.data)
    dev_examples = corpus_io.read_ts_file(args.dev) if args.dev else None
    import torch

    torch.manual_seed(seed)
    if args.from_scratch:
        model = sa_model.SaTransformer(_model_config_from_args(args, len(subword.vocab)))
    else:
        if not args.model:
            raise UsageError("--model is required unless --from-scratch is set")
        model = sa_model.load_checkpoint(args.model)
    cfg = _train_config(args, "finetune", seed)
    metrics = trainer_mod.finetune(model, train_examples, cfg, subword, dev_examples)
    model.save_checkpoint(args.out)
    if metrics:
        print(f"finetuned {cfg.max_steps} steps, final loss {metrics[-1]['loss']:.4f}")
    return EXIT_OK


def cmd_suggest(args) -> int:
    seed = _resolve_seed(args)
    _echo(args, seed)
    subword = _load_subword(args)
    model = sa_model.load_checkpoint(args.model)
    translation = args.translation.split()
    i, j = args.span
    if not (0 <= i <= j <= len(translation)):
        raise corpus_io.SpanBoundsError(f"span [{i}, {j}) invalid for translation")
    hint = list(args.hint.replace(" ", "")) if args.hint else None
    example = corpus_io.TsExample(
        source=args.source.split(),
        translation=translation,
        span_start=i,
        span_end=j,
        alternatives=[[]],
        hint=hint,
    )
    encoded = data_mod.encode_example(example, subword, with_hint=hint is not None)
    hyps = decoder_search.beam_search(
        model, encoded, subword, beam_size=args.beam, max_len=args.max_len,
        alpha=args.alpha,
    )
    for rank, h in enumerate(hyps[: args.k], start=1):
        words = subword_mod.undo_bpe(subword_mod.decode(subword, h.tokens))
        print(f"{rank}\t{h.score:.4f}\t{' '.join(words)}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    seed = _resolve_seed(args)
    _echo(args, seed)
    subword = _load_subword(args)
    model = sa_model.load_checkpoint(args.model)
    examples = corpus_io.read_ts_file(args.test)
    result = evaluator.evaluate_testset(
        model, examples, subword, beam_size=args.beam, max_len=args.max_len,
        mode=args.mode, dump_path=args.dump,
    )
    print(str(result.report))
    print(json.dumps({**result.report.to_dict(), "exact_match": result.exact_match}))
    return EXIT_OK


def cmd_serve(args) -> int:
    seed = _resolve_seed(args)
    _echo(args, seed)
    import uvicorn

    from . import server as server_mod

    subword = _load_subword(args)
    model = sa_model.load_checkpoint(args.model)
    app = server_mod.create_app(
        model, subword, model_id=Path(args.model).name, beam_size=args.beam,
        ui_dir=args.ui_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="ts", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn-bpe", help="learn BPE merges from tokenized text")
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--merges-count", type=int, default=4000)
    p.add_argument("--out-merges", required=True)
    p.add_argument("--out-vocab", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_learn_bpe)

    p = sub.add_parser("apply-bpe", help="apply a learned BPE model to text")
    p.add_argument("--merges", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_apply_bpe)

    p = sub.add_parser("train-lm", help="train an n-gram language model")
    p.add_argument("--input", required=True)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--smoothing", choices=["kn", "addk"], default="kn")
    p.add_argument("--k", type=float, default=0.01)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("align", help="word-align a parallel corpus")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--iterations", type=int, default=5)
    p.add_argument("--mode", default="grow-diag-final-and")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("build-synth", help="construct a synthetic TS corpus")
    p.add_argument("--method", choices=["golden", "pseudo", "align"], required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--target", help="reference target file (golden/align)")
    p.add_argument("--mt", help="machine-translation file (pseudo/align)")
    p.add_argument("--beta", type=float, default=10.0)
    p.add_argument("--k", type=int, default=2, help="samples per sentence")
    p.add_argument("--max-span-len", type=int, default=6)
    p.add_argument("--p-null", type=float, default=0.1)
    p.add_argument("--hint-prob", type=float, default=0.0)
    p.add_argument("--em-iterations", type=int, default=5)
    p.add_argument("--lm-order", type=int, default=4)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_build_synth)

    p = sub.add_parser("make-toy", help="generate the deterministic toy benchmark")
    p.add_argument("--out", required=True)
    p.add_argument("--pairs", type=int, default=10000)
    p.add_argument("--golden-train", type=int, default=500)
    p.add_argument("--golden-test", type=int, default=500)
    p.add_argument("--hint-prob", type=float, default=0.0)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_make_toy)

    p = sub.add_parser("pretrain", help="pretrain on synthetic TS corpora")
    p.add_argument("--data", nargs="+", required=True)
    p.add_argument("--merges", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--init-encoder",
                   help="optional checkpoint for first-phase encoder import")
    p.add_argument("--seed", type=int)
    _add_model_flags(p)
    _add_train_flags(p, default_steps=2000, default_lr=3e-4)
    p.set_defaults(func=cmd_pretrain)

    p = sub.add_parser("finetune", help="finetune on golden TS data")
    p.add_argument("--data", required=True)
    p.add_argument("--dev")
    p.add_argument("--model")
    p.add_argument("--from-scratch", action="store_true")
    p.add_argument("--merges", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    _add_model_flags(p)
    _add_train_flags(p, default_steps=100, default_lr=1e-4)
    p.set_defaults(func=cmd_finetune)

    p = sub.add_parser("suggest", help="suggest alternatives for one span")
    p.add_argument("--model", required=True)
    p.add_argument("--merges", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--translation", required=True)
    p.add_argument("--span", type=int, nargs=2, required=True)
    p.add_argument("--hint")
    p.add_argument("--beam", type=int, default=4)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--max-len", type=int, default=32)
    p.add_argument("--alpha", type=float, default=0.6)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_suggest)

    p = sub.add_parser("evaluate", help="BLEU-evaluate a model on a TS test file")
    p.add_argument("--model", required=True)
    p.add_argument("--merges", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--mode", choices=["word", "char"], default="word")
    p.add_argument("--beam", type=int, default=4)
    p.add_argument("--max-len", type=int, default=32)
    p.add_argument("--dump")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("serve", help="run the suggestion HTTP server")
    p.add_argument("--model", required=True)
    p.add_argument("--merges", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8077)
    p.add_argument("--beam", type=int, default=4)
    p.add_argument("--ui-dir")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_serve)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (corpus_io.RecordError, corpus_io.SpanBoundsError, ValueError,
            OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run())
