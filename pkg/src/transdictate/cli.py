"""Command-line interface.

Exit codes: 0 success, 1 internal invariant failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from transdictate import classlm, corpus, decoder, evaluate, phonosim, synth, transmodel
from transdictate.errors import InputError, InvariantError

log = logging.getLogger("transdictate")


class UsageError(InputError):
    pass


def _existing(*paths):
    for p in paths:
        if p is not None and not Path(p).is_file():
            raise UsageError(f"no such file: {p}")


def _smoothing(spec):
    try:
        return transmodel.SmoothingConfig.parse(spec)
    except InputError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _len_range(text):
    try:
        lo, hi = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected MIN,MAX, got {text!r}") from None
    return lo, hi


# -- subcommands ----------------------------------------------------------

def cmd_train_lm(args):
    _existing(args.bitext, args.lexicon)
    pairs = corpus.load_bitext(args.bitext)
    lexicon = corpus.load_lexicon(args.lexicon)
    if args.iters is not None:
        max_iters, rel_tol = args.iters, -math.inf
    else:
        max_iters, rel_tol = args.max_iters, args.rel_tol
    lm = classlm.train_class_lm([p.french for p in pairs], lexicon, max_iters=max_iters,
                                rel_tol=rel_tol, smoothing=args.lm_smoothing)
    classlm.write_class_lm(lm, args.out)
    log.info("wrote %s (%d EM iterations)", args.out, len(lm.history) - 1)


def cmd_train_tm(args):
    _existing(args.bitext, args.lm)
    pairs = corpus.load_bitext(args.bitext)
    lm = classlm.load_class_lm(args.lm)
    kept = corpus.filter_pairs(pairs, args.max_tokens)
    dropped = len(pairs) - len(kept)
    ratio = len(kept) / len(pairs) if pairs else 0.0
    log.info("filter: kept %d of %d pairs (%.1f%%), %d dropped", len(kept), len(pairs),
             100 * ratio, dropped)
    tagged = [(p, classlm.tag(p.french, lm)) for p in kept]
    if args.iters is not None:
        max_iters, rel_tol = args.iters, -math.inf
    else:
        max_iters, rel_tol = args.max_iters, args.rel_tol
    joint = transmodel.train_bilexical(tagged, lm.num_classes, max_iters=max_iters,
                                       rel_tol=rel_tol, prune_floor=args.prune_floor)
    transmodel.write_joint(joint, lm.class_names, args.out)
    log.info("wrote %s (%d EM iterations)", args.out, len(joint.history) - 1)


def _read_sentences(path):
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line:
            continue
        out.append(tuple(line.split("\t")[0].split(" ")))
    return out


def cmd_tag(args):
    _existing(args.input, args.lm)
    lm = classlm.load_class_lm(args.lm)
    lines = []
    for sent in _read_sentences(args.input):
        lines.append(" ".join(lm.class_names[c] for c in classlm.tag(sent, lm)))
    _emit("\n".join(lines) + "\n", args.out)


def _channel(args):
    return phonosim.ChannelConfig(distance_weight=args.distance_weight, noise_sd=args.noise_sd,
                                  n=args.n, seed=args.seed)


def _simulate(bitext_pairs, phones_path, args):
    pdict = phonosim.load_phonetic_dict(phones_path)
    pdict = phonosim.with_fallback(pdict, {w for p in bitext_pairs for w in p.french})
    return phonosim.simulate_corpus([p.french for p in bitext_pairs], pdict, _channel(args))


def cmd_simulate(args):
    _existing(args.bitext, args.phones)
    pairs = corpus.load_bitext(args.bitext)
    lattices = _simulate(pairs, args.phones, args)
    phonosim.write_lattices(lattices, args.out)
    kept = sum(t is not None for lat in lattices for t in lat.truth_index)
    total = sum(len(lat) for lat in lattices)
    log.info("wrote %d lattices; spoken word in the n-best list at %d/%d positions",
             len(lattices), kept, total)


def cmd_decode(args):
    _existing(args.lm, args.tm)
    if args.simulate:
        _existing(args.simulate, args.phones)
        pairs = corpus.load_bitext(args.simulate)
        lattices = _simulate(pairs, args.phones, args)
    else:
        if not args.lattice or not args.source:
            raise UsageError("decode needs --lattice with --source, or --simulate with --phones")
        _existing(args.lattice, args.source)
        pairs = corpus.load_bitext(args.source)
        lattices = phonosim.load_lattices(args.lattice)
        if len(lattices) != len(pairs):
            raise UsageError(f"{len(lattices)} lattices but {len(pairs)} source sentences")
    lm = classlm.load_class_lm(args.lm)
    model = transmodel.load_trans_model(args.tm, lm)
    cfg = args.smoothing

    def run(item):
        lat, pair = item
        return decoder.decode(decoder.prune(lat, args.n), pair.english, model, cfg,
                              args.acoustic_weight)

    items = list(zip(lattices, pairs))
    if args.threads > 1:
        with ThreadPoolExecutor(args.threads) as pool:
            results = list(pool.map(run, items))
    else:
        results = [run(it) for it in items]

    lines = [
        f"{' '.join(r.words)}\t{' '.join(lm.class_names[c] for c in r.classes)}\t{r.log_score:.17g}"
        for r in results
    ]
    _emit("\n".join(lines) + "\n", args.out)

    refs = [p.french for p in pairs]
    if all(len(r.words) == len(ref) for r, ref in zip(results, refs)):
        rep = evaluate.word_accuracy([r.words for r in results], refs,
                                     evaluate.content_class_ids(lm.lexicon), lm)
        if cfg.normalized:
            rep.perplexity = evaluate.perplexity(pairs, model, cfg)
        _emit(evaluate.format_report([(str(cfg), rep)]), args.report, to_stdout=args.out is not None)


def cmd_perplexity(args):
    _existing(args.bitext, args.lm, args.tm)
    pairs = corpus.load_bitext(args.bitext)
    lm = classlm.load_class_lm(args.lm)
    model = transmodel.load_trans_model(args.tm, lm)
    ppl = evaluate.perplexity(pairs, model, args.smoothing)
    print(f"perplexity={ppl:.6f}")


def _load_hyps(path):
    hyps = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line:
            hyps.append(tuple(line.split("\t")[0].split(" ")))
    return hyps


def cmd_eval(args):
    _existing(args.hyps, args.refs, args.lm)
    lm = classlm.load_class_lm(args.lm)
    refs = [p.french for p in corpus.load_bitext(args.refs)]
    names = evaluate.DEFAULT_CONTENT_CLASSES
    if args.content_classes:
        names = args.content_classes.split(",")
        for name in names:
            lm.lexicon.class_id(name)
    rep = evaluate.word_accuracy(_load_hyps(args.hyps), refs,
                                 evaluate.content_class_ids(lm.lexicon, names), lm)
    print(evaluate.format_report([(Path(args.hyps).stem, rep)]), end="")


def cmd_synth(args):
    cfg = synth.SynthConfig(
        vf=args.vf, ve=args.ve, num_classes=args.classes, concentration=args.concentration,
        train_size=args.train_size, test_size=args.test_size, train_len=args.train_len,
        test_len=args.test_len, ambiguity=args.ambiguity, overlong_rate=args.overlong_rate,
        seed=args.seed,
    )
    paths = synth.write_synth(synth.synthesize(cfg), args.out_dir)
    for name, path in paths.items():
        log.info("%s: %s", name, path)


def _emit(text, path, to_stdout=True):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    elif to_stdout:
        sys.stdout.write(text)


# -- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="transdictate", description=__doc__.splitlines()[0])
    parser.add_argument("-q", "--quiet", action="store_true", help="only log warnings")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-lm", help="train the tri-class LM on the French side")
    p.add_argument("--bitext", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--iters", type=int, help="run exactly this many EM iterations")
    p.add_argument("--max-iters", type=int, default=20)
    p.add_argument("--rel-tol", type=float, default=1e-4)
    p.add_argument("--lm-smoothing", type=float, default=1e-6,
                   help="add-lambda applied to contextual rows after training")
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("train-tm", help="filter, tag, and train bi-lexical parameters")
    p.add_argument("--bitext", required=True)
    p.add_argument("--lm", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-tokens", type=int, default=40)
    p.add_argument("--iters", type=int, help="run exactly this many EM iterations")
    p.add_argument("--max-iters", type=int, default=10)
    p.add_argument("--rel-tol", type=float, default=1e-4)
    p.add_argument("--prune-floor", type=float, default=1e-9)
    p.set_defaults(func=cmd_train_tm)

    p = sub.add_parser("tag", help="tag French sentences with their most likely classes")
    p.add_argument("--lm", required=True)
    p.add_argument("--input", required=True, help="bitext or one sentence per line")
    p.add_argument("--out")
    p.set_defaults(func=cmd_tag)

    def channel_flags(p):
        p.add_argument("--n", type=int, default=20)
        p.add_argument("--noise-sd", type=float, default=1.0)
        p.add_argument("--distance-weight", type=float, default=2.0)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("simulate", help="simulate n-best lattices for French sentences")
    p.add_argument("--bitext", required=True)
    p.add_argument("--phones", required=True)
    p.add_argument("--out", required=True)
    channel_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("decode", help="decode lattices with the translation model")
    p.add_argument("--lm", required=True)
    p.add_argument("--tm", required=True)
    p.add_argument("--lattice")
    p.add_argument("--source", help="bitext giving the English source (and French references)")
    p.add_argument("--simulate", metavar="BITEXT", help="simulate lattices from this bitext")
    p.add_argument("--phones")
    p.add_argument("--smoothing", type=_smoothing, default="interp:0.85",
                   help="interp:W | max | etest:T")
    p.add_argument("--acoustic-weight", type=float, default=1.0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--report")
    channel_flags(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("perplexity", help="per-token perplexity (interpolate smoothing only)")
    p.add_argument("--bitext", required=True)
    p.add_argument("--lm", required=True)
    p.add_argument("--tm", required=True)
    p.add_argument("--smoothing", type=_smoothing, default="interp:0.85")
    p.set_defaults(func=cmd_perplexity)

    p = sub.add_parser("eval", help="score decoder output against references")
    p.add_argument("--hyps", required=True)
    p.add_argument("--refs", required=True)
    p.add_argument("--lm", required=True)
    p.add_argument("--content-classes")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="write a synthetic corpus with known parameters")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--vf", type=int, default=200)
    p.add_argument("--ve", type=int, default=200)
    p.add_argument("--classes", type=int, default=5)
    p.add_argument("--concentration", type=float, default=0.9)
    p.add_argument("--train-size", type=int, default=5000)
    p.add_argument("--test-size", type=int, default=50)
    p.add_argument("--train-len", type=_len_range, default=(5, 25))
    p.add_argument("--test-len", type=_len_range, default=(15, 20))
    p.add_argument("--ambiguity", type=float, default=0.1)
    p.add_argument("--overlong-rate", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    try:
        args.func(args)
    except InvariantError as exc:
        print(f"transdictate: internal error: {exc}", file=sys.stderr)
        return 1
    except (InputError, OverflowError) as exc:
        print(f"transdictate: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
