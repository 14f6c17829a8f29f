"""Word accuracy with content/function error split, and perplexity."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from transdictate.classlm import ClassLM, tag
from transdictate.corpus import Lexicon, SentencePair
from transdictate.errors import InputError, InvariantError
from transdictate.transmodel import SmoothingConfig, TransModel, tm_sentence_logprob

log = logging.getLogger(__name__)

DEFAULT_CONTENT_CLASSES = ("NOUN", "VERB", "ADJ", "ADV", "PROPER", "NUM")
PUNCT_CLASS = "PUNCT"


@dataclass
class EvalReport:
    words_total: int
    words_correct: int
    content_errors: int
    function_errors: int
    perplexity: float | None = None
    punct_total: int = 0
    punct_errors: int = 0

    def __post_init__(self):
        self.check()

    def check(self):
        if not 0 <= self.words_correct <= self.words_total:
            raise InvariantError("words_correct out of range")
        if self.content_errors + self.function_errors != self.words_total - self.words_correct:
            raise InvariantError("content + function errors != total errors")

    @property
    def errors(self) -> int:
        return self.words_total - self.words_correct

    @property
    def accuracy(self) -> float:
        return self.words_correct / self.words_total if self.words_total else 0.0

    def correct_str(self) -> str:
        return f"{self.words_correct} ({100 * self.accuracy:.1f}%)"


def content_class_ids(lexicon: Lexicon, names: Iterable[str] = DEFAULT_CONTENT_CLASSES) -> set[int]:
    """Ids of the named classes that exist in ``lexicon``."""
    return {lexicon.class_names.index(n) for n in names if n in lexicon.class_names}


def word_accuracy(hyps: Sequence[Sequence[str]], refs: Sequence[Sequence[str]],
                  content_classes: set[int], lm: ClassLM) -> EvalReport:
    """Positional exact-match scoring; errors split by the reference word's tagged class."""
    if len(hyps) != len(refs):
        raise InputError(f"{len(hyps)} hypotheses for {len(refs)} references")
    punct = lm.class_names.index(PUNCT_CLASS) if PUNCT_CLASS in lm.class_names else None
    total = correct = content = function = p_total = p_err = 0
    for k, (hyp, ref) in enumerate(zip(hyps, refs)):
        if len(hyp) != len(ref):
            raise InputError(f"sentence {k}: hypothesis has {len(hyp)} tokens, reference {len(ref)}")
        classes = tag(ref, lm)
        for h, r, c in zip(hyp, ref, classes):
            total += 1
            ok = h == r
            correct += ok
            if c == punct:
                p_total += 1
                p_err += not ok
            if not ok:
                if c in content_classes:
                    content += 1
                else:
                    function += 1
    return EvalReport(total, correct, content, function, punct_total=p_total, punct_errors=p_err)


def corpus_logprob(pairs: Sequence[SentencePair], model: TransModel, cfg: SmoothingConfig):
    """Return ``(sum of log-probs, number of predicted events, indices of impossible sentences)``."""
    total = 0.0
    events = 0
    bad = []
    for k, pair in enumerate(pairs):
        lp = tm_sentence_logprob(pair, model, cfg)
        events += len(pair.french) + 1
        if math.isinf(lp):
            bad.append(k)
        else:
            total += lp
    return total, events, bad


def perplexity(pairs: Sequence[SentencePair], model: TransModel, cfg: SmoothingConfig) -> float:
    """``exp(-sum log p / (tokens + sentences))``; one end event per sentence.

    Only interpolation gives a normalized distribution, so other methods
    are rejected.  The pure LM is ``interpolate`` with weight 0.
    """
    if not cfg.normalized:
        raise InputError("perplexity needs interpolate smoothing (other methods are unnormalized)")
    if not pairs:
        raise InputError("empty corpus")
    total, events, bad = corpus_logprob(pairs, model, cfg)
    if bad:
        log.warning("zero-probability sentence(s): %s", ", ".join(map(str, bad)))
        return math.inf
    return math.exp(-total / events)


def format_report(rows: Sequence[tuple[str, EvalReport]]) -> str:
    """Plain-text table (model, words correct, perplexity) followed by key=value lines."""
    head = ("Model", "Words Correct", "Content err", "Function err", "Perplexity")
    body = []
    for name, rep in rows:
        ppl = "--" if rep.perplexity is None else f"{rep.perplexity:.1f}"
        body.append((name, f"{rep.correct_str()} /{rep.words_total}", str(rep.content_errors),
                     str(rep.function_errors), ppl))
    widths = [max(len(r[i]) for r in [head, *body]) for i in range(len(head))]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*head), fmt.format(*("-" * w for w in widths))]
    lines += [fmt.format(*r) for r in body]
    lines.append("")
    for name, rep in rows:
        key = name.replace(" ", "_")
        lines += [
            f"{key}.words_total={rep.words_total}",
            f"{key}.words_correct={rep.words_correct}",
            f"{key}.accuracy={rep.accuracy:.6f}",
            f"{key}.content_errors={rep.content_errors}",
            f"{key}.function_errors={rep.function_errors}",
            f"{key}.punct_total={rep.punct_total}",
            f"{key}.punct_errors={rep.punct_errors}",
        ]
        if rep.perplexity is not None:
            lines.append(f"{key}.perplexity={rep.perplexity:.6f}")
    return "\n".join(lines) + "\n"
