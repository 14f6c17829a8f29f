"""Tri-class French language model.

Contextual parameters ``p(c_i | c_{i-2}, c_{i-1})`` live in a dense
``(C+1, C+1, C+1)`` array: index ``C`` is the boundary class in the two
history slots and the end-of-sentence event in the successor slot.
Lexical parameters ``p(f | c)`` are stored per word as a length-``C``
vector.  Log-probabilities use ``-inf`` for exact zeros.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from transdictate import kernels
from transdictate.corpus import Lexicon
from transdictate.errors import InputError, ParseError, UnknownWordError

log = logging.getLogger(__name__)

BOUNDARY_LABEL = "<B>"
END_LABEL = "<E>"


def _log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


@dataclass(eq=False)
class ClassLM:
    lexicon: Lexicon
    contextual: np.ndarray
    lexical: dict[str, np.ndarray]
    history: list[float] = field(default_factory=list)

    def __post_init__(self):
        C = self.lexicon.num_classes
        self.contextual = np.asarray(self.contextual, dtype=np.float64)
        if self.contextual.shape != (C + 1,) * 3:
            raise InputError(f"contextual table must have shape {(C + 1,) * 3}")
        for word, vec in self.lexical.items():
            if vec.shape != (C,):
                raise InputError(f"lexical vector for {word!r} has wrong length")
        self.log_contextual = _log(self.contextual)

    @property
    def num_classes(self) -> int:
        return self.lexicon.num_classes

    @property
    def class_names(self) -> tuple[str, ...]:
        return self.lexicon.class_names

    def lexical_vector(self, word: str) -> np.ndarray:
        """``p(word | c)`` for every class; raises for words outside the lexicon."""
        if word not in self.lexicon:
            raise UnknownWordError([word])
        vec = self.lexical.get(word)
        return vec if vec is not None else np.zeros(self.num_classes)

    def lexical_matrix(self, sentence: Sequence[str]) -> np.ndarray:
        missing = [w for w in sentence if w not in self.lexicon]
        if missing:
            raise UnknownWordError(missing)
        return np.array([self.lexical_vector(w) for w in sentence]).reshape(len(sentence), -1)

    def lexical_prob(self, word: str, c: int) -> float:
        vec = self.lexical.get(word)
        return 0.0 if vec is None else float(vec[c])

    def same_as(self, other: "ClassLM") -> bool:
        return (
            self.lexicon == other.lexicon
            and np.array_equal(self.contextual, other.contextual)
            and self.lexical.keys() == other.lexical.keys()
            and all(np.array_equal(v, other.lexical[k]) for k, v in self.lexical.items())
        )


# -- training -------------------------------------------------------------

def _normalize_rows(table):
    """Normalize over the last axis; all-zero rows become uniform."""
    totals = table.sum(axis=-1, keepdims=True)
    uniform = np.full_like(table, 1.0 / table.shape[-1])
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(totals > 0, table / totals, uniform)


def _normalize_columns(table):
    totals = table.sum(axis=0, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(totals > 0, table / totals, 0.0)


def _class_masks(vocab, lexicon):
    C = lexicon.num_classes
    mask = np.zeros((len(vocab), C), dtype=bool)
    unknown = []
    for i, word in enumerate(vocab):
        classes = lexicon.classes_of(word)
        if classes is None:
            unknown.append(word)
            mask[i, :] = True
        else:
            mask[i, list(classes)] = True
    if unknown:
        log.warning("%d training word(s) missing from the lexicon were given every class: %s",
                    len(unknown), " ".join(unknown[:10]) + (" ..." if len(unknown) > 10 else ""))
    return mask, unknown


class _EncodedCorpus:
    """Sentences as integer ids, grouped by length for batched kernels."""

    def __init__(self, sentences):
        self.vocab = sorted({w for s in sentences for w in s})
        index = {w: i for i, w in enumerate(self.vocab)}
        groups: dict[int, list[list[int]]] = {}
        for s in sentences:
            groups.setdefault(len(s), []).append([index[w] for w in s])
        self.groups = {L: np.array(rows, dtype=np.int64) for L, rows in sorted(groups.items())}
        self.freq = np.bincount(
            np.concatenate([g.ravel() for g in self.groups.values()]), minlength=len(self.vocab)
        ).astype(np.float64)
        self.num_tokens = int(self.freq.sum())


def _e_step(contextual, lexical, corpus):
    K = contextual.shape[0]
    C = lexical.shape[1]
    ctx_counts = np.zeros((K, K, K))
    lex_counts = np.zeros_like(lexical)
    total = 0.0
    for L, ids in corpus.groups.items():
        emit = lexical[ids]
        loglik, counts, gamma = kernels.forward_backward(contextual, emit)
        if not np.all(np.isfinite(loglik)):
            bad = int(np.flatnonzero(~np.isfinite(loglik))[0])
            words = [corpus.vocab[i] for i in ids[bad]]
            raise InputError("sentence has zero probability under every class assignment: "
                             + " ".join(words))
        total += float(loglik.sum())
        ctx_counts += counts
        np.add.at(lex_counts, ids.ravel(), gamma.reshape(-1, C))
    return total, ctx_counts, lex_counts


def train_class_lm(
    sentences: Sequence[Sequence[str]],
    lexicon: Lexicon,
    max_iters: int = 20,
    rel_tol: float = 1e-4,
    smoothing: float = 1e-6,
) -> ClassLM:
    """Fit contextual and lexical parameters by EM (forward-backward).

    Each word's classes are restricted to its lexicon entry.  After the
    last iteration every contextual row gets add-``smoothing``
    smoothing so no trigram is exactly zero.  The returned model's
    ``history`` holds the corpus log-likelihood before the first update
    and after each update.
    """
    if max_iters < 1:
        raise InputError("max_iters must be >= 1")
    if not sentences:
        raise InputError("empty training corpus")
    if any(len(s) == 0 for s in sentences):
        raise InputError("empty sentence in training corpus")

    C = lexicon.num_classes
    K = C + 1
    corpus = _EncodedCorpus(sentences)
    mask, unknown = _class_masks(corpus.vocab, lexicon)

    lexical = np.where(mask, (corpus.freq / mask.sum(axis=1))[:, None], 0.0)
    lexical = _normalize_columns(lexical)
    contextual = np.full((K, K, K), 1.0 / K)

    ll, ctx_counts, lex_counts = _e_step(contextual, lexical, corpus)
    history = [ll]
    log.info("class LM: initial log-likelihood %.6f (%d tokens)", ll, corpus.num_tokens)
    for it in range(1, max_iters + 1):
        contextual = _normalize_rows(ctx_counts)
        lexical = _normalize_columns(np.where(mask, lex_counts, 0.0))
        ll, ctx_counts, lex_counts = _e_step(contextual, lexical, corpus)
        gain = (ll - history[-1]) / abs(history[-1]) if history[-1] else 0.0
        history.append(ll)
        log.info("class LM: iteration %d log-likelihood %.6f", it, ll)
        if gain < rel_tol:
            break

    if smoothing > 0:
        contextual = (contextual + smoothing) / (1.0 + smoothing * K)

    entries = dict(lexicon.entries)
    for word in unknown:
        entries[word] = frozenset(range(C))
    model_lexicon = Lexicon(lexicon.class_names, entries) if unknown else lexicon
    lex_table = {w: lexical[i].copy() for i, w in enumerate(corpus.vocab) if lexical[i].any()}
    return ClassLM(model_lexicon, contextual, lex_table, history)


# -- inference ------------------------------------------------------------

def tag(sentence: Sequence[str], lm: ClassLM) -> list[int]:
    """Most likely class sequence (ties go to the lexicographically lowest)."""
    return viterbi_tag(sentence, lm)[0]


def viterbi_tag(sentence: Sequence[str], lm: ClassLM) -> tuple[list[int], float]:
    if not sentence:
        raise InputError("cannot tag an empty sentence")
    emit = lm.lexical_matrix(sentence)
    dead = [w for w, row in zip(sentence, emit) if not row.any()]
    if dead:
        raise InputError("word(s) with zero lexical probability in every class: " + " ".join(dead))
    path, score = kernels.viterbi(lm.log_contextual, _log(emit))
    if not np.isfinite(score):
        raise InputError("sentence has zero probability: " + " ".join(sentence))
    return [int(c) for c in path], float(score)


def path_logprob(sentence: Sequence[str], classes: Sequence[int], lm: ClassLM) -> float:
    """log p(classes, sentence), summed left to right."""
    C = lm.num_classes
    lt = lm.log_contextual
    a = b = C
    total = 0.0
    for word, c in zip(sentence, classes):
        total += lt[a, b, c] + _log(lm.lexical_vector(word)[c])
        a, b = b, c
    return float(total + lt[a, b, C])


def lm_sentence_logprob(sentence: Sequence[str], lm: ClassLM) -> float:
    """log of the sum over class sequences; ``-inf`` if the sentence is impossible."""
    if not sentence:
        raise InputError("empty sentence")
    emit = lm.lexical_matrix(sentence)
    return float(kernels.forward_logprob(lm.log_contextual, _log(emit)))


# -- model file -----------------------------------------------------------

def _fmt(p: float) -> str:
    return f"{p:.17g}"


def write_class_lm(lm: ClassLM, path) -> None:
    names = lm.class_names
    C = len(names)
    hist = [*names, BOUNDARY_LABEL]
    succ = [*names, END_LABEL]
    lines = ["TRICLASS v1", "CLASSES " + ",".join(names)]
    for word in sorted(lm.lexicon.entries):
        labels = ",".join(names[c] for c in sorted(lm.lexicon.entries[word]))
        lines.append(f"DICT {word} {labels}")
    for a in range(C + 1):
        for b in range(C + 1):
            for c in range(C + 1):
                lines.append(f"CTX {hist[a]} {hist[b]} {succ[c]} {_fmt(lm.contextual[a, b, c])}")
    for word in sorted(lm.lexical):
        vec = lm.lexical[word]
        for c in range(C):
            if vec[c] > 0:
                lines.append(f"LEX {word} {names[c]} {_fmt(vec[c])}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_class_lm(path) -> ClassLM:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ParseError("invalid UTF-8", path) from None
    lines = text.splitlines()
    if not lines or lines[0] != "TRICLASS v1":
        raise ParseError("missing 'TRICLASS v1' header", path, 1)
    if len(lines) < 2 or not lines[1].startswith("CLASSES "):
        raise ParseError("missing CLASSES line", path, 2)
    names = tuple(lines[1][len("CLASSES "):].split(","))
    C = len(names)
    hist = {n: i for i, n in enumerate(names)} | {BOUNDARY_LABEL: C}
    succ = {n: i for i, n in enumerate(names)} | {END_LABEL: C}
    cls = {n: i for i, n in enumerate(names)}
    entries: dict[str, set[int]] = {}
    contextual = np.zeros((C + 1,) * 3)
    lexical: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(lines[2:], 3):
        parts = line.split(" ")
        try:
            kind = parts[0]
            if kind == "DICT" and len(parts) == 3:
                entries.setdefault(parts[1], set()).update(cls[x] for x in parts[2].split(","))
            elif kind == "CTX" and len(parts) == 5:
                contextual[hist[parts[1]], hist[parts[2]], succ[parts[3]]] = float(parts[4])
            elif kind == "LEX" and len(parts) == 4:
                vec = lexical.setdefault(parts[1], np.zeros(C))
                vec[cls[parts[2]]] = float(parts[3])
            elif line:
                raise ValueError
        except (KeyError, ValueError, IndexError):
            raise ParseError(f"bad record {line!r}", path, lineno) from None
    return ClassLM(Lexicon(names, entries), contextual, lexical)
