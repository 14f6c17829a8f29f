"""Bi-lexical translation parameters and sentence-conditioned scoring.

Training uses a uniform-alignment model in which each French
(word, class) event is generated by one English position or by the
NULL pseudo-word at position 0.  The trained joint table ``p(f, c | e)``
is converted to ``p(f | c, e)``; at run time these are averaged over
the positions of the English sentence and combined with the class LM's
``p(f | c)`` by one of three smoothing schemes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from transdictate import kernels
from transdictate.classlm import ClassLM, _log
from transdictate.corpus import NULL_TOKEN, SentencePair
from transdictate.errors import InputError, ParseError

log = logging.getLogger(__name__)

MAX_ALIGNMENT_COUNT = 2**63 - 1


def alignment_count(f_len: int, e_len: int) -> int:
    """Number of alignments, ``(e_len + 1) ** f_len``."""
    if f_len < 1 or e_len < 0:
        raise InputError("need f_len >= 1 and e_len >= 0")
    if f_len * math.log(e_len + 1) > math.log(MAX_ALIGNMENT_COUNT):
        raise OverflowError(
            f"(|e|+1)^|f| = {e_len + 1}^{f_len} exceeds 64 bits; use log_alignment_count"
        )
    return (e_len + 1) ** f_len


def log_alignment_count(f_len: int, e_len: int) -> float:
    if f_len < 1 or e_len < 0:
        raise InputError("need f_len >= 1 and e_len >= 0")
    return f_len * math.log(e_len + 1)


@dataclass
class JointParams:
    """``table[e][f]`` is the vector ``p(f, c | e)`` over classes ``c``."""

    num_classes: int
    table: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)
    history: list[float] = field(default_factory=list, compare=False)

    def prob(self, f: str, c: int, e: str) -> float:
        vec = self.table.get(e, {}).get(f)
        return 0.0 if vec is None else float(vec[c])


@dataclass
class BiLexicalParams:
    """``table[e][f]`` is the vector ``p(f | c, e)`` over classes ``c``."""

    num_classes: int
    table: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)

    def prob(self, f: str, c: int, e: str) -> float:
        vec = self.table.get(e, {}).get(f)
        return 0.0 if vec is None else float(vec[c])

    def same_as(self, other: "BiLexicalParams") -> bool:
        if self.num_classes != other.num_classes or self.table.keys() != other.table.keys():
            return False
        for e, row in self.table.items():
            orow = other.table[e]
            if row.keys() != orow.keys():
                return False
            if not all(np.array_equal(v, orow[f]) for f, v in row.items()):
                return False
        return True


# -- training -------------------------------------------------------------

class _AlignmentCorpus:
    """Flattened (French position x English position) links for vectorized EM.

    Only (event, conditioner) combinations that co-occur in some pair can
    receive mass, so they are enumerated once and indexed.
    """

    def __init__(self, tagged_pairs, num_classes):
        events: dict[tuple[str, int], int] = {}
        conds: dict[str, int] = {NULL_TOKEN: 0}
        keys, seg_lens = [], []
        self.log_norm = 0.0
        self.num_tokens = 0
        for pair, classes in tagged_pairs:
            if len(classes) != len(pair.french):
                raise InputError("class sequence length differs from French length")
            if any(not 0 <= int(c) < num_classes for c in classes):
                raise InputError("class id out of range in tagged input")
            ev = np.array(
                [events.setdefault((f, int(c)), len(events)) for f, c in zip(pair.french, classes)],
                dtype=np.int64,
            )
            ce = np.array([0] + [conds.setdefault(e, len(conds)) for e in pair.english],
                          dtype=np.int64)
            keys.append((ev[:, None], ce))
            seg_lens.append(np.full(len(ev), len(ce)))
            self.log_norm += len(ev) * math.log(len(ce))
            self.num_tokens += len(ev)
        n_conds = len(conds)
        flat = np.concatenate([(ev * n_conds + ce[None, :]).ravel() for ev, ce in keys])
        uniq, self.link_param = np.unique(flat, return_inverse=True)
        self.param_event = uniq // n_conds
        self.param_cond = uniq % n_conds
        self.seg_lens = np.concatenate(seg_lens)
        self.seg_starts = np.concatenate([[0], np.cumsum(self.seg_lens)[:-1]])
        self.events = list(events)
        self.conds = list(conds)
        self.n_conds = n_conds


def _cond_normalize(theta, cond, n_conds):
    totals = np.bincount(cond, weights=theta, minlength=n_conds)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(totals[cond] > 0, theta / totals[cond], 0.0)


def _bilex_e_step(theta, ac):
    vals = theta[ac.link_param]
    pos = np.add.reduceat(vals, ac.seg_starts)
    with np.errstate(divide="ignore"):
        ll = float(np.log(pos).sum()) - ac.log_norm
    with np.errstate(invalid="ignore", divide="ignore"):
        post = np.where(np.repeat(pos, ac.seg_lens) > 0, vals / np.repeat(pos, ac.seg_lens), 0.0)
    counts = np.bincount(ac.link_param, weights=post, minlength=len(theta))
    return ll, counts


def train_bilexical(
    tagged_pairs: Sequence[tuple[SentencePair, Sequence[int]]],
    num_classes: int | None = None,
    max_iters: int = 10,
    rel_tol: float = 1e-4,
    prune_floor: float = 1e-9,
) -> JointParams:
    """Estimate ``p(f, c | e)`` by EM over uniformly weighted alignments.

    The E-step distributes each French (word, class) event over the NULL
    position and every English position in proportion to the current
    parameters; the M-step renormalizes per English word.  Parameters
    below ``prune_floor`` are dropped after each M-step and their rows
    renormalized.  Initialization is uniform over the events that
    co-occur with each English word.
    """
    if not tagged_pairs:
        raise InputError("empty training set")
    if max_iters < 1:
        raise InputError("max_iters must be >= 1")
    if num_classes is None:
        num_classes = 1 + max(int(c) for _, cs in tagged_pairs for c in cs)
    ac = _AlignmentCorpus(tagged_pairs, num_classes)

    per_cond = np.bincount(ac.param_cond, minlength=ac.n_conds).astype(np.float64)
    theta = 1.0 / per_cond[ac.param_cond]
    ll, counts = _bilex_e_step(theta, ac)
    history = [ll]
    log.info("bilexical: initial log-likelihood %.6f (%d params)", ll, len(theta))
    for it in range(1, max_iters + 1):
        theta = _cond_normalize(counts, ac.param_cond, ac.n_conds)
        if prune_floor > 0:
            theta = _cond_normalize(np.where(theta < prune_floor, 0.0, theta),
                                    ac.param_cond, ac.n_conds)
        ll, counts = _bilex_e_step(theta, ac)
        gain = (ll - history[-1]) / abs(history[-1]) if history[-1] else 0.0
        history.append(ll)
        log.info("bilexical: iteration %d log-likelihood %.6f (%d nonzero)",
                 it, ll, int(np.count_nonzero(theta)))
        if gain < rel_tol:
            break

    table: dict[str, dict[str, np.ndarray]] = {}
    for p in np.flatnonzero(theta > 0):
        f, c = ac.events[ac.param_event[p]]
        e = ac.conds[ac.param_cond[p]]
        row = table.setdefault(e, {})
        vec = row.get(f)
        if vec is None:
            vec = row[f] = np.zeros(num_classes)
        vec[c] = theta[p]
    return JointParams(num_classes, table, history)


def to_bilexical(joint: JointParams) -> BiLexicalParams:
    """``p(f | c, e) = p(f, c | e) / sum_f p(f, c | e)``."""
    out: dict[str, dict[str, np.ndarray]] = {}
    C = joint.num_classes
    for e, row in joint.table.items():
        mass = np.zeros(C)
        for f in sorted(row):  # fixed order so reloaded tables divide identically
            mass += row[f]
        inv = np.divide(1.0, mass, out=np.zeros(C), where=mass > 0)
        new_row = {f: vec * inv for f, vec in row.items() if vec.any()}
        if new_row:
            out[e] = new_row
    return BiLexicalParams(C, out)


# -- scoring --------------------------------------------------------------

@dataclass(frozen=True)
class SmoothingConfig:
    method: Literal["interpolate", "maximum", "e_test"] = "interpolate"
    weight: float | None = 0.85
    threshold: float | None = None

    def __post_init__(self):
        if self.method == "interpolate":
            if self.weight is None or not 0.0 <= self.weight <= 1.0:
                raise InputError("interpolation weight must be in [0, 1]")
            if self.threshold is not None:
                raise InputError("threshold only applies to e_test")
        elif self.method == "maximum":
            if self.weight is not None or self.threshold is not None:
                raise InputError("maximum takes no parameters")
        elif self.method == "e_test":
            if self.threshold is None or not self.threshold > 0:
                raise InputError("e_test threshold must be positive")
            if self.weight is not None:
                raise InputError("weight only applies to interpolate")
        else:
            raise InputError(f"unknown smoothing method {self.method!r}")

    @classmethod
    def interpolate(cls, weight: float = 0.85) -> "SmoothingConfig":
        return cls("interpolate", weight, None)

    @classmethod
    def maximum(cls) -> "SmoothingConfig":
        return cls("maximum", None, None)

    @classmethod
    def e_test(cls, threshold: float = 0.30) -> "SmoothingConfig":
        return cls("e_test", None, threshold)

    @classmethod
    def parse(cls, spec: str) -> "SmoothingConfig":
        """Parse ``interp:W``, ``max`` or ``etest:T``."""
        name, sep, arg = spec.partition(":")
        try:
            if name == "max" and not sep:
                return cls.maximum()
            if name == "interp" and arg:
                return cls.interpolate(float(arg))
            if name == "etest" and arg:
                return cls.e_test(float(arg))
        except ValueError:
            pass
        raise InputError(f"bad smoothing spec {spec!r} (expected interp:W, max, or etest:T)")

    @property
    def normalized(self) -> bool:
        return self.method == "interpolate"

    def __str__(self):
        if self.method == "interpolate":
            return f"interp:{self.weight:g}"
        if self.method == "maximum":
            return "max"
        return f"etest:{self.threshold:g}"


@dataclass(eq=False)
class TransModel:
    lm: ClassLM
    bilexical: BiLexicalParams
    joint: JointParams | None = None

    def __post_init__(self):
        if self.bilexical.num_classes != self.lm.num_classes:
            raise InputError("bilexical and LM class counts differ")


def sentence_lexical_vectors(f: str, e_sent: Sequence[str], params: BiLexicalParams):
    """Average and maximum of ``p(f | c, e_j)`` over NULL and every English token."""
    C = params.num_classes
    acc = np.zeros(C)
    best = np.zeros(C)
    table = params.table
    for e in (NULL_TOKEN, *e_sent):
        row = table.get(e)
        if row is None:
            continue
        vec = row.get(f)
        if vec is not None:
            acc += vec
            np.maximum(best, vec, out=best)
    return acc / (len(e_sent) + 1), best


def sentence_lexical(f: str, c: int, e_sent: Sequence[str], params: BiLexicalParams) -> float:
    """``p(f | c, e_sent)``: mean of ``p(f | c, e_j)`` over ``j = 0..|e|``."""
    return float(sentence_lexical_vectors(f, e_sent, params)[0][c])


def smoothed_vector(f: str, e_sent: Sequence[str], model: TransModel,
                    cfg: SmoothingConfig) -> np.ndarray:
    """Smoothed score of ``f`` for every class, zero outside its lexicon classes."""
    trans, best = sentence_lexical_vectors(f, e_sent, model.bilexical)
    lex = model.lm.lexical_vector(f)
    if cfg.method == "interpolate":
        w = cfg.weight
        out = w * trans + (1.0 - w) * lex
    elif cfg.method == "maximum":
        out = np.maximum(trans, lex)
    else:
        with np.errstate(invalid="ignore", divide="ignore"):
            use_trans = (trans > 0) & (best / np.where(trans > 0, trans, 1.0) > cfg.threshold)
        out = np.where(use_trans, trans, lex)
    allowed = model.lm.lexicon.classes_of(f)
    if len(allowed) < model.lm.num_classes:
        mask = np.zeros(model.lm.num_classes, dtype=bool)
        mask[list(allowed)] = True
        out = np.where(mask, out, 0.0)
    return out


def smoothed_score(f: str, c: int, e_sent: Sequence[str], model: TransModel,
                   cfg: SmoothingConfig) -> float:
    return float(smoothed_vector(f, e_sent, model, cfg)[c])


def emission_matrix(french: Sequence[str], english: Sequence[str], model: TransModel,
                    cfg: SmoothingConfig) -> np.ndarray:
    return np.array([smoothed_vector(f, english, model, cfg) for f in french]).reshape(
        len(french), model.lm.num_classes)


def tm_sentence_logprob(pair: SentencePair, model: TransModel, cfg: SmoothingConfig) -> float:
    """Forward sum over class sequences with smoothed sentence-conditioned emissions."""
    emit = emission_matrix(pair.french, pair.english, model, cfg)
    return float(kernels.forward_logprob(model.lm.log_contextual, _log(emit)))


# -- model file -----------------------------------------------------------

def write_joint(joint: JointParams, class_names: Sequence[str], path) -> None:
    if len(class_names) != joint.num_classes:
        raise InputError("class name count differs from model class count")
    lines = ["BILEX v1", "CLASSES " + ",".join(class_names)]
    for e in sorted(joint.table):
        row = joint.table[e]
        for f in sorted(row):
            vec = row[f]
            for c in range(joint.num_classes):
                if vec[c] > 0:
                    lines.append(f"J {f} {class_names[c]} {e} {vec[c]:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_joint(path) -> tuple[JointParams, tuple[str, ...]]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ParseError("invalid UTF-8", path) from None
    if not lines or lines[0] != "BILEX v1":
        raise ParseError("missing 'BILEX v1' header", path, 1)
    if len(lines) < 2 or not lines[1].startswith("CLASSES "):
        raise ParseError("missing CLASSES line", path, 2)
    names = tuple(lines[1][len("CLASSES "):].split(","))
    cls = {n: i for i, n in enumerate(names)}
    C = len(names)
    table: dict[str, dict[str, np.ndarray]] = {}
    for lineno, line in enumerate(lines[2:], 3):
        if not line:
            continue
        parts = line.split(" ")
        try:
            if parts[0] != "J" or len(parts) != 5:
                raise ValueError
            _, f, label, e, prob = parts
            vec = table.setdefault(e, {}).setdefault(f, np.zeros(C))
            vec[cls[label]] = float(prob)
        except (KeyError, ValueError):
            raise ParseError(f"bad record {line!r}", path, lineno) from None
    return JointParams(C, table), names


def load_trans_model(path, lm: ClassLM) -> TransModel:
    joint, names = load_joint(path)
    if names != lm.class_names:
        raise InputError(f"{path}: class inventory differs from the language model's")
    return TransModel(lm, to_bilexical(joint), joint)
