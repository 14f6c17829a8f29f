"""Two-stage search: acoustic n-best pruning, then Viterbi over words x classes.

A path assigns every position a candidate word and a class.  Its score is

    acoustic_weight * sum_i acoustic(w_i)
        + sum_i [log p(c_i | c_{i-2}, c_{i-1}) + log smoothed(w_i, c_i, e)]
        + log p(END | c_{n-1}, c_n)

Ties are broken lexicographically over positions by (candidate rank,
class index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from transdictate import kernels
from transdictate.classlm import _log
from transdictate.errors import InputError
from transdictate.phonosim import NBestLattice, rank_candidates
from transdictate.transmodel import SmoothingConfig, TransModel, smoothed_vector

BRUTE_FORCE_LIMIT = 10**7
TIE_TOL = 1e-12


class DecodeError(InputError):
    pass


@dataclass
class DecodeResult:
    words: list[str]
    classes: list[int]
    log_score: float
    ranks: list[int]
    per_position_margins: list[float] | None = None


def prune(lattice: NBestLattice, n: int) -> NBestLattice:
    """Keep the ``n`` best candidates per position (ties: smaller word first).

    Nothing guarantees the jointly best sentence survives; ``truth_index``
    becomes ``None`` where the spoken word was cut.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    positions, truth = [], []
    for cands, t in zip(lattice.positions, lattice.truth_index):
        spoken = cands[t][0] if t is not None else None
        kept = rank_candidates(cands)[:n]
        positions.append(kept)
        hits = [r for r, (w, _) in enumerate(kept) if w == spoken]
        truth.append(hits[0] if hits else None)
    return NBestLattice(positions, truth)


def _emission_table(lattice, e_sent, model, cfg, acoustic_weight):
    """``table[i]`` has shape (n_i, C): acoustic + log smoothed score per (rank, class)."""
    if not acoustic_weight > 0:
        raise InputError("acoustic_weight must be positive")
    out = []
    for i, cands in enumerate(lattice.positions):
        if not cands:
            raise DecodeError(f"position {i} has no candidates")
        rows = []
        for word, ac in cands:
            rows.append(acoustic_weight * ac + _log(smoothed_vector(word, e_sent, model, cfg)))
        out.append(np.array(rows))
    return out


def score_path(lattice: NBestLattice, ranks: Sequence[int], classes: Sequence[int],
               e_sent: Sequence[str], model: TransModel, cfg: SmoothingConfig,
               acoustic_weight: float = 1.0) -> float:
    """Recompute a path's score from scratch, left to right."""
    lt = model.lm.log_contextual
    C = model.lm.num_classes
    a = b = C
    total = 0.0
    for i, (r, c) in enumerate(zip(ranks, classes)):
        word, ac = lattice.positions[i][r]
        emit = acoustic_weight * ac + _log(smoothed_vector(word, e_sent, model, cfg)[c])
        total += lt[a, b, c] + emit
        a, b = b, c
    return float(total + lt[a, b, C])


def decode(lattice: NBestLattice, e_sent: Sequence[str], model: TransModel,
           cfg: SmoothingConfig, acoustic_weight: float = 1.0) -> DecodeResult:
    """Viterbi search over candidate words and classes.

    Candidates at a position interact with the rest of the path only
    through their class, so for each (position, class) the best candidate
    is chosen first and the class trigram Viterbi runs on those scores.
    This is exact: the optimum over (previous class, class, candidate)
    states decomposes the same way.
    """
    table = _emission_table(lattice, e_sent, model, cfg, acoustic_weight)
    L = len(table)
    C = model.lm.num_classes
    if L == 0:
        raise DecodeError("empty lattice")
    emit = np.empty((L, C))
    best_rank = np.empty((L, C), dtype=np.int64)
    margins = np.full((L, C), math.inf)
    for i, scores in enumerate(table):
        r = np.argmax(scores, axis=0)  # first maximum = lowest rank
        best_rank[i] = r
        emit[i] = scores[r, np.arange(C)]
        if not np.isfinite(emit[i]).any():
            raise DecodeError(f"position {i}: every (candidate, class) pair has zero probability")
        if scores.shape[0] > 1:
            rest = scores.copy()
            rest[r, np.arange(C)] = -np.inf
            with np.errstate(invalid="ignore"):
                margins[i] = emit[i] - rest.max(axis=0)
    order = np.lexsort((np.tile(np.arange(C), (L, 1)), best_rank), axis=1)
    path, score = kernels.viterbi(model.lm.log_contextual, emit, order, TIE_TOL)
    if not np.isfinite(score):
        raise DecodeError("no path with nonzero probability through the lattice")
    classes = [int(c) for c in path]
    ranks = [int(best_rank[i, c]) for i, c in enumerate(classes)]
    words = [lattice.positions[i][r][0] for i, r in enumerate(ranks)]
    log_score = score_path(lattice, ranks, classes, e_sent, model, cfg, acoustic_weight)
    return DecodeResult(words, classes, log_score, ranks,
                        [float(margins[i, c]) for i, c in enumerate(classes)])


def brute_force_decode(lattice: NBestLattice, e_sent: Sequence[str], model: TransModel,
                       cfg: SmoothingConfig, acoustic_weight: float = 1.0) -> DecodeResult:
    """Exhaustive search over every (word, class) path; a reference for ``decode``."""
    C = model.lm.num_classes
    size = 1
    for cands in lattice.positions:
        size *= len(cands) * C
        if size > BRUTE_FORCE_LIMIT:
            raise InputError(f"brute force would enumerate more than {BRUTE_FORCE_LIMIT} paths")
    table = _emission_table(lattice, e_sent, model, cfg, acoustic_weight)
    lt = model.lm.log_contextual
    L = len(table)
    options = [[(r, c) for r in range(t.shape[0]) for c in range(C)] for t in table]
    best = [-math.inf, None]
    choice = [None] * L

    def visit(i, a, b, prefix):
        if i == L:
            total = prefix + lt[a, b, C]
            if total > -math.inf and total > best[0] + TIE_TOL * max(1.0, abs(total)):
                best[0] = total
                best[1] = list(choice)
            return
        t = table[i]
        for r, c in options[i]:
            choice[i] = (r, c)
            visit(i + 1, b, c, prefix + (lt[a, b, c] + t[r, c]))

    visit(0, C, C, 0.0)
    if best[1] is None:
        raise DecodeError("no path with nonzero probability through the lattice")
    ranks = [r for r, _ in best[1]]
    classes = [c for _, c in best[1]]
    words = [lattice.positions[i][r][0] for i, r in enumerate(ranks)]
    return DecodeResult(words, classes,
                        score_path(lattice, ranks, classes, e_sent, model, cfg, acoustic_weight),
                        ranks)
