"""Random model builders and brute-force oracles shared by the tests."""

import itertools
import math

import numpy as np

from transdictate.classlm import ClassLM
from transdictate.corpus import NULL_TOKEN, Lexicon
from transdictate.phonosim import NBestLattice
from transdictate.transmodel import BiLexicalParams, TransModel

NAMES = ("N", "V", "A", "D")


def random_lm(rng, C, vocab, ambiguous=True, zeros=False):
    """Random class LM over ``vocab``; every word admits every class unless ``ambiguous`` is False."""
    K = C + 1
    ctx = rng.dirichlet(np.ones(K), size=(K, K))
    if zeros:
        ctx[rng.random(ctx.shape) < 0.2] = 0.0
        ctx[..., C] += 1e-3
        ctx /= ctx.sum(axis=-1, keepdims=True)
    entries = {}
    for k, w in enumerate(vocab):
        if ambiguous:
            entries[w] = frozenset(range(C))
        else:
            entries[w] = frozenset({k % C})
    lexicon = Lexicon(NAMES[:C], entries)
    lex = np.zeros((len(vocab), C))
    for k, w in enumerate(vocab):
        for c in entries[w]:
            lex[k, c] = rng.random() + 0.05
    tot = lex.sum(axis=0, keepdims=True)
    lex = np.divide(lex, tot, out=np.zeros_like(lex), where=tot > 0)
    return ClassLM(lexicon, ctx, {w: lex[k] for k, w in enumerate(vocab)})


def random_bilexical(rng, C, f_vocab, e_vocab, density=0.7):
    """Random ``p(f | c, e)`` normalized over ``f`` for each (c, e), NULL included."""
    table = {}
    for e in (NULL_TOKEN, *e_vocab):
        mat = rng.random((len(f_vocab), C)) * (rng.random((len(f_vocab), C)) < density)
        mat[0] += 1e-3
        mat /= mat.sum(axis=0, keepdims=True)
        table[e] = {f: mat[k].copy() for k, f in enumerate(f_vocab)}
    return BiLexicalParams(C, table)


def random_model(rng, C, f_vocab, e_vocab):
    return TransModel(random_lm(rng, C, f_vocab), random_bilexical(rng, C, f_vocab, e_vocab))


def random_lattice(rng, vocab, length, n):
    positions = []
    for _ in range(length):
        words = rng.choice(len(vocab), size=n, replace=False)
        scores = np.round(rng.normal(0, 2, n), 1)  # rounding forces some ties
        cands = sorted(((vocab[w], float(s)) for w, s in zip(words, scores)),
                       key=lambda ws: (-ws[1], ws[0]))
        positions.append(cands)
    return NBestLattice(positions)


def sequence_logprob(lt, emit_rows, classes):
    """Left-to-right log p of one class sequence given per-position emission vectors."""
    C = lt.shape[0] - 1
    a = b = C
    total = 0.0
    for row, c in zip(emit_rows, classes):
        with np.errstate(divide="ignore"):
            total += lt[a, b, c] + np.log(row[c])
        a, b = b, c
    return total + lt[a, b, C]


def enumerate_sum(lt, emit_rows):
    """log of the sum over every class sequence."""
    C = lt.shape[0] - 1
    terms = [sequence_logprob(lt, emit_rows, cs)
             for cs in itertools.product(range(C), repeat=len(emit_rows))]
    if max(terms) == -math.inf:
        return -math.inf
    return float(np.logaddexp.reduce(terms))


def enumerate_argmax(lt, emit_rows):
    """Best class sequence, first in lexicographic order among exact ties."""
    C = lt.shape[0] - 1
    best, arg = -math.inf, None
    for cs in itertools.product(range(C), repeat=len(emit_rows)):
        s = sequence_logprob(lt, emit_rows, cs)
        if s > -math.inf and s > best + 1e-12 * max(1.0, abs(s)):
            best, arg = s, list(cs)
    return arg, best


def explicit_alignment_logprob(french, english, model):
    """Sum over all class sequences and all (|e|+1)^|f| alignments, no rearrangement."""
    lm, bil = model.lm, model.bilexical
    C = lm.num_classes
    lt = lm.contextual
    conds = (NULL_TOKEN, *english)
    A = len(conds) ** len(french)
    total = 0.0
    for cs in itertools.product(range(C), repeat=len(french)):
        a = b = C
        p_c = 1.0
        for c in cs:
            p_c *= lt[a, b, c]
            a, b = b, c
        p_c *= lt[a, b, C]
        inner = 0.0
        for links in itertools.product(range(len(conds)), repeat=len(french)):
            prod = 1.0
            for f, c, j in zip(french, cs, links):
                prod *= bil.prob(f, c, conds[j])
            inner += prod
        total += p_c * inner / A
    return math.log(total) if total > 0 else -math.inf


def naive_bilexical_em(tagged_pairs, iters):
    """Dictionary-based uniform-alignment EM; returns ``(theta, history)``.

    ``theta[e][(f, c)]`` is ``p(f, c | e)``.  No pruning.
    """
    theta = {}
    for pair, classes in tagged_pairs:
        for e in (NULL_TOKEN, *pair.english):
            row = theta.setdefault(e, {})
            for f, c in zip(pair.french, classes):
                row[(f, int(c))] = 1.0
    for e, row in theta.items():
        for k in row:
            row[k] = 1.0 / len(row)

    def e_step(theta):
        counts = {e: dict.fromkeys(row, 0.0) for e, row in theta.items()}
        ll = 0.0
        for pair, classes in tagged_pairs:
            conds = (NULL_TOKEN, *pair.english)
            for f, c in zip(pair.french, classes):
                ps = [theta[e].get((f, int(c)), 0.0) for e in conds]
                z = sum(ps)
                ll += math.log(z / len(conds))
                for e, p in zip(conds, ps):
                    counts[e][(f, int(c))] += p / z
        return ll, counts

    ll, counts = e_step(theta)
    history = [ll]
    for _ in range(iters):
        theta = {e: {k: v / sum(row.values()) for k, v in row.items()} for e, row in counts.items()}
        ll, counts = e_step(theta)
        history.append(ll)
    return theta, history
