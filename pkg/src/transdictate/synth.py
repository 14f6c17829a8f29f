"""Synthetic bilingual corpora drawn from a known translation model.

A ground-truth generator stands in for a real parliamentary corpus:

* classes follow a random trigram model;
* every (English word, class) has one preferred French rendering that
  receives ``concentration`` of the mass, the rest spread uniformly over
  the class's words;
* French positions align uniformly to NULL or an English position;
* French pronunciations come in confusable clusters (one-phone
  neighbours and homophones) so the simulated recognizer makes errors.

Everything is a deterministic function of the seed.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from transdictate.corpus import DEFAULT_CLASSES, NULL_TOKEN, Lexicon, SentencePair, write_bitext, write_lexicon
from transdictate.errors import InputError
from transdictate.phonosim import PhoneticDict, write_phonetic_dict

CONSONANTS = tuple("ptkbdgmnlrsfvzSjw")
VOWELS = tuple("aeiouyEO")


@dataclass(frozen=True)
class SynthConfig:
    vf: int = 200
    ve: int = 200
    num_classes: int = 5
    concentration: float = 0.9
    train_size: int = 5000
    test_size: int = 50
    train_len: tuple[int, int] = (5, 25)
    test_len: tuple[int, int] = (15, 20)
    ambiguity: float = 0.1
    homophone_rate: float = 0.05
    neighbor_rate: float = 0.5
    context_alpha: float = 0.3
    e_zipf: float = 0.5
    overlong_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 2 <= self.num_classes <= len(DEFAULT_CLASSES):
            raise InputError(f"num_classes must be in [2, {len(DEFAULT_CLASSES)}]")
        if self.vf < 2 * self.num_classes:
            raise InputError("need at least two French words per class")
        if self.ve < 1:
            raise InputError("need at least one English word")
        if not 0.0 <= self.concentration <= 1.0:
            raise InputError("concentration must be in [0, 1]")
        for lo, hi in (self.train_len, self.test_len):
            if not 1 <= lo <= hi:
                raise InputError("length ranges must satisfy 1 <= min <= max")
        if self.train_size < 0 or self.test_size < 0:
            raise InputError("corpus sizes must be non-negative")
        if self.homophone_rate + self.neighbor_rate > 1.0:
            raise InputError("homophone_rate + neighbor_rate must be <= 1")


@dataclass
class SynthCorpus:
    config: SynthConfig
    train: list[SentencePair]
    test: list[SentencePair]
    lexicon: Lexicon
    phones: PhoneticDict
    best: dict[tuple[int, str], str]
    link_counts: Counter
    contextual: np.ndarray
    train_classes: list[list[int]] = field(default_factory=list)
    train_links: list[list[str]] = field(default_factory=list)
    members: list[frozenset[str]] = field(default_factory=list)

    def translation_prob(self, f: str, c: int, e: str) -> float:
        """Ground-truth ``p(f | c, e)`` for a real English word."""
        members = self.members[c]
        if f not in members:
            return 0.0
        conc = self.config.concentration
        return conc * (self.best[(c, e)] == f) + (1.0 - conc) / len(members)


def _french_vocabulary(cfg, rng):
    prons: list[tuple[str, ...]] = []
    surfaces: list[str] = []
    seen = set()

    def fresh():
        n_syl = int(rng.integers(2, 4))
        out = []
        for _ in range(n_syl):
            out.append(CONSONANTS[rng.integers(len(CONSONANTS))])
            out.append(VOWELS[rng.integers(len(VOWELS))])
        if rng.random() < 0.3:
            out.append(CONSONANTS[rng.integers(len(CONSONANTS))])
        return tuple(out)

    while len(prons) < cfg.vf:
        r = rng.random()
        if prons and r < cfg.homophone_rate:
            pron = prons[rng.integers(len(prons))]
            surface = "".join(pron) + "h"
            while surface in seen:
                surface += "h"
        else:
            if prons and r < cfg.homophone_rate + cfg.neighbor_rate:
                base = list(prons[rng.integers(len(prons))])
                k = int(rng.integers(len(base)))
                pool = VOWELS if base[k] in VOWELS else CONSONANTS
                base[k] = pool[rng.integers(len(pool))]
                pron = tuple(base)
            else:
                pron = fresh()
            surface = "".join(pron)
            if surface in seen:
                continue
        seen.add(surface)
        prons.append(pron)
        surfaces.append(surface)
    return surfaces, prons


def _cumulative(p):
    c = np.cumsum(p)
    c[-1] = 1.0
    return c


def synthesize(cfg: SynthConfig) -> SynthCorpus:
    rng = np.random.default_rng(cfg.seed)
    C = cfg.num_classes
    K = C + 1
    names = DEFAULT_CLASSES[:C]

    surfaces, prons = _french_vocabulary(cfg, rng)
    perm = rng.permutation(cfg.vf)
    classes_of = {}
    for rank, idx in enumerate(perm):
        cs = {rank % C}
        if rng.random() < cfg.ambiguity:
            cs.add(int(rng.integers(C)))
        classes_of[surfaces[idx]] = frozenset(cs)
    lexicon = Lexicon(names, classes_of)
    members = [sorted(w for w, cs in classes_of.items() if c in cs) for c in range(C)]
    phones = PhoneticDict({w: (p,) for w, p in zip(surfaces, prons)})

    english = [f"en{i:03d}" for i in range(cfg.ve)]
    e_prob = 1.0 / np.arange(1, cfg.ve + 1) ** cfg.e_zipf
    e_cum = _cumulative(e_prob / e_prob.sum())

    best = {}
    for e in english:
        for c in range(C):
            best[(c, e)] = members[c][rng.integers(len(members[c]))]
    null_cum = [_cumulative(rng.dirichlet(np.ones(len(members[c])))) for c in range(C)]

    contextual = np.zeros((K, K, K))
    trans_cum = np.zeros((K, K, C))
    for a in range(K):
        for b in range(K):
            row = rng.dirichlet(np.full(C, cfg.context_alpha))
            contextual[a, b, :C] = row
            trans_cum[a, b] = _cumulative(row)

    def sample_pair(lo, hi, counts, cls_out, link_out):
        if cfg.overlong_rate and rng.random() < cfg.overlong_rate:
            L = int(rng.integers(41, 51))
        else:
            L = int(rng.integers(lo, hi + 1))
        m = max(1, L + int(rng.integers(-2, 3)))
        e_sent = [english[int(np.searchsorted(e_cum, rng.random(), side="right"))] for _ in range(m)]
        french, classes, links = [], [], []
        a = b = C
        for _ in range(L):
            c = int(np.searchsorted(trans_cum[a, b], rng.random(), side="right"))
            j = int(rng.integers(m + 1))
            if j == 0:
                f = members[c][int(np.searchsorted(null_cum[c], rng.random(), side="right"))]
                e = NULL_TOKEN
            else:
                e = e_sent[j - 1]
                if rng.random() < cfg.concentration:
                    f = best[(c, e)]
                else:
                    f = members[c][int(rng.integers(len(members[c])))]
                if counts is not None:
                    counts[(c, e)] += 1
            french.append(f)
            classes.append(c)
            links.append(e)
            a, b = b, c
        if cls_out is not None:
            cls_out.append(classes)
            link_out.append(links)
        return SentencePair(tuple(french), tuple(e_sent))

    counts: Counter = Counter()
    train_classes: list[list[int]] = []
    train_links: list[list[str]] = []
    train = [sample_pair(*cfg.train_len, counts, train_classes, train_links)
             for _ in range(cfg.train_size)]
    test = [sample_pair(*cfg.test_len, None, None, None) for _ in range(cfg.test_size)]

    return SynthCorpus(cfg, train, test, lexicon, phones, best, counts, contextual,
                       train_classes, train_links, [frozenset(m) for m in members])


def write_synth(corpus: SynthCorpus, outdir) -> dict[str, Path]:
    """Write train/test bitexts, lexicon, phonetic dictionary and truth table."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "train": out / "train.txt",
        "test": out / "test.txt",
        "lexicon": out / "lexicon.tsv",
        "phones": out / "phones.tsv",
        "truth": out / "truth.tsv",
    }
    write_bitext(corpus.train, paths["train"])
    write_bitext(corpus.test, paths["test"])
    write_lexicon(corpus.lexicon, paths["lexicon"])
    write_phonetic_dict(corpus.phones, paths["phones"])
    names = corpus.lexicon.class_names
    lines = [f"#CONCENTRATION\t{corpus.config.concentration:.17g}"]
    for (c, e), f in sorted(corpus.best.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        lines.append(f"BEST\t{e}\t{names[c]}\t{f}\t{corpus.link_counts.get((c, e), 0)}")
    paths["truth"].write_text("\n".join(lines) + "\n", encoding="utf-8")
    return paths


def load_truth(path, lexicon: Lexicon) -> tuple[dict[tuple[int, str], str], Counter]:
    best: dict[tuple[int, str], str] = {}
    counts: Counter = Counter()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        parts = line.split("\t")
        if parts[0] == "BEST":
            _, e, label, f, n = parts
            c = lexicon.class_id(label)
            best[(c, e)] = f
            counts[(c, e)] = int(n)
    return best, counts
