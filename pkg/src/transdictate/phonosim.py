"""Phonetic lexicon graph and a simulated isolated-word recognizer.

The recognizer is an edit-distance confusion channel over the lexicon
graph: every distinct phone string scores ``-distance_weight * d`` where
``d`` is its unit-cost edit distance to the spoken pronunciation, plus
seeded Gaussian noise.  Homophones share a graph path and therefore a
score.  The result is an n-best list of words per spoken token.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from transdictate import kernels
from transdictate.errors import InputError, ParseError

log = logging.getLogger(__name__)

PhoneString = tuple[str, ...]


@dataclass(frozen=True)
class PhoneticDict:
    """Word -> one or more pronunciations (first one is canonical)."""

    pronunciations: Mapping[str, tuple[PhoneString, ...]]

    def __post_init__(self):
        clean = {}
        for word, prons in self.pronunciations.items():
            seen = []
            for pron in prons:
                pron = tuple(pron)
                if not pron or any(not p or any(ch.isspace() for ch in p) for p in pron):
                    raise InputError(f"bad pronunciation for {word!r}: {pron!r}")
                if pron not in seen:
                    seen.append(pron)
            if not seen:
                raise InputError(f"{word!r} has no pronunciation")
            clean[word] = tuple(seen)
        object.__setattr__(self, "pronunciations", clean)

    def __contains__(self, word):
        return word in self.pronunciations

    def __len__(self):
        return len(self.pronunciations)

    def inventory(self) -> list[str]:
        return sorted({p for prons in self.pronunciations.values() for pr in prons for p in pr})

    def to_text(self) -> str:
        return "".join(
            f"{w}\t{' '.join(pr)}\n" for w in sorted(self.pronunciations)
            for pr in self.pronunciations[w]
        )


def load_phonetic_dict(path) -> PhoneticDict:
    prons: dict[str, list[PhoneString]] = {}
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    for lineno, chunk in enumerate(raw.split(b"\n"), 1):
        try:
            line = chunk.decode("utf-8")
        except UnicodeDecodeError:
            raise ParseError("invalid UTF-8", path, lineno) from None
        if not line:
            continue
        word, tab, phones = line.partition("\t")
        if not tab or not word or not phones.strip():
            raise ParseError("expected 'word<TAB>phone phone ...'", path, lineno)
        prons.setdefault(word, []).append(tuple(phones.split()))
    if not prons:
        raise ParseError("empty phonetic dictionary", path)
    return PhoneticDict({w: tuple(p) for w, p in prons.items()})


def write_phonetic_dict(pdict: PhoneticDict, path) -> None:
    Path(path).write_text(pdict.to_text(), encoding="utf-8")


# Minimal letter-to-phone fallback; longest match first.
_DIGRAPHS = {
    "eau": "o", "ou": "u", "au": "o", "ai": "E", "ei": "E", "oi": "wa",
    "ch": "S", "gn": "J", "ph": "f", "qu": "k", "th": "t",
    "an": "a~", "en": "a~", "on": "o~", "in": "e~", "un": "e~",
}
_DIGRAPH_RE = re.compile("|".join(sorted(_DIGRAPHS, key=len, reverse=True)) + "|.")
_LETTERS = {"é": "e", "è": "E", "ê": "E", "à": "a", "â": "a", "ç": "s", "ô": "o",
            "û": "y", "ù": "y", "î": "i", "ï": "i", "u": "y", "c": "k", "h": ""}


def fallback_pronunciation(word: str) -> PhoneString:
    phones = []
    for m in _DIGRAPH_RE.finditer(word.lower()):
        tok = m.group(0)
        ph = _DIGRAPHS.get(tok, _LETTERS.get(tok, tok))
        if ph and not ph.isspace():
            phones.append(ph)
    return tuple(phones) or (word,)


def with_fallback(pdict: PhoneticDict, words: Iterable[str]) -> PhoneticDict:
    """Add letter-to-phone pronunciations for ``words`` missing from ``pdict``."""
    missing = sorted({w for w in words if w not in pdict})
    if not missing:
        return pdict
    log.warning("using fallback pronunciations for %d word(s): %s", len(missing),
                " ".join(missing[:10]) + (" ..." if len(missing) > 10 else ""))
    prons = dict(pdict.pronunciations)
    for w in missing:
        prons[w] = (fallback_pronunciation(w),)
    return PhoneticDict(prons)


# -- lexicon graph --------------------------------------------------------

@dataclass(eq=False)
class PhoneticGraph:
    """Prefix-shared lexicon graph.

    Node 0 is the root.  ``parent`` and ``phone`` are arrays indexed by
    node (parents precede children); ``words[node]`` is the homophone set
    of the path ending at ``node``, present only for final nodes.
    """

    inventory: list[str]
    parent: np.ndarray
    phone: np.ndarray
    children: list[dict[int, int]]
    words: dict[int, frozenset[str]]
    word_nodes: dict[str, tuple[int, ...]]
    _dist_cache: dict = field(default_factory=dict, repr=False)

    @property
    def num_nodes(self) -> int:
        return len(self.parent)

    def path_phones(self, node: int) -> PhoneString:
        out = []
        while node > 0:
            out.append(self.inventory[self.phone[node]])
            node = self.parent[node]
        return tuple(reversed(out))

    def paths(self) -> list[tuple[PhoneString, frozenset[str]]]:
        """Every complete path with its homophone set, in depth-first order."""
        out = []
        stack = [0]
        while stack:
            node = stack.pop()
            if node in self.words:
                out.append((self.path_phones(node), self.words[node]))
            stack.extend(sorted(self.children[node].values(), reverse=True))
        return out

    def find(self, phones: Sequence[str]) -> int | None:
        node = 0
        index = {p: i for i, p in enumerate(self.inventory)}
        for p in phones:
            node = self.children[node].get(index.get(p, -1))
            if node is None:
                return None
        return node if node in self.words else None

    def encode(self, phones: Sequence[str]) -> np.ndarray:
        index = {p: i for i, p in enumerate(self.inventory)}
        return np.array([index.get(p, -1) for p in phones], dtype=np.int64)

    def distances(self, phones: Sequence[str]) -> np.ndarray:
        """Edit distance from ``phones`` to every node's prefix (memoized)."""
        key = tuple(phones)
        hit = self._dist_cache.get(key)
        if hit is None:
            hit = kernels.trie_edit_distances(self.encode(key), self.parent, self.phone)
            self._dist_cache[key] = hit
        return hit


def build_graph(pdict: PhoneticDict) -> PhoneticGraph:
    if not len(pdict):
        raise InputError("empty phonetic dictionary")
    inventory = pdict.inventory()
    index = {p: i for i, p in enumerate(inventory)}
    parent = [-1]
    phone = [-1]
    children: list[dict[int, int]] = [{}]
    words: dict[int, set[str]] = {}
    word_nodes: dict[str, list[int]] = {}
    for word in sorted(pdict.pronunciations):
        for pron in pdict.pronunciations[word]:
            node = 0
            for p in pron:
                pid = index[p]
                nxt = children[node].get(pid)
                if nxt is None:
                    nxt = len(parent)
                    parent.append(node)
                    phone.append(pid)
                    children.append({})
                    children[node][pid] = nxt
                node = nxt
            words.setdefault(node, set()).add(word)
            word_nodes.setdefault(word, []).append(node)
    return PhoneticGraph(
        inventory,
        np.array(parent, dtype=np.int64),
        np.array(phone, dtype=np.int64),
        children,
        {n: frozenset(ws) for n, ws in words.items()},
        {w: tuple(ns) for w, ns in word_nodes.items()},
    )


# -- simulated recognizer -------------------------------------------------

@dataclass(frozen=True)
class ChannelConfig:
    distance_weight: float = 2.0
    noise_sd: float = 1.0
    n: int = 20
    seed: int = 0

    def __post_init__(self):
        if not self.distance_weight > 0:
            raise InputError("distance_weight must be positive")
        if self.noise_sd < 0:
            raise InputError("noise_sd must be non-negative")
        if self.n < 1:
            raise InputError("n must be >= 1")


@dataclass
class NBestLattice:
    """Per-position ranked ``(word, acoustic log-score)`` candidates."""

    positions: list[list[tuple[str, float]]]
    truth_index: list[int | None] = field(default_factory=list)

    def __post_init__(self):
        if not self.truth_index:
            self.truth_index = [None] * len(self.positions)
        if len(self.truth_index) != len(self.positions):
            raise InputError("truth_index length differs from lattice length")

    def __len__(self):
        return len(self.positions)


def rank_candidates(scored: Iterable[tuple[str, float]]) -> list[tuple[str, float]]:
    """Descending score; equal scores ordered by word."""
    return sorted(scored, key=lambda ws: (-ws[1], ws[0]))


def _token_scores(truth, graph, pdict, channel, rng):
    if truth not in pdict:
        raise InputError(f"{truth!r} is not in the phonetic dictionary")
    finals = sorted(graph.words)
    dist = graph.distances(pdict.pronunciations[truth][0])[finals]
    noise = rng.normal(0.0, channel.noise_sd, len(finals)) if channel.noise_sd > 0 else 0.0
    node_score = dict(zip(finals, -channel.distance_weight * dist + noise))
    return [(w, max(node_score[n] for n in nodes)) for w, nodes in graph.word_nodes.items()]


def simulate_token(truth: str, pdict: PhoneticDict, channel: ChannelConfig,
                   graph: PhoneticGraph | None = None, seed=None) -> list[tuple[str, float]]:
    """Top-``n`` candidates for one spoken word, deterministic in the seed."""
    graph = graph or build_graph(pdict)
    rng = np.random.default_rng(channel.seed if seed is None else seed)
    scores = [(w, float(s)) for w, s in _token_scores(truth, graph, pdict, channel, rng)]
    return rank_candidates(scores)[: channel.n]


def simulate_sentence(sentence: Sequence[str], pdict: PhoneticDict, channel: ChannelConfig,
                      graph: PhoneticGraph | None = None, seed=None) -> NBestLattice:
    """One n-best list per position; position ``i`` uses sub-seed ``(seed..., i)``."""
    graph = graph or build_graph(pdict)
    base = channel.seed if seed is None else seed
    base = list(base) if isinstance(base, (tuple, list)) else [base]
    positions, truth_index = [], []
    for i, word in enumerate(sentence):
        cands = simulate_token(word, pdict, channel, graph, seed=[*base, i])
        positions.append(cands)
        ranks = [r for r, (w, _) in enumerate(cands) if w == word]
        truth_index.append(ranks[0] if ranks else None)
    return NBestLattice(positions, truth_index)


def simulate_corpus(sentences: Sequence[Sequence[str]], pdict: PhoneticDict,
                    channel: ChannelConfig) -> list[NBestLattice]:
    graph = build_graph(pdict)
    return [simulate_sentence(s, pdict, channel, graph, seed=[channel.seed, k])
            for k, s in enumerate(sentences)]


# -- lattice file ---------------------------------------------------------

def format_lattices(lattices: Sequence[NBestLattice]) -> str:
    lines = []
    for k, lat in enumerate(lattices):
        truth = ",".join("-" if t is None else str(t) for t in lat.truth_index)
        lines.append(f"SENT {k} {len(lat)} {truth}")
        for pos, cands in enumerate(lat.positions):
            for rank, (word, score) in enumerate(cands):
                lines.append(f"{pos} {rank} {word} {score:.17g}")
    return "\n".join(lines) + "\n"


def write_lattices(lattices: Sequence[NBestLattice], path) -> None:
    Path(path).write_text(format_lattices(lattices), encoding="utf-8")


def load_lattices(path) -> list[NBestLattice]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ParseError("invalid UTF-8", path) from None
    out: list[NBestLattice] = []
    cur = None
    for lineno, line in enumerate(lines, 1):
        if not line:
            continue
        parts = line.split(" ")
        try:
            if parts[0] == "SENT":
                n_pos = int(parts[2])
                truth = [None if t == "-" else int(t) for t in parts[3].split(",")]
                cur = NBestLattice([[] for _ in range(n_pos)], truth)
                out.append(cur)
            elif cur is not None and len(parts) == 4:
                pos, rank = int(parts[0]), int(parts[1])
                if rank != len(cur.positions[pos]):
                    raise ValueError
                cur.positions[pos].append((parts[2], float(parts[3])))
            else:
                raise ValueError
        except (ValueError, IndexError, InputError):
            raise ParseError(f"bad lattice record {line!r}", path, lineno) from None
    return out
