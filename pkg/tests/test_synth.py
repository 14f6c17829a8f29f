import numpy as np
import pytest

from transdictate.corpus import load_bitext, load_lexicon
from transdictate.errors import InputError
from transdictate.phonosim import load_phonetic_dict
from transdictate.synth import SynthConfig, load_truth, synthesize, write_synth

SMALL = SynthConfig(vf=40, ve=30, num_classes=4, train_size=60, test_size=5, seed=3)


def test_same_seed_byte_identical(tmp_path):
    a = write_synth(synthesize(SMALL), tmp_path / "a")
    b = write_synth(synthesize(SMALL), tmp_path / "b")
    for key in a:
        assert a[key].read_bytes() == b[key].read_bytes()


def test_different_seed_differs():
    other = SynthConfig(**{**SMALL.__dict__, "seed": 4})
    assert synthesize(SMALL).train != synthesize(other).train


def test_requested_sizes():
    corpus = synthesize(SMALL)
    assert len(corpus.train) == 60 and len(corpus.test) == 5
    assert all(15 <= len(p.french) <= 20 for p in corpus.test)


def test_concentration_one_is_deterministic():
    cfg = SynthConfig(**{**SMALL.__dict__, "concentration": 1.0, "train_size": 300})
    corpus = synthesize(cfg)
    for pair, classes, links in zip(corpus.train, corpus.train_classes, corpus.train_links):
        for f, c, e in zip(pair.french, classes, links):
            if e != "<NULL>":
                assert corpus.best[(c, e)] == f


def test_translation_prob_normalized():
    corpus = synthesize(SMALL)
    for (c, e) in list(corpus.best)[:20]:
        total = sum(corpus.translation_prob(f, c, e) for f in corpus.lexicon.entries)
        assert total == pytest.approx(1.0)


def test_link_counts_match_links():
    corpus = synthesize(SMALL)
    n = sum(e != "<NULL>" for links in corpus.train_links for e in links)
    assert sum(corpus.link_counts.values()) == n


def test_files_reload(tmp_path):
    corpus = synthesize(SMALL)
    paths = write_synth(corpus, tmp_path)
    assert load_bitext(paths["train"]) == corpus.train
    lexicon = load_lexicon(paths["lexicon"])
    assert lexicon == corpus.lexicon
    assert load_phonetic_dict(paths["phones"]) == corpus.phones
    best, counts = load_truth(paths["truth"], lexicon)
    assert best == corpus.best
    assert +counts == +corpus.link_counts


def test_overlong_rate():
    cfg = SynthConfig(**{**SMALL.__dict__, "overlong_rate": 0.5, "train_size": 40})
    assert any(len(p.french) > 40 for p in synthesize(cfg).train)


@pytest.mark.parametrize("bad", [
    {"num_classes": 1}, {"vf": 5, "num_classes": 4}, {"concentration": 1.5},
    {"train_len": (5, 3)}, {"ve": 0}, {"train_size": -1},
])
def test_inconsistent_sizes(bad):
    with pytest.raises(InputError):
        SynthConfig(**{**SMALL.__dict__, **bad})


def test_contextual_rows_normalized():
    ctx = synthesize(SMALL).contextual
    np.testing.assert_allclose(ctx.sum(axis=-1), 1.0)
