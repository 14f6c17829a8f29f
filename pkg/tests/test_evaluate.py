import math

import numpy as np
import pytest

from transdictate.classlm import ClassLM, lm_sentence_logprob
from transdictate.corpus import NULL_TOKEN, Lexicon, SentencePair
from transdictate.errors import InputError, InvariantError
from transdictate.evaluate import (
    EvalReport,
    content_class_ids,
    format_report,
    perplexity,
    word_accuracy,
)
from transdictate.transmodel import BiLexicalParams, SmoothingConfig, TransModel

W0 = SmoothingConfig.interpolate(0.0)


def _tagging_lm():
    lexicon = Lexicon(("NOUN", "DET", "PUNCT"), {"le": {1}, "chat": {0}, "chien": {0}, ".": {2}})
    lex = {"le": np.array([0, 1.0, 0]), "chat": np.array([0.5, 0, 0]),
           "chien": np.array([0.5, 0, 0]), ".": np.array([0, 0, 1.0])}
    return ClassLM(lexicon, np.full((4, 4, 4), 0.25), lex)


def test_identity_is_perfect():
    lm = _tagging_lm()
    refs = [["le", "chat", "."]]
    rep = word_accuracy(refs, refs, content_class_ids(lm.lexicon), lm)
    assert rep.accuracy == 1.0 and rep.errors == 0
    assert rep.punct_total == 1


def test_noun_error_is_content_error():
    lm = _tagging_lm()
    rep = word_accuracy([["le", "chien", "."]], [["le", "chat", "."]], {0}, lm)
    assert (rep.content_errors, rep.function_errors) == (1, 0)
    rep = word_accuracy([["chat", "chat", "chat"]], [["le", "chat", "."]], {0}, lm)
    assert (rep.content_errors, rep.function_errors, rep.punct_errors) == (0, 2, 1)


def test_report_format_686_of_918():
    rep = EvalReport(918, 686, 150, 82)
    assert rep.correct_str() == "686 (74.7%)"
    text = format_report([("interpolated (.85)", rep)])
    assert "686 (74.7%) /918" in text
    assert "interpolated_(.85).words_correct=686" in text


def test_report_invariant():
    with pytest.raises(InvariantError):
        EvalReport(10, 8, 1, 0)
    with pytest.raises(InvariantError):
        EvalReport(10, 11, 0, 0)


def test_length_mismatch_names_sentence():
    lm = _tagging_lm()
    with pytest.raises(InputError, match="sentence 1"):
        word_accuracy([["le"], ["le", "chat"]], [["le"], ["le"]], set(), lm)


def test_relabeling_invariance():
    lm = _tagging_lm()
    hyps = [["le", "chien", "."], ["chat", "le", "."]]
    refs = [["le", "chat", "."], ["chien", "le", "."]]
    swap = {"chat": "chien", "chien": "chat"}
    rep = word_accuracy(hyps, refs, {0}, lm)
    rel = word_accuracy([[swap.get(w, w) for w in h] for h in hyps],
                        [[swap.get(w, w) for w in r] for r in refs], {0}, lm)
    assert (rep.words_correct, rep.content_errors) == (rel.words_correct, rel.content_errors)


def _unigram_model(q):
    vocab = ["a", "b", "c"]
    lexicon = Lexicon(("X", "Y"), {w: {0} for w in vocab})
    ctx = np.zeros((3, 3, 3))
    ctx[..., 0] = q
    ctx[..., 2] = 1 - q
    lm = ClassLM(lexicon, ctx, {w: np.array([1 / 3, 0.0]) for w in vocab})
    return TransModel(lm, BiLexicalParams(2))


def test_uniform_unigram_closed_form():
    q = 0.8
    model = _unigram_model(q)
    pairs = [SentencePair(("a", "b"), ("x",)), SentencePair(("c", "c", "a"), ("y",))]
    N, S = 5, 2
    expected = math.exp(-(N * math.log(q / 3) + S * math.log(1 - q)) / (N + S))
    assert perplexity(pairs, model, W0) == pytest.approx(expected, rel=1e-12)


def test_single_sentence_definition():
    model = _unigram_model(0.5)
    pair = SentencePair(("a", "b", "c"), ("x",))
    lp = lm_sentence_logprob(pair.french, model.lm)
    assert perplexity([pair], model, W0) == pytest.approx(math.exp(-lp / 4), rel=1e-12)


def test_deterministic_translations_lower_perplexity():
    model = _unigram_model(0.7)
    table = {e: {f: np.array([1.0, 0.0])} for e, f in (("ea", "a"), ("eb", "b"), ("ec", "c"))}
    table[NULL_TOKEN] = {f: np.array([1 / 3, 0.0]) for f in "abc"}
    tm = TransModel(model.lm, BiLexicalParams(2, table))
    pairs = [SentencePair(("a", "b"), ("ea", "eb")), SentencePair(("c",), ("ec",))]
    assert perplexity(pairs, tm, SmoothingConfig.interpolate(1.0)) < perplexity(pairs, tm, W0)


def test_w0_equals_pure_lm():
    model = _unigram_model(0.6)
    pairs = [SentencePair(("a", "b"), ("x",))]
    lp = lm_sentence_logprob(pairs[0].french, model.lm)
    assert perplexity(pairs, model, W0) == math.exp(-lp / 3)


def test_infinite_perplexity_lists_sentence(caplog):
    model = _unigram_model(1.0)  # no end event: every sentence impossible
    pairs = [SentencePair(("a",), ("x",))]
    assert perplexity(pairs, model, W0) == math.inf
    assert "zero-probability sentence(s): 0" in caplog.text


def test_unnormalized_smoothing_rejected():
    with pytest.raises(InputError):
        perplexity([SentencePair(("a",), ("x",))], _unigram_model(0.5), SmoothingConfig.maximum())
