import math

import pytest
from hypothesis import given, strategies as st

from csgen import synthesis as sy
from csgen.corpus_io import LabeledSentence
from csgen.providers import FileBackedProvider, IdentityTransliterator, ProviderError, load_provider
from csgen.target_segments import METHODS, TargetSelection


HI = ["ट्रेलर", "फीका", "लगा", "लेकिन", "फ़ाइनल", "कट", "सच", "में", "कमाल", "था"]
ROMAN = {"ट्रेलर": "trailer", "फीका": "pheeka", "लगा": "laga", "लेकिन": "lekin", "फ़ाइनल": "final",
         "कट": "cut", "सच": "sach", "में": "mein", "कमाल": "kamaal", "था": "tha"}


def source():
    return LabeledSentence("r1", tuple("the trailer looked dull but the final cut was really impressive".split()), 1)


def test_projection_replaces_clause():
    translit = FileBackedProvider(ROMAN)
    sel = TargetSelection(3, 10, "MAXSIM_GIZA", 0.4)
    out = sy.project(source(), HI, (4, 11), sel, translit)
    assert " ".join(out.tokens) == "the trailer looked dull lekin final cut sach mein kamaal tha"
    assert out.language_mask == ("SRC",) * 4 + ("TGT",) * 7
    assert out.label == 1 and out.id == "r1:4-11"
    assert out.provenance.span == (4, 11) and out.provenance.target_span == (3, 10)


def test_identity_transliteration_verbatim():
    s = LabeledSentence("e", ("the", "movie", "was", "great"), 1)
    out = sy.project(s, ("la", "película", "fue", "genial"), (2, 4),
                     TargetSelection(2, 4, "MINDIS_EMD_ATTN", 0.1), IdentityTransliterator())
    assert out.tokens == ("the", "movie", "fue", "genial")


def test_full_sentence_rejected():
    s = LabeledSentence("e", ("a", "b"), 1)
    with pytest.raises(sy.ProjectionError):
        sy.project(s, ("x",), (0, 2), TargetSelection(0, 1, "MAXSIM_GIZA", 1.0), IdentityTransliterator())


def test_provider_failure_becomes_projection_error():
    s = LabeledSentence("e", ("a", "b", "c"), 1)
    with pytest.raises(sy.ProjectionError, match="no entry"):
        sy.project(s, ("x", "y"), (1, 2), TargetSelection(0, 1, "MAXSIM_GIZA", 1.0), FileBackedProvider({}))


@given(st.integers(2, 8), st.integers(1, 6), st.data())
def test_projection_preserves_context(n, t_len, data):
    s = LabeledSentence("x", tuple(f"w{i}" for i in range(n)), -1)
    lo = data.draw(st.integers(0, n - 1))
    hi = data.draw(st.integers(lo + 1, n))
    if (lo, hi) == (0, n):
        hi = n - 1 if lo == 0 and n > 1 else hi
        if (lo, hi) == (0, n):
            return
    j = data.draw(st.integers(0, t_len - 1))
    k = data.draw(st.integers(j + 1, t_len))
    tgt = tuple(f"t{i}" for i in range(t_len))
    out = sy.project(s, tgt, (lo, hi), TargetSelection(j, k, "MAXSIM_GIZA", 0.5), IdentityTransliterator())
    assert out.tokens[:lo] == s.tokens[:lo]
    assert out.tokens[len(out.tokens) - (n - hi):] == s.tokens[hi:]
    assert len(out.tokens) == n - (hi - lo) + (k - j)
    assert out.label == s.label


# BLEU


def test_bleu_identity():
    assert sy.bleu(["a", "b", "c", "d", "e"], ["a", "b", "c", "d", "e"]) == 1.0


def test_bleu_short_candidate():
    # p1 = p2 = 1, brevity penalty exp(1 - 3/2)
    assert sy.bleu(["the", "cat"], ["the", "cat", "sat"], max_n=2) == pytest.approx(math.exp(-0.5), abs=1e-12)
    assert sy.bleu(["the", "cat"], ["the", "cat", "sat"], max_n=2) == pytest.approx(0.6065, abs=1e-4)


def test_bleu_zero_bigrams_near_zero():
    assert sy.bleu(["b", "a"], ["a", "b"], max_n=2) < 1e-4


def test_bleu_empty_candidate():
    assert sy.bleu([], ["a"]) == 0.0


def test_bleu_clipping():
    # three "the" against one in the reference: p1 = 1/3
    assert sy.bleu(["the", "the", "the"], ["the", "cat", "sat"], max_n=1) == pytest.approx(1 / 3)


vocab = st.sampled_from(list("abcdefg"))


@given(st.lists(vocab, min_size=1, max_size=10))
def test_bleu_self_is_one(x):
    assert sy.bleu(x, x) == pytest.approx(1.0, abs=1e-12)


@given(st.lists(vocab, min_size=1, max_size=8), st.lists(vocab, min_size=1, max_size=8), st.permutations(list("abcdefg")))
def test_bleu_renaming_invariant(c, r, perm):
    rename = dict(zip("abcdefg", perm))
    assert sy.bleu([rename[w] for w in c], [rename[w] for w in r]) == sy.bleu(c, r)
    assert 0.0 <= sy.bleu(c, r) <= 1.0


# candidate choice


def cand(tokens, method, score=0.5, label=1, sid="s"):
    mask = tuple("TGT" if t.isupper() else "SRC" for t in tokens)
    prov = sy.Provenance(sid, (0, 1), method, score, (0, 1))
    return sy.SyntheticSentence(f"{sid}:{method}", tuple(tokens), mask, label, prov)


class MapReverse:
    def __init__(self, table):
        self.table = table

    def reverse_translate(self, tokens):
        key = " ".join(tokens)
        if key not in self.table:
            raise ProviderError("missing")
        return self.table[key].split()


S = LabeledSentence("s", ("the", "cat", "sat", "on", "the", "mat"), 1)


def test_singleton_returned():
    c = cand(["X", "cat"], METHODS[2])
    out = sy.select_best([c], S, MapReverse({"X cat": "dog"}))
    assert out.tokens == c.tokens and out.provenance.bleu is not None


def test_higher_bleu_wins():
    hi = cand(["X", "sat", "on", "the", "mat"], METHODS[3])
    lo = cand(["the", "cat", "Y"], METHODS[0])
    rev = MapReverse({"X sat on the mat": "the cat sat on the mat", "the cat Y": "the cat"})
    out = sy.select_best([lo, hi], S, rev)
    assert out.provenance.method == METHODS[3] and out.bleu == pytest.approx(1.0)


def test_overlap_breaks_bleu_tie():
    a = cand(["the", "cat", "sat", "on", "Z"], METHODS[3])
    b = cand(["Q", "R", "on", "Z", "W"], METHODS[0])
    rev = MapReverse({"the cat sat on Z": "a b c", "Q R on Z W": "a b c"})
    out = sy.select_best([b, a], S, rev)
    assert out.provenance.method == METHODS[3]


def test_method_order_breaks_second_tie():
    a = cand(["the", "X"], METHODS[2])
    b = cand(["the", "Y"], METHODS[1])
    rev = MapReverse({"the X": "q", "the Y": "q"})
    assert sy.select_best([a, b], S, rev).provenance.method == METHODS[1]


def test_reverse_failure_demotes():
    bad = cand(["the", "cat", "sat", "on", "the", "X"], METHODS[0])
    good = cand(["Y", "z"], METHODS[3])
    out = sy.select_best([bad, good], S, MapReverse({"Y z": "zzz"}))
    assert out.provenance.method == METHODS[3]


def test_cutoffs_filter_everything():
    cutoffs = sy.MethodCutoffs({METHODS[0]: 0.9, METHODS[2]: 0.1})
    cands = [cand(["X", "a"], METHODS[0], score=0.5), cand(["Y", "b"], METHODS[2], score=0.5)]
    with pytest.raises(sy.CandidateFiltered):
        sy.select_best(cands, S, MapReverse({}), cutoffs)


def test_cutoff_directions():
    cutoffs = sy.compute_cutoffs([TargetSelection(0, 1, METHODS[0], v) for v in (1, 2, 3, 4, 5)] +
                                 [TargetSelection(0, 1, METHODS[2], v) for v in (1, 2, 3, 4, 5)])
    assert cutoffs.thresholds[METHODS[0]] == pytest.approx(1.8)
    assert cutoffs.thresholds[METHODS[2]] == pytest.approx(4.2)
    assert cutoffs.passes(METHODS[0], 2) and not cutoffs.passes(METHODS[0], 1.5)
    assert cutoffs.passes(METHODS[2], 4) and not cutoffs.passes(METHODS[2], 4.5)
    assert cutoffs.passes(METHODS[1], -100)


def with_bleu(c, b):
    from dataclasses import replace
    return replace(c, provenance=replace(c.provenance, bleu=b))


def test_threshold_filter():
    corpus = [with_bleu(cand(["X", "a"], METHODS[0], sid=str(i)), b) for i, b in enumerate((0.3, 0.6, 0.9))]
    assert [c.bleu for c in sy.threshold_filter(corpus, 0.5)] == [0.6, 0.9]
    assert sy.threshold_filter(corpus, 0.0) == corpus
    assert sy.threshold_filter(corpus + [with_bleu(corpus[0], 1.0)], 1.0)[0].bleu == 1.0
    with pytest.raises(ValueError):
        sy.threshold_filter(corpus, 1.5)


def test_synthetic_needs_both_languages():
    prov = sy.Provenance("s", (0, 1), METHODS[0], 0.1, (0, 1))
    with pytest.raises(ValueError):
        sy.SyntheticSentence("x", ("a", "b"), ("SRC", "SRC"), 1, prov)


def test_synthetic_json_round_trip(tmp_path):
    c = with_bleu(cand(["X", "कुछ", "a"], METHODS[1]), 0.25)
    sy.save_synthetic([c], tmp_path / "s.jsonl")
    assert sy.load_synthetic(tmp_path / "s.jsonl") == [c]


# providers


def test_lookup_whole_string_first(tmp_path):
    p = tmp_path / "t.jsonl"
    p.write_text('{"input": "a b", "output": "AB"}\n{"input": "a", "output": "x"}\n', encoding="utf-8")
    prov = load_provider(p, "reverse")
    assert prov.reverse_translate(["a", "b"]) == ["AB"]
    assert prov.reverse_translate(["a", "c"]) == ["x", "c"]


def test_transliteration_unknown_raises(tmp_path):
    p = tmp_path / "t.jsonl"
    p.write_text('{"input": "क", "output": "ka"}\n', encoding="utf-8")
    prov = load_provider(p, "transliterate")
    assert prov.transliterate(["क"]) == ["ka"]
    with pytest.raises(ProviderError):
        prov.transliterate(["ख"])


def test_identity_reverse_rejected():
    with pytest.raises(ValueError):
        load_provider("identity", "reverse")


def test_factory_provider():
    prov = load_provider("csgen.providers:IdentityTransliterator", "transliterate")
    assert prov.transliterate(["a"]) == ["a"]
