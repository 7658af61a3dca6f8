"""Deterministic English-Hindi toy fixture.

Sentences come from a handful of templates whose word alignments are known,
so every artifact the pipeline consumes can be written out: a labeled
English corpus, Devanagari translations, bracketed parse trees, noisy
attention matrices, a polarity lexicon, transliteration and
reverse-translation lookup tables, and a small labeled code-switched "gold"
corpus in romanized Hindi for augmentation experiments.
"""

import json
import random
from pathlib import Path

import numpy as np

from .corpus_io import format_score_matrix

# english, devanagari, romanized
NOUNS = [
    ("movie", "फ़िल्म", "film"),
    ("song", "गाना", "gaana"),
    ("food", "खाना", "khaana"),
    ("team", "टीम", "team"),
    ("match", "मैच", "match"),
    ("story", "कहानी", "kahaani"),
    ("actor", "अभिनेता", "abhineta"),
    ("phone", "फ़ोन", "phone"),
    ("service", "सेवा", "seva"),
    ("book", "किताब", "kitaab"),
    ("music", "संगीत", "sangeet"),
    ("hotel", "होटल", "hotel"),
]
POSITIVE = [
    ("good", "अच्छा", "accha", 0.6),
    ("great", "शानदार", "shaandaar", 0.8),
    ("wonderful", "अद्भुत", "adbhut", 0.9),
    ("beautiful", "सुंदर", "sundar", 0.7),
    ("amazing", "कमाल", "kamaal", 0.9),
    ("lovely", "प्यारा", "pyaara", 0.7),
]
NEGATIVE = [
    ("bad", "बुरा", "bura", -0.6),
    ("terrible", "भयानक", "bhayanak", -0.9),
    ("boring", "उबाऊ", "ubaau", -0.6),
    ("awful", "घटिया", "ghatiya", -0.9),
    ("sad", "दुखद", "dukhad", -0.7),
    ("weak", "कमज़ोर", "kamzor", -0.5),
]
NEUTRAL = [
    ("long", "लंबा", "lamba"),
    ("new", "नया", "naya"),
    ("old", "पुराना", "puraana"),
    ("short", "छोटा", "chhota"),
]
FUNCTION = {
    "was": ("था", "tha"),
    "is": ("है", "hai"),
    "very": ("बहुत", "bahut"),
    "not": ("नहीं", "nahi"),
    "but": ("लेकिन", "lekin"),
    "and": ("और", "aur"),
    "it": ("यह", "yah"),
    "tears": ("आँसुओं", "aansuon"),
    "watched": ("देखा", "dekha"),
    "i": ("मैंने", "maine"),
}
# multi-word or function-only target tokens: devanagari -> (romanized, gloss)
EXTRA_TARGET = {
    "के": ("ke", "with"),
    "साथ": ("saath", ""),
    "ख़त्म": ("khatm", "ended"),
    "हुआ": ("hua", ""),
}
INTENSIFIERS = {"very"}
NEGATIONS = {"not"}


def _adjective(rng, polarity):
    if polarity > 0:
        en, hi, rom, _ = rng.choice(POSITIVE)
    elif polarity < 0:
        en, hi, rom, _ = rng.choice(NEGATIVE)
    else:
        en, hi, rom = rng.choice(NEUTRAL)
    return en, hi, rom


def _t(word):
    return FUNCTION[word][0]


def _simple(rng, polarity, intensify):
    """the N was (very) ADJ  ->  N (bahut) ADJ tha"""
    n_en, n_hi, _ = rng.choice(NOUNS)
    a_en, a_hi, _ = _adjective(rng, polarity)
    if intensify:
        src = ["the", n_en, "was", "very", a_en]
        tgt = [n_hi, _t("very"), a_hi, _t("was")]
        align = [[1], [3], [4], [2]]
        tree = (f"(S (NP (DT the) (NN {n_en})) (VP (VBD was) "
                f"(ADJP (RB very) (JJ {a_en}))))")
    else:
        src = ["the", n_en, "was", a_en]
        tgt = [n_hi, a_hi, _t("was")]
        align = [[1], [3], [2]]
        tree = f"(S (NP (DT the) (NN {n_en})) (VP (VBD was) (ADJP (JJ {a_en}))))"
    return src, tgt, align, tree, polarity


def _contrast(rng, polarity):
    """the N ended with tears but the N2 was ADJ"""
    n_en, n_hi, _ = rng.choice(NOUNS)
    m_en, m_hi, _ = rng.choice([n for n in NOUNS if n[0] != n_en])
    a_en, a_hi, _ = _adjective(rng, polarity)
    src = ["the", n_en, "ended", "with", "tears", "but", "the", m_en, "was", a_en]
    tgt = [n_hi, _t("tears"), "के", "साथ", "ख़त्म", "हुआ", _t("but"), m_hi, a_hi, _t("was")]
    align = [[1], [4], [3], [3], [2], [2], [5], [7], [9], [8]]
    tree = (f"(S (S (NP (DT the) (NN {n_en})) (VP (VBD ended) (PP (IN with) (NP (NNS tears))))) "
            f"(SBAR (CC but) (S (NP (DT the) (NN {m_en})) (VP (VBD was) (ADJP (JJ {a_en}))))))")
    return src, tgt, align, tree, polarity


def _negated(rng, polarity):
    """i watched the N and it was not ADJ  (label is the flipped polarity)"""
    n_en, n_hi, _ = rng.choice(NOUNS)
    a_en, a_hi, _ = _adjective(rng, -polarity)
    src = ["i", "watched", "the", n_en, "and", "it", "was", "not", a_en]
    tgt = [_t("i"), n_hi, _t("watched"), _t("and"), _t("it"), a_hi, _t("not"), _t("was")]
    align = [[0], [3], [1], [4], [5], [8], [7], [6]]
    tree = (f"(S (S (NP (PRP i)) (VP (VBD watched) (NP (DT the) (NN {n_en})))) (CC and) "
            f"(S (NP (PRP it)) (VP (VBD was) (RB not) (ADJP (JJ {a_en})))))")
    return src, tgt, align, tree, polarity


def _pair(rng, polarity):
    """this N is ADJ and the N2 is ADJ2"""
    n_en, n_hi, _ = rng.choice(NOUNS)
    m_en, m_hi, _ = rng.choice([n for n in NOUNS if n[0] != n_en])
    a_en, a_hi, _ = _adjective(rng, polarity)
    b_en, b_hi, _ = _adjective(rng, polarity)
    src = ["this", n_en, "is", a_en, "and", "the", m_en, "is", b_en]
    tgt = [_t("it"), n_hi, a_hi, _t("is"), _t("and"), m_hi, b_hi, _t("is")]
    align = [[0], [1], [3], [2], [4], [6], [8], [7]]
    tree = (f"(S (S (NP (DT this) (NN {n_en})) (VP (VBZ is) (ADJP (JJ {a_en})))) (CC and) "
            f"(S (NP (DT the) (NN {m_en})) (VP (VBZ is) (ADJP (JJ {b_en})))))")
    return src, tgt, align, tree, polarity


def _attention(rng, src_len, align, peak=0.75):
    nrng = np.random.default_rng(rng.randrange(2**32))
    rows = []
    for targets in align:
        noise = nrng.dirichlet(np.ones(src_len)) * (1.0 - peak)
        row = noise
        for j in targets:
            row[j] += peak / len(targets)
        rows.append(np.round(row, 6))
    return np.array(rows)


def _source_sentences(rng, n):
    makers = [
        lambda p: _simple(rng, p, False),
        lambda p: _simple(rng, p, True),
        lambda p: _contrast(rng, p),
        lambda p: _negated(rng, p),
        lambda p: _pair(rng, p),
    ]
    out = []
    for k in range(n):
        polarity = (1, -1, 0)[k % 3]
        maker = makers[(k // 3) % len(makers)]
        if polarity == 0 and maker is makers[3]:
            maker = makers[0]
        out.append(maker(polarity))
    return out


def _translit_table():
    table = {}
    for en, hi, rom in NOUNS + NEUTRAL:
        table[hi] = rom
    for en, hi, rom, _ in POSITIVE + NEGATIVE:
        table[hi] = rom
    for en, (hi, rom) in FUNCTION.items():
        table[hi] = rom
    for hi, (rom, _) in EXTRA_TARGET.items():
        table[hi] = rom
    return table


def _reverse_table():
    table = {}
    for en, hi, rom in NOUNS + NEUTRAL:
        table[rom] = en
    for en, hi, rom, _ in POSITIVE + NEGATIVE:
        table[rom] = en
    for en, (hi, rom) in FUNCTION.items():
        table[rom] = en
    for hi, (rom, gloss) in EXTRA_TARGET.items():
        table[rom] = gloss
    # nouns that keep their english form ("team", "phone") map to themselves
    return dict(sorted(table.items()))


def _gold_sentences(rng, n):
    """Natural-looking code-switched sentences with romanized Hindi segments."""
    out = []
    for k in range(n):
        polarity = (1, -1, 0)[k % 3]
        n_en, _, n_rom = rng.choice(NOUNS)
        a_en, _, a_rom = _adjective(rng, polarity)
        style = rng.randrange(4)
        if style == 0:
            toks = ["the", n_en, a_rom, "tha"]
        elif style == 1:
            toks = ["yaar", "the", n_en, "was", "bahut", a_rom]
        elif style == 2:
            toks = [n_rom, "ekdum", a_rom, "hai", "#" + n_en]
        else:
            toks = ["this", n_en, "is", a_rom, "lol"]
        out.append((toks, polarity))
    return out


def build_toy_fixture(out_dir, n_source=60, n_gold=48, seed=7):
    """Write the toy fixture into ``out_dir`` and return the directory."""
    out = Path(out_dir)
    (out / "attn").mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    sentences = _source_sentences(rng, n_source)
    with open(out / "corpus.jsonl", "w", encoding="utf-8", newline="\n") as fc, \
            open(out / "pairs.jsonl", "w", encoding="utf-8", newline="\n") as fp, \
            open(out / "trees.txt", "w", encoding="utf-8", newline="\n") as ft:
        for k, (src, tgt, align, tree, label) in enumerate(sentences):
            sid = f"s{k:03d}"
            fc.write(json.dumps({"id": sid, "text": " ".join(src), "label": label}, ensure_ascii=False) + "\n")
            fp.write(json.dumps({"id": sid, "target_tokens": tgt}, ensure_ascii=False) + "\n")
            ft.write(f"{sid}\t{tree}\n")
            mat = _attention(rng, len(src), align)
            (out / "attn" / f"{sid}.attn").write_text(format_score_matrix(mat), encoding="utf-8")
    with open(out / "lexicon.tsv", "w", encoding="utf-8", newline="\n") as f:
        for en, _, _, val in POSITIVE + NEGATIVE:
            f.write(f"{en}\t{val}\n")
        f.write("tears\t-0.4\n")
    with open(out / "translit.jsonl", "w", encoding="utf-8", newline="\n") as f:
        for hi, rom in sorted(_translit_table().items()):
            f.write(json.dumps({"input": hi, "output": rom}, ensure_ascii=False) + "\n")
    with open(out / "reverse.jsonl", "w", encoding="utf-8", newline="\n") as f:
        for rom, en in _reverse_table().items():
            f.write(json.dumps({"input": rom, "output": en}, ensure_ascii=False) + "\n")
    with open(out / "gold.jsonl", "w", encoding="utf-8", newline="\n") as f:
        for k, (toks, label) in enumerate(_gold_sentences(rng, n_gold)):
            f.write(json.dumps({"id": f"g{k:03d}", "text": " ".join(toks), "label": label},
                               ensure_ascii=False) + "\n")
    (out / "config.yaml").write_text(TOY_CONFIG, encoding="utf-8")
    return out


TOY_CONFIG = """\
# Toy English-Hindi run; paths are relative to this file.
corpus: corpus.jsonl
pairs: pairs.jsonl
trees: trees.txt
attn_dir: attn
lexicon: lexicon.tsv
translit: translit.jsonl
reverse: reverse.jsonl
gold: gold.jsonl
out_dir: out

ibm_iterations: 10
bleu_floor: 0.2
sample_total: 48
run_eval: false
seed: 0
"""


def bundled_fixture_dir() -> Path:
    return Path(__file__).parent / "data" / "toy"
