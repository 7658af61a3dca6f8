"""Readers and writers for labeled corpora, parallel pairs, parse trees and
word-pair score matrices.

Everything returned from here is immutable: dataclasses are frozen, token
sequences are tuples and score matrices are read-only numpy arrays.
"""

import csv
import json
import os
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

# Default label-name mapping for three-way sentiment.
SENTIMENT_LABELS = {"negative": -1, "neutral": 0, "positive": 1}
# Two-way hate speech; abusive tweets are folded into the hate class.
HATE_LABELS = {"normal": 0, "hate": 1, "abusive": 1}


class CorpusFormatError(ValueError):
    """A corpus, tree or matrix file does not follow its format."""


class TreeParseError(CorpusFormatError):
    """Malformed bracketed tree. ``offset`` is a 1-based character position;
    running out of input reports ``len(text) + 1``."""

    def __init__(self, message, offset):
        super().__init__(f"offset {offset}: {message}")
        self.offset = offset


class MatrixShapeError(CorpusFormatError):
    pass


def tokenize(text: str) -> tuple:
    return tuple(unicodedata.normalize("NFC", text).split())


@dataclass(frozen=True)
class LabeledSentence:
    id: str
    tokens: tuple
    label: int

    def __post_init__(self):
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise CorpusFormatError(f"sentence {self.id!r} has no tokens")
        for tok in self.tokens:
            if not isinstance(tok, str) or not tok.strip():
                raise CorpusFormatError(f"sentence {self.id!r} has an empty token")

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class ParallelPair:
    source: LabeledSentence
    target_tokens: tuple

    def __post_init__(self):
        object.__setattr__(self, "target_tokens", tuple(self.target_tokens))
        if not self.target_tokens:
            raise CorpusFormatError(f"pair {self.source.id!r} has no target tokens")

    @property
    def id(self) -> str:
        return self.source.id


# --------------------------------------------------------------------------
# labeled corpora


def _coerce_label(raw, label_names, where):
    if isinstance(raw, bool):
        raise CorpusFormatError(f"{where}: label must be an integer or a label name")
    if isinstance(raw, int):
        return raw
    if isinstance(raw, float) and raw.is_integer():
        return int(raw)
    if isinstance(raw, str):
        key = raw.strip()
        if label_names and key.lower() in label_names:
            return int(label_names[key.lower()])
        try:
            return int(key)
        except ValueError:
            pass
    raise CorpusFormatError(f"{where}: unrecognised label {raw!r}")


def _record_to_sentence(rec, label_names, where):
    if not isinstance(rec, Mapping):
        raise CorpusFormatError(f"{where}: record is not an object")
    if "id" not in rec or rec["id"] in (None, ""):
        raise CorpusFormatError(f"{where}: missing id")
    if "label" not in rec or rec["label"] in (None, ""):
        raise CorpusFormatError(f"{where}: missing label")
    if rec.get("tokens") is not None:
        tokens = rec["tokens"]
        if isinstance(tokens, str) or not all(isinstance(t, str) for t in tokens):
            raise CorpusFormatError(f"{where}: tokens must be a list of strings")
        tokens = tuple(unicodedata.normalize("NFC", t) for t in tokens)
    elif rec.get("text") is not None:
        tokens = tokenize(str(rec["text"]))
    else:
        raise CorpusFormatError(f"{where}: missing text")
    label = _coerce_label(rec["label"], label_names, where)
    try:
        return LabeledSentence(str(rec["id"]), tokens, label)
    except CorpusFormatError as exc:
        raise CorpusFormatError(f"{where}: {exc}") from None


def _infer_format(path):
    suffix = Path(path).suffix.lower()
    if suffix in (".tsv", ".tab"):
        return "tsv"
    return "jsonl"


def _iter_jsonl(path):
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from None


def load_labeled_corpus(path, format=None, label_names=SENTIMENT_LABELS):
    """Load a labeled corpus from a JSONL or TSV file.

    JSONL records look like ``{"id": ..., "text" | "tokens": ..., "label": ...}``.
    TSV files need a header row naming at least the ``id``, ``text`` and
    ``label`` columns. Labels may be integers or names from ``label_names``.
    """
    fmt = format or _infer_format(path)
    sentences = []
    seen = {}
    if fmt == "jsonl":
        records = _iter_jsonl(path)
    elif fmt == "tsv":
        records = _iter_tsv(path)
    else:
        raise ValueError(f"unknown corpus format {fmt!r}")
    for lineno, rec in records:
        where = f"line {lineno}"
        sent = _record_to_sentence(rec, label_names, where)
        if sent.id in seen:
            raise CorpusFormatError(
                f"{where}: duplicate id {sent.id!r} (first seen on line {seen[sent.id]})")
        seen[sent.id] = lineno
        sentences.append(sent)
    return sentences


def _iter_tsv(path):
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f, delimiter="\t", quoting=csv.QUOTE_NONE)
        header = None
        for row in reader:
            lineno = reader.line_num
            if not any(cell.strip() for cell in row):
                continue
            if header is None:
                header = [h.strip() for h in row]
                missing = {"id", "text", "label"} - set(header)
                if missing:
                    raise CorpusFormatError(
                        f"line {lineno}: header lacks column(s) {', '.join(sorted(missing))}")
                continue
            if len(row) != len(header):
                raise CorpusFormatError(
                    f"line {lineno}: expected {len(header)} fields, got {len(row)}")
            yield lineno, dict(zip(header, row))


def sentence_record(sent: LabeledSentence) -> dict:
    text = sent.text
    if tokenize(text) == sent.tokens:
        return {"id": sent.id, "text": text, "label": sent.label}
    return {"id": sent.id, "tokens": list(sent.tokens), "label": sent.label}


def dump_jsonl(records: Iterable[Mapping], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for rec in records:
            f.write(json.dumps(rec, ensure_ascii=False))
            f.write("\n")


def save_labeled_corpus(sentences: Iterable[LabeledSentence], path, format=None) -> None:
    fmt = format or _infer_format(path)
    if fmt == "jsonl":
        dump_jsonl((sentence_record(s) for s in sentences), path)
    elif fmt == "tsv":
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("id\ttext\tlabel\n")
            for s in sentences:
                if "\t" in s.id or any("\t" in t for t in s.tokens):
                    raise CorpusFormatError(f"sentence {s.id!r} contains a tab")
                f.write(f"{s.id}\t{s.text}\t{s.label}\n")
    else:
        raise ValueError(f"unknown corpus format {fmt!r}")


# --------------------------------------------------------------------------
# parallel pairs


def load_parallel(corpus: Sequence[LabeledSentence], path) -> list:
    """Join ``{"id", "target_tokens" | "target_text"}`` records onto ``corpus``.

    The result follows corpus order. Every corpus sentence needs exactly one
    target record and every target record must name a corpus sentence.
    """
    by_id = {s.id: s for s in corpus}
    targets = {}
    for lineno, rec in _iter_jsonl(path):
        where = f"line {lineno}"
        if not isinstance(rec, Mapping) or rec.get("id") in (None, ""):
            raise CorpusFormatError(f"{where}: missing id")
        sid = str(rec["id"])
        if sid in targets:
            raise CorpusFormatError(f"{where}: duplicate id {sid!r}")
        if sid not in by_id:
            raise CorpusFormatError(f"{where}: id {sid!r} is not in the corpus")
        if rec.get("target_tokens") is not None:
            toks = tuple(unicodedata.normalize("NFC", t) for t in rec["target_tokens"])
        elif rec.get("target_text") is not None:
            toks = tokenize(rec["target_text"])
        else:
            raise CorpusFormatError(f"{where}: missing target_tokens")
        if not toks or any(not t.strip() for t in toks):
            raise CorpusFormatError(f"{where}: empty target token sequence")
        targets[sid] = toks
    missing = [s.id for s in corpus if s.id not in targets]
    if missing:
        raise CorpusFormatError(f"no target sentence for id(s) {', '.join(missing[:5])}")
    return [ParallelPair(s, targets[s.id]) for s in corpus]


def _token_field(rec, tokens_key, text_key, where):
    if rec.get(tokens_key) is not None:
        toks = rec[tokens_key]
        if isinstance(toks, str) or not all(isinstance(t, str) for t in toks):
            raise CorpusFormatError(f"{where}: {tokens_key} must be a list of strings")
        return tuple(unicodedata.normalize("NFC", t) for t in toks)
    if rec.get(text_key) is not None:
        return tokenize(str(rec[text_key]))
    raise CorpusFormatError(f"{where}: missing {tokens_key}")


def load_bitext(path, label_names=SENTIMENT_LABELS) -> list:
    """Load self-contained pairs ``{"id", "source_tokens" | "source_text",
    "target_tokens" | "target_text", "label"?}``; the label may be absent."""
    pairs = []
    seen = set()
    for lineno, rec in _iter_jsonl(path):
        where = f"line {lineno}"
        if not isinstance(rec, Mapping) or rec.get("id") in (None, ""):
            raise CorpusFormatError(f"{where}: missing id")
        sid = str(rec["id"])
        if sid in seen:
            raise CorpusFormatError(f"{where}: duplicate id {sid!r}")
        seen.add(sid)
        src = _token_field(rec, "source_tokens", "source_text", where)
        tgt = _token_field(rec, "target_tokens", "target_text", where)
        raw = rec.get("label")
        label = None if raw in (None, "") else _coerce_label(raw, label_names, where)
        try:
            pairs.append(ParallelPair(LabeledSentence(sid, src, label), tgt))
        except CorpusFormatError as exc:
            raise CorpusFormatError(f"{where}: {exc}") from None
    if not pairs:
        raise CorpusFormatError(f"{path}: no pairs")
    return pairs


def save_parallel(pairs: Iterable[ParallelPair], path) -> None:
    dump_jsonl(({"id": p.id, "target_tokens": list(p.target_tokens)} for p in pairs), path)


# --------------------------------------------------------------------------
# constituency trees


@dataclass(frozen=True)
class TreeNode:
    """A tree node covering tokens ``[lo, hi)``.

    Preterminals carry the terminal in ``word`` and have no children.
    """

    label: str
    children: tuple
    lo: int
    hi: int
    word: Optional[str] = None

    @property
    def is_preterminal(self) -> bool:
        return self.word is not None

    def subtrees(self):
        yield self
        for child in self.children:
            yield from child.subtrees()

    def to_bracketed(self) -> str:
        if self.word is not None:
            return f"({self.label} {self.word})" if self.label else self.word
        inner = " ".join(c.to_bracketed() for c in self.children)
        return f"({self.label} {inner})" if self.label else f"( {inner})"


@dataclass(frozen=True)
class ParseTree:
    root: TreeNode
    leaves: tuple = field(default=())

    def subtrees(self):
        return self.root.subtrees()

    def to_bracketed(self) -> str:
        return self.root.to_bracketed()


_TREE_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def parse_bracketed_tree(text: str) -> ParseTree:
    """Read a Penn-style bracketed tree such as ``(S (NP (DT the) (NN movie)))``.

    Node spans are half-open token intervals computed from the leaves.
    """
    tokens = [(m.group(), m.start() + 1) for m in _TREE_TOKEN.finditer(text)]
    if not tokens:
        raise TreeParseError("empty tree", 1)
    end = len(text) + 1
    leaves = []
    pos = 0

    def parse_node():
        nonlocal pos
        tok, off = tokens[pos]
        if tok != "(":
            raise TreeParseError(f"expected '(' but found {tok!r}", off)
        open_off = off
        pos += 1
        if pos >= len(tokens):
            raise TreeParseError("unexpected end of input", end)
        label = ""
        if tokens[pos][0] not in "()":
            label = tokens[pos][0]
            pos += 1
        lo = len(leaves)
        children = []
        while True:
            if pos >= len(tokens):
                raise TreeParseError("unexpected end of input", end)
            tok, off = tokens[pos]
            if tok == ")":
                pos += 1
                break
            if tok == "(":
                children.append(parse_node())
            else:
                # terminal directly under this node
                leaves.append(tok)
                children.append(TreeNode("", (), len(leaves) - 1, len(leaves), word=tok))
                pos += 1
        if len(children) == 1 and children[0].word is not None and not children[0].label:
            word = children[0].word
            return TreeNode(label, (), lo, lo + 1, word=word)
        if not children:
            raise TreeParseError(f"node {label!r} has no children", open_off)
        return TreeNode(label, tuple(children), lo, len(leaves))

    root = parse_node()
    if pos != len(tokens):
        tok, off = tokens[pos]
        raise TreeParseError(f"trailing input {tok!r}", off)
    # unwrap PTB-style empty root and ROOT/TOP wrappers with a single child
    while root.label in ("", "ROOT", "TOP") and len(root.children) == 1 and root.word is None:
        root = root.children[0]
    return ParseTree(root, tuple(leaves))


def load_trees(path, corpus: Optional[Sequence[LabeledSentence]] = None) -> dict:
    """Read one tree per line.

    Lines are either ``id<TAB>tree`` or a bare tree; bare trees are aligned
    with ``corpus`` by position. Leaves are checked against the sentence
    tokens when a corpus is given.
    """
    trees = {}
    bare = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if "\t" in line:
                sid, text = line.split("\t", 1)
            else:
                sid, text = None, line
            try:
                tree = parse_bracketed_tree(unicodedata.normalize("NFC", text))
            except TreeParseError as exc:
                raise CorpusFormatError(f"line {lineno}: {exc}") from None
            if sid is None:
                bare.append((lineno, tree))
            else:
                if sid in trees:
                    raise CorpusFormatError(f"line {lineno}: duplicate id {sid!r}")
                trees[sid] = tree
    if bare:
        if trees:
            raise CorpusFormatError("tree file mixes id-tagged and bare lines")
        if corpus is None:
            raise CorpusFormatError("bare tree lines need a corpus to align with")
        if len(bare) != len(corpus):
            raise CorpusFormatError(
                f"{len(bare)} trees for {len(corpus)} sentences")
        trees = {s.id: t for s, (_, t) in zip(corpus, bare)}
    if corpus is not None:
        for s in corpus:
            tree = trees.get(s.id)
            if tree is not None and tree.leaves != s.tokens:
                raise CorpusFormatError(
                    f"tree leaves for id {s.id!r} do not match the sentence tokens")
    return trees


# --------------------------------------------------------------------------
# score matrices


def _finalize_matrix(values, where):
    mat = np.asarray(values, dtype=float)
    if mat.ndim != 2:
        raise CorpusFormatError(f"{where}: score matrix must be two-dimensional")
    if not np.all(np.isfinite(mat)):
        raise CorpusFormatError(f"{where}: score matrix has non-finite entries")
    if np.any(mat < 0):
        raise CorpusFormatError(f"{where}: score matrix has negative entries")
    mat.setflags(write=False)
    return mat


def as_score_matrix(values) -> np.ndarray:
    """Validate ``values`` and return them as a read-only (|t|, |s|) array."""
    return _finalize_matrix(values, "matrix")


def load_score_matrix(path, shape=None) -> np.ndarray:
    """Load a |t| x |s| matrix, rows indexed by target token.

    The text format is a ``rows cols`` header followed by row-major floats;
    a ``.json`` file holds ``{"rows", "cols", "values"}``. ``shape`` is the
    expected ``(len(target), len(source))`` of the paired sentences.
    """
    where = os.fspath(path)
    with open(path, encoding="utf-8") as f:
        content = f.read()
    if Path(path).suffix.lower() == ".json" or content.lstrip().startswith("{"):
        try:
            obj = json.loads(content)
            rows, cols, values = int(obj["rows"]), int(obj["cols"]), obj["values"]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise CorpusFormatError(f"{where}: bad JSON matrix ({exc})") from None
        flat = [float(v) for row in values for v in (row if isinstance(row, list) else [row])]
    else:
        parts = content.split()
        if len(parts) < 2:
            raise CorpusFormatError(f"{where}: missing 'rows cols' header")
        try:
            rows, cols = int(parts[0]), int(parts[1])
            flat = [float(v) for v in parts[2:]]
        except ValueError as exc:
            raise CorpusFormatError(f"{where}: {exc}") from None
    if rows <= 0 or cols <= 0:
        raise MatrixShapeError(f"{where}: dimensions must be positive, got {rows}x{cols}")
    if len(flat) != rows * cols:
        raise MatrixShapeError(
            f"{where}: header says {rows}x{cols} but {len(flat)} values follow")
    mat = _finalize_matrix(np.array(flat).reshape(rows, cols), where)
    if shape is not None and tuple(shape) != mat.shape:
        raise MatrixShapeError(
            f"{where}: matrix is {mat.shape[0]}x{mat.shape[1]} but the pair needs "
            f"{shape[0]}x{shape[1]} (|t| x |s|)")
    return mat


def format_score_matrix(mat) -> str:
    mat = np.asarray(mat, dtype=float)
    lines = [f"{mat.shape[0]} {mat.shape[1]}"]
    lines.extend(" ".join(repr(float(v)) for v in row) for row in mat)
    return "\n".join(lines) + "\n"


def save_score_matrix(mat, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(format_score_matrix(mat))


def load_matrix_dir(directory, pairs: Sequence[ParallelPair], suffix: str) -> dict:
    """Load ``<id><suffix>`` for each pair that has one; absent files are skipped."""
    out = {}
    for p in pairs:
        path = Path(directory) / f"{p.id}{suffix}"
        if path.exists():
            out[p.id] = load_score_matrix(path, shape=(len(p.target_tokens), len(p.source.tokens)))
    return out

