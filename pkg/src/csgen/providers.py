"""Transliteration and reverse-translation providers.

Pipelines depend only on the two Protocol classes below. The file-backed
implementation makes runs hermetic; network-backed providers can be plugged
in through ``load_provider("package.module:Factory")``.
"""

import importlib
import json
import threading
import unicodedata
from pathlib import Path
from typing import Protocol, Sequence, runtime_checkable

from .corpus_io import CorpusFormatError


class ProviderError(RuntimeError):
    pass


@runtime_checkable
class TransliterationProvider(Protocol):
    def transliterate(self, tokens: Sequence[str]) -> list:
        """Map target-script tokens to source-script tokens, one for one."""


@runtime_checkable
class ReverseTranslationProvider(Protocol):
    def reverse_translate(self, tokens: Sequence[str]) -> list:
        """Translate a code-switched token sequence back to the source language."""


class IdentityTransliterator:
    """For target languages already written in the source script."""

    def transliterate(self, tokens):
        return list(tokens)


def _norm(text):
    return " ".join(unicodedata.normalize("NFC", text).split())


def load_lookup_table(path) -> dict:
    table = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                key, value = _norm(rec["input"]), _norm(rec["output"])
            except (json.JSONDecodeError, KeyError, TypeError, AttributeError):
                raise CorpusFormatError(f"{path}: line {lineno}: expected {{input, output}}") from None
            if key in table and table[key] != value:
                raise CorpusFormatError(f"{path}: line {lineno}: conflicting entry for {key!r}")
            table[key] = value
    return table


class FileBackedProvider:
    """Exact-match lookup keyed by the space-joined input.

    When the whole input is not in the table each token is looked up on its
    own. Unknown tokens either pass through unchanged (natural for reverse
    translation, where source-language words need no change) or raise.
    """

    def __init__(self, table: dict, passthrough_unknown: bool = False, name: str = "lookup"):
        self.table = dict(table)
        self.passthrough_unknown = passthrough_unknown
        self.name = name
        self._lock = threading.Lock()
        self.misses = 0

    @classmethod
    def from_file(cls, path, passthrough_unknown=False):
        return cls(load_lookup_table(path), passthrough_unknown, name=Path(path).name)

    def _lookup(self, tokens):
        key = _norm(" ".join(tokens))
        hit = self.table.get(key)
        if hit is not None:
            return hit.split()
        out = []
        for tok in tokens:
            value = self.table.get(_norm(tok))
            if value is None:
                if not self.passthrough_unknown:
                    with self._lock:
                        self.misses += 1
                    raise ProviderError(f"{self.name}: no entry for {tok!r}")
                out.append(tok)
            else:
                out.extend(value.split())
        return out

    def transliterate(self, tokens):
        out = self._lookup(tokens)
        if len(out) != len(tokens):
            raise ProviderError(
                f"{self.name}: transliteration of {len(tokens)} token(s) returned {len(out)}")
        return out

    def reverse_translate(self, tokens):
        return self._lookup(tokens)


def load_provider(value, role: str):
    """Build a provider from a config value.

    ``identity`` gives the identity transliterator, a ``.jsonl`` path gives a
    file-backed lookup, and ``module:attr`` imports a factory and calls it.
    """
    if role not in ("transliterate", "reverse"):
        raise ValueError(f"unknown provider role {role!r}")
    if value is None or value == "identity":
        if role == "reverse":
            raise ValueError("reverse translation has no identity provider")
        return IdentityTransliterator()
    value = str(value)
    if ":" in value and not Path(value).exists():
        module, _, attr = value.partition(":")
        factory = getattr(importlib.import_module(module), attr)
        return factory()
    return FileBackedProvider.from_file(value, passthrough_unknown=(role == "reverse"))
