"""Optimal uniquely decodable K-ary codes via Huffman construction.

The coder minimizes expected codeword length over prefix-free K-ary codes.
For K > 2 the node list is padded with zero-weight dummies so that every merge
takes exactly K nodes and the final tree is full; the first merge then absorbs
the dummies alongside the rarest real words. Frequency ties break on the
lexicographically smallest form contained in each node, which makes codebooks
deterministic.
"""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .corpus import FrequencyTable, table_from_counts
from .errors import ConfigError, CoverageError, DecodeError, NumericError, ParseError, ValidationError

CODEBOOK_HEADER = "form\tcodeword"
_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class CodeBook:
    """A prefix-free K-ary code over a vocabulary."""

    k: int
    code: dict[str, tuple[int, ...]]
    expected_length: float

    def lengths(self) -> dict[str, int]:
        return {form: len(word) for form, word in self.code.items()}

    def kraft_sum(self) -> float:
        return float(sum(self.k ** -len(word) for word in self.code.values()))

    def codeword_str(self, form: str) -> str:
        if self.k > len(_DIGITS):
            raise ConfigError(f"cannot render digits for k={self.k} (max {len(_DIGITS)})")
        return "".join(_DIGITS[d] for d in self.code[form])


class _Node:
    __slots__ = ("weight", "min_form", "children", "form")

    def __init__(self, weight, min_form, children=(), form=None):
        self.weight = weight
        self.min_form = min_form
        self.children = children
        self.form = form


def _huffman_tree(items: Sequence[tuple[int, str]], k: int):
    """Build the merge tree for (weight, form) items; returns (root, trace).

    Each trace entry is (max merged weight, min weight left in the heap), so
    the sibling property of a valid Huffman tree - every merge combines the
    lightest available nodes - can be checked after the fact.
    """
    n = len(items)
    dummies = (1 - n) % (k - 1)
    heap = []
    serial = 0
    for _ in range(dummies):
        # Dummy key "" sorts before any real form; dummies are weight 0 and
        # interchangeable, the serial keeps heap ordering total.
        heap.append((0, "", serial, _Node(0, "")))
        serial += 1
    for weight, form in items:
        heap.append((weight, form, serial, _Node(weight, form, form=form)))
        serial += 1
    heapq.heapify(heap)

    trace: list[tuple[int, int]] = []
    while len(heap) > 1:
        merged = [heapq.heappop(heap) for _ in range(k)]
        if heap:
            trace.append((max(entry[0] for entry in merged), heap[0][0]))
        weight = sum(entry[0] for entry in merged)
        children = tuple(entry[3] for entry in merged)
        min_form = min(entry[1] for entry in merged if entry[1])
        node = _Node(weight, min_form, children)
        heapq.heappush(heap, (weight, min_form, serial, node))
        serial += 1
    return heap[0][3], trace


def build_huffman_k(freq: FrequencyTable, k: int) -> CodeBook:
    """Build the expected-length-optimal prefix-free K-ary code for ``freq``."""
    if k < 2:
        raise ConfigError(f"k must be >= 2, got {k}")
    if not freq.records:
        raise ValidationError("cannot build a code for an empty frequency table")

    items = [(rec.frequency, rec.form) for rec in freq.records.values()]
    if len(items) == 1:
        # One-word vocabulary: a zero-length codeword is not decodable, so
        # the single word takes one symbol.
        form = items[0][1]
        return CodeBook(k=k, code={form: (0,)}, expected_length=1.0)

    root, trace = _huffman_tree(items, k)
    for max_merged, min_left in trace:
        if max_merged > min_left:
            raise NumericError("sibling property violated during construction")

    code: dict[str, tuple[int, ...]] = {}
    stack = [(root, ())]
    while stack:
        node, path = stack.pop()
        if node.form is not None:
            code[node.form] = path
            continue
        for digit, child in enumerate(node.children):
            stack.append((child, path + (digit,)))

    forms = list(freq.records)
    rel = np.array([freq.records[f].rel_freq for f in forms])
    lens = np.array([len(code[f]) for f in forms], dtype=float)
    return CodeBook(k=k, code={f: code[f] for f in forms},
                    expected_length=float(np.dot(rel, lens)))


def encode(book: CodeBook, words: Iterable[str]) -> list[int]:
    """Concatenate the codewords of ``words`` into one symbol stream."""
    words = list(words)
    missing = sorted({w for w in words if w not in book.code})
    if missing:
        raise CoverageError("words not in the codebook", missing)
    out: list[int] = []
    for w in words:
        out.extend(book.code[w])
    return out


def decode(book: CodeBook, symbols: Sequence[int]) -> list[str]:
    """Decode a concatenated symbol stream back into forms."""
    trie: dict = {}
    for form, word in book.code.items():
        node = trie
        for digit in word:
            node = node.setdefault(digit, {})
        node[None] = form

    out: list[str] = []
    node = trie
    for offset, digit in enumerate(symbols):
        if not 0 <= digit < book.k:
            raise DecodeError(f"symbol {digit!r} out of range for k={book.k}", offset)
        if digit not in node:
            raise DecodeError("no codeword matches the stream", offset)
        node = node[digit]
        if None in node:
            out.append(node[None])
            node = trie
    if node is not trie:
        raise DecodeError("stream ends inside a codeword", len(symbols))
    return out


def roundtrip(book: CodeBook, words: Iterable[str]) -> list[str]:
    """Encode then decode; returns the input sequence when the book is valid."""
    return decode(book, encode(book, words))


class HuffmanCoder(BaseEstimator, TransformerMixin):
    """Estimator wrapper: fit on frequencies, transform forms to codewords."""

    def __init__(self, k: int = 2):
        self.k = k

    def fit(self, X: FrequencyTable | Mapping[str, int], y=None) -> "HuffmanCoder":
        if isinstance(X, FrequencyTable):
            table = X
        else:
            counts = Counter(dict(X))
            table = table_from_counts(counts, total_tokens=sum(counts.values()))
        self.codebook_ = build_huffman_k(table, self.k)
        return self

    def transform(self, X: Iterable[str]) -> list[str]:
        check_is_fitted(self, "codebook_")
        forms = list(X)
        missing = sorted({f for f in forms if f not in self.codebook_.code})
        if missing:
            raise CoverageError("words not in the codebook", missing)
        return [self.codebook_.codeword_str(f) for f in forms]

    def inverse_transform(self, X: Iterable[str]) -> list[str]:
        check_is_fitted(self, "codebook_")
        digits = {ch: i for i, ch in enumerate(_DIGITS[:self.codebook_.k])}
        out = []
        for word in X:
            try:
                symbols = [digits[ch] for ch in word]
            except KeyError as exc:
                raise DecodeError(f"invalid digit {exc.args[0]!r}", 0) from exc
            decoded = decode(self.codebook_, symbols)
            if len(decoded) != 1:
                raise DecodeError("codeword string decodes to more than one form", 0)
            out.append(decoded[0])
        return out


def codebook_to_tsv(book: CodeBook) -> str:
    lines = [CODEBOOK_HEADER]
    for form in sorted(book.code):
        lines.append(f"{form}\t{book.codeword_str(form)}")
    return "\n".join(lines) + "\n"


def codebook_from_tsv(text: str, k: int | None = None,
                      freq: FrequencyTable | None = None) -> CodeBook:
    """Parse a codebook TSV.

    ``k`` is inferred as (largest digit + 1, at least 2) when not given.
    ``expected_length`` needs frequencies; it is NaN when ``freq`` is absent.
    """
    lines = text.split("\n")
    if not lines or lines[0].rstrip("\r") != CODEBOOK_HEADER:
        raise ParseError(f"expected header {CODEBOOK_HEADER!r}", line_no=1)
    digits = {ch: i for i, ch in enumerate(_DIGITS)}
    code: dict[str, tuple[int, ...]] = {}
    max_digit = 0
    for no, line in enumerate(lines[1:], start=2):
        line = line.rstrip("\r")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(f"expected 2 tab-separated fields, got {len(parts)}", line_no=no)
        form, word = parts
        if form in code:
            raise ValidationError(f"line {no}: duplicate form {form!r}")
        try:
            symbols = tuple(digits[ch] for ch in word)
        except KeyError as exc:
            raise ParseError(f"invalid codeword digit {exc.args[0]!r}", line_no=no) from exc
        if not symbols:
            raise ValidationError(f"line {no}: empty codeword")
        code[form] = symbols
        max_digit = max(max_digit, max(symbols))
    if not code:
        raise ValidationError("codebook file contains no rows")
    if k is None:
        k = max(2, max_digit + 1)
    elif max_digit >= k:
        raise ValidationError(f"codeword digit {max_digit} out of range for k={k}")
    if freq is not None:
        expected = sum(freq.records[f].rel_freq * len(w) for f, w in code.items()
                       if f in freq.records)
    else:
        expected = float("nan")
    return CodeBook(k=k, code=code, expected_length=float(expected))
