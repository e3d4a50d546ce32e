#!/usr/bin/env python3
"""Generate the bundled fixture corpus under tests/data/.

A synthetic language with a Zipf-Mandelbrot unigram distribution, wordform
lengths correlated with unigram surprisal, and first-order class structure so
that contextual surprisal genuinely varies per word. A sprinkle of
punctuation-attached, numeric, and non-ASCII tokens exercises the filtering
protocols. Deterministic for a fixed seed; the generated files are checked in,
so regeneration is only needed when changing the recipe.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

SEED = 20240203
N_TYPES = 1800
N_TRAIN = 120_000
N_TEST = 30_000
N_CLASSES = 7
CLASS_JUMP = 3
CLASS_STICKINESS = 0.5
PUNCT_RATE = 0.02
DIGIT_RATE = 0.008
DECORATED_RATE = 0.004
DECORATED = ("café", "naïve", "señal", "über")

LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _make_vocab(rng: np.random.Generator) -> tuple[list[str], np.ndarray]:
    ranks = np.arange(1, N_TYPES + 1, dtype=float)
    probs = (ranks + 2.7) ** -1.07
    probs /= probs.sum()
    surprisal = -np.log2(probs)
    lengths = np.clip(np.rint(0.55 * surprisal + rng.normal(0.0, 0.6, N_TYPES)),
                      1, 14).astype(int)
    forms: list[str] = []
    seen: set[str] = set()
    for L in lengths:
        attempt = int(L)
        while True:
            form = "".join(LETTERS[i] for i in rng.integers(0, 26, attempt))
            if form not in seen:
                seen.add(form)
                forms.append(form)
                break
            attempt += 1  # tiny-length collisions: grow until unique
    return forms, probs


def _class_tables(probs: np.ndarray) -> list[np.ndarray]:
    classes = np.arange(N_TYPES) % N_CLASSES
    tables = []
    for c in range(N_CLASSES):
        masked = np.where(classes == c, probs, 0.0)
        tables.append(masked / masked.sum())
    return tables


def _sample_tokens(rng: np.random.Generator, n: int, forms: list[str],
                   probs: np.ndarray, class_probs: list[np.ndarray]) -> list[str]:
    classes = np.arange(N_TYPES) % N_CLASSES
    out: list[int] = []
    prev = int(rng.choice(N_TYPES, p=probs))
    out.append(prev)
    for _ in range(n - 1):
        if rng.random() < CLASS_STICKINESS:
            target = (classes[prev] + CLASS_JUMP) % N_CLASSES
            nxt = int(rng.choice(N_TYPES, p=class_probs[target]))
        else:
            nxt = int(rng.choice(N_TYPES, p=probs))
        out.append(nxt)
        prev = nxt
    return [forms[i] for i in out]


def _decorate(rng: np.random.Generator, tokens: list[str]) -> list[str]:
    out = []
    for token in tokens:
        roll = rng.random()
        if roll < PUNCT_RATE:
            out.append(token + ("," if rng.random() < 0.7 else "."))
        elif roll < PUNCT_RATE + DIGIT_RATE:
            out.append(str(rng.integers(0, 10_000)))
        elif roll < PUNCT_RATE + DIGIT_RATE + DECORATED_RATE:
            out.append(DECORATED[rng.integers(0, len(DECORATED))])
        else:
            out.append(token)
    return out


def _to_lines(rng: np.random.Generator, tokens: list[str]) -> str:
    lines = []
    i = 0
    while i < len(tokens):
        width = int(rng.integers(10, 19))
        lines.append(" ".join(tokens[i:i + width]))
        i += width
    return "\n".join(lines) + "\n"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", type=Path,
                        default=Path(__file__).resolve().parent.parent / "tests" / "data")
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(SEED)
    forms, probs = _make_vocab(rng)
    class_probs = _class_tables(probs)

    train = _decorate(rng, _sample_tokens(rng, N_TRAIN, forms, probs, class_probs))
    test = _decorate(rng, _sample_tokens(rng, N_TEST, forms, probs, class_probs))

    (args.out_dir / "fixture_train.txt").write_text(
        _to_lines(rng, train), encoding="utf-8", newline="")
    (args.out_dir / "fixture_test.txt").write_text(
        _to_lines(rng, test), encoding="utf-8", newline="")
    (args.out_dir / "alphabet_latin.txt").write_text(LETTERS + "\n", encoding="utf-8",
                                                     newline="")
    print(f"wrote fixture corpus ({N_TRAIN} train / {N_TEST} test tokens) to {args.out_dir}")


if __name__ == "__main__":
    main()
