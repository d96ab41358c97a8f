"""Synthetic multilingual corpora with a planted lexical signal.

The real competition tweets are not redistributable, so end-to-end tests
run on generated datasets shaped like the published statistics tables:
positive samples carry marker words (several, typically), negatives do not,
and a noise rate flips that construction on a small fraction of each class.
Texts include hashtags and emoji so the preprocessing path is exercised.
With noise_rate = 0 marker presence separates the classes perfectly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Dataset, Sample

# a small emoji pool present in the bundled emoji table
_EMOJI_POOL = ("\U0001F525", "\U0001F602", "\U0001F44D", "\U0001F622", "❤")

MEAN_TOKENS = 12
MARKER_DENSITY = 0.35  # token-level marker probability inside positives
HASHTAG_RATE = 0.3
EMOJI_RATE = 0.3


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    n_samples: int
    positive_ratio: float
    language_tag: str = "xx"
    offensive_marker_words: tuple[str, ...] = (
        "grok", "zarp", "blort", "skree", "vexil", "drang", "plik", "snarv",
    )
    benign_vocabulary: tuple[str, ...] = (
        "sun", "river", "coffee", "music", "walk", "friend", "garden", "book",
        "cloud", "train", "smile", "bread", "lamp", "stone", "window", "paper",
    )
    noise_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 10:
            raise SynthError("n_samples must be >= 10")
        if not (0.0 < self.positive_ratio < 1.0):
            raise SynthError("positive_ratio must lie in (0, 1)")
        if not (0.0 <= self.noise_rate < 1.0):
            raise SynthError("noise_rate must lie in [0, 1)")
        if set(self.offensive_marker_words) & set(self.benign_vocabulary):
            raise SynthError("marker and benign vocabularies must be disjoint")
        if not self.offensive_marker_words or not self.benign_vocabulary:
            raise SynthError("vocabularies must be non-empty")


def _sample_text(rng: np.random.Generator, spec: SynthSpec, positive: bool) -> str:
    markers = spec.offensive_marker_words
    benign = spec.benign_vocabulary
    length = 3 + rng.geometric(1.0 / (MEAN_TOKENS - 2))
    noisy = rng.random() < spec.noise_rate
    tokens = []
    for _ in range(length):
        if positive and not noisy and rng.random() < MARKER_DENSITY:
            tokens.append(markers[rng.integers(len(markers))])
        else:
            tokens.append(benign[rng.integers(len(benign))])
    if positive and not noisy:
        # clean positives carry at least two markers so that singly-marked
        # noisy negatives stay statistically separable
        short = sum(1 for t in tokens if t in markers) < 2
        if short:
            i, j = rng.choice(len(tokens), size=2, replace=False)
            tokens[i] = markers[rng.integers(len(markers))]
            tokens[j] = markers[rng.integers(len(markers))]
    if not positive and noisy:
        tokens[rng.integers(len(tokens))] = markers[rng.integers(len(markers))]
    if rng.random() < HASHTAG_RATE:
        a = benign[rng.integers(len(benign))]
        b = benign[rng.integers(len(benign))]
        tokens.append("#" + a.capitalize() + b.capitalize())
    if rng.random() < EMOJI_RATE:
        tokens.append(_EMOJI_POOL[rng.integers(len(_EMOJI_POOL))])
    return " ".join(tokens)


def generate(spec: SynthSpec, name: str | None = None) -> Dataset:
    """Deterministic per seed; realized positive count is exactly
    round(ratio * n), well inside the 1/sqrt(n) tolerance."""
    rng = np.random.default_rng(spec.seed)
    n_pos = int(spec.positive_ratio * spec.n_samples + 0.5)
    labels = np.zeros(spec.n_samples, dtype=np.int64)
    labels[:n_pos] = 1
    rng.shuffle(labels)
    name = name or ("synth_%s_%d" % (spec.language_tag, spec.seed))
    samples = [
        Sample(
            id="%s-%06d" % (spec.language_tag, i),
            text=_sample_text(rng, spec, bool(y)),
            label=int(y),
            language=spec.language_tag,
            source=name,
        )
        for i, y in enumerate(labels)
    ]
    return Dataset(name, samples, spec.language_tag)
