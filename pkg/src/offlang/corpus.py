"""Dataset ingestion, label conversion, statistics, concatenation and splits.

Two TSV layouts are understood:

* ``olid_labeled``     -- ``id<TAB>text<TAB>label`` with label OFF or NOT
* ``scored_english``   -- ``id<TAB>text<TAB>average<TAB>std`` carrying the
  per-sample mean and standard deviation assigned by a pool of annotation
  models; :func:`score_to_label` converts those to binary labels.

A header row is auto-detected by the first field being exactly ``id``.
Trailing columns beyond the defined layout are tolerated and ignored;
missing columns are an error.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

POSITIVE = 1  # offensive
NEGATIVE = 0

_LABEL_NAMES = {"OFF": POSITIVE, "NOT": NEGATIVE}


class CorpusError(ValueError):
    """Malformed input data or an operation applied to an unfit dataset."""


@dataclass
class Sample:
    id: str
    text: str
    label: Optional[int] = None
    score: Optional[tuple[float, float]] = None  # (average, stdev)
    language: str = "en"
    source: str = ""

    def __post_init__(self):
        if not self.text.strip():
            raise CorpusError("sample %r has empty text" % self.id)


@dataclass
class Dataset:
    name: str
    samples: list[Sample] = field(default_factory=list)
    language: str = "en"

    def __post_init__(self):
        seen = set()
        for s in self.samples:
            if s.id in seen:
                raise CorpusError(
                    "duplicate sample id %r in dataset %r" % (s.id, self.name)
                )
            seen.add(s.id)

    def __len__(self):
        return len(self.samples)

    def labels(self) -> list[int]:
        out = []
        for s in self.samples:
            if s.label is None:
                raise CorpusError("sample %r in %r is unlabeled" % (s.id, self.name))
            out.append(s.label)
        return out


@dataclass(frozen=True)
class LabelHeuristic:
    """Three-rule conversion of (average, stdev) model scores to labels.

    Rule 1: average strictly above ``hi_threshold`` is positive.
    Rule 2: average in (lo_threshold, hi_threshold] with stdev strictly
            below ``std_threshold`` (annotator consensus) is positive.
    Rule 3: everything else is negative.
    """

    hi_threshold: float = 0.6
    lo_threshold: float = 0.5
    std_threshold: float = 0.1

    def __post_init__(self):
        if not (0.0 <= self.lo_threshold < self.hi_threshold <= 1.0):
            raise CorpusError("need 0 <= lo < hi <= 1")
        if self.std_threshold <= 0.0:
            raise CorpusError("std_threshold must be positive")


@dataclass(frozen=True)
class SplitSpec:
    validation_ratio: float = 0.10
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.validation_ratio < 1.0):
            raise CorpusError("validation_ratio must lie strictly inside (0, 1)")


def score_to_label(average: float, stdev: float, h: LabelHeuristic = LabelHeuristic()) -> int:
    if average > h.hi_threshold:
        return POSITIVE
    if h.lo_threshold < average <= h.hi_threshold and stdev < h.std_threshold:
        return POSITIVE
    return NEGATIVE


def apply_heuristic(d: Dataset, h: LabelHeuristic = LabelHeuristic()) -> Dataset:
    """Label every score-annotated sample of ``d``; already-labeled samples pass through."""
    out = []
    for s in d.samples:
        if s.label is not None:
            out.append(s)
        else:
            if s.score is None:
                raise CorpusError("sample %r carries neither label nor score" % s.id)
            out.append(replace(s, label=score_to_label(s.score[0], s.score[1], h)))
    return Dataset(d.name, out, d.language)


def parse_labeled_tsv(
    source: io.IOBase | bytes | str,
    format: str,
    name: str = "dataset",
    language: str = "en",
) -> Dataset:
    """Parse one of the two competition TSV layouts into a Dataset.

    ``source`` may be a byte stream, raw bytes, or text. Input must be UTF-8;
    LF and CRLF line endings are both accepted.
    """
    if format not in ("olid_labeled", "scored_english"):
        raise CorpusError("unknown format %r" % format)
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw

    min_cols = 3 if format == "olid_labeled" else 4
    samples = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line:
            continue
        cols = line.split("\t")
        if lineno == 1 and cols[0].strip().lower() == "id":
            continue  # header row
        if len(cols) < min_cols:
            raise CorpusError(
                "line %d: expected at least %d columns, got %d" % (lineno, min_cols, len(cols))
            )
        sid, stext = cols[0], cols[1]
        if not stext.strip():
            raise CorpusError("line %d: empty text" % lineno)
        if format == "olid_labeled":
            raw_label = cols[2].strip()
            if raw_label not in _LABEL_NAMES:
                raise CorpusError("line %d: unknown label %r" % (lineno, raw_label))
            samples.append(
                Sample(sid, stext, label=_LABEL_NAMES[raw_label], language=language, source=name)
            )
        else:
            try:
                avg = float(cols[2])
                std = float(cols[3])
            except ValueError:
                raise CorpusError("line %d: non-numeric score fields" % lineno) from None
            if not (0.0 <= avg <= 1.0):
                raise CorpusError("line %d: average %g outside [0, 1]" % (lineno, avg))
            if std < 0.0 or not math.isfinite(std):
                raise CorpusError(
                    "line %d: negative or non-finite standard deviation %g" % (lineno, std)
                )
            samples.append(
                Sample(sid, stext, score=(avg, std), language=language, source=name)
            )
    return Dataset(name, samples, language)


def write_olid_tsv(d: Dataset, stream: io.IOBase) -> None:
    """Emit a labeled dataset in the olid_labeled layout (inverse of parsing)."""
    for s in d.samples:
        if s.label is None:
            raise CorpusError("sample %r is unlabeled" % s.id)
        tag = "OFF" if s.label == POSITIVE else "NOT"
        line = "%s\t%s\t%s\n" % (s.id, s.text, tag)
        stream.write(line.encode("utf-8") if isinstance(stream, (io.RawIOBase, io.BufferedIOBase)) else line)


class SplitMix64:
    """Tiny 64-bit PRNG (splitmix64 update), fully specified here so that
    splits are reproducible across platforms and Python/NumPy versions."""

    _MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self._state = seed & self._MASK

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & self._MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self._MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self._MASK
        return z ^ (z >> 31)

    def randbelow(self, n: int) -> int:
        # Rejection sampling keeps the draw exactly uniform.
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def shuffle(self, items: list) -> None:
        # Fisher-Yates, in place.
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]


def _round_half_up(x: float) -> int:
    # Python's round() is banker's rounding; half-up keeps split sizes
    # platform-stable and matches the documented contract.
    return int(x + 0.5)


def stratified_split(d: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Split into (train, validation) preserving the label distribution.

    Per class, a seeded deterministic shuffle is applied and the first
    round(ratio * n_class) samples go to validation; per-class counts are
    then adjusted by at most one so the validation size is exactly
    round(ratio * n).
    """
    labels = d.labels()
    by_class: dict[int, list[int]] = {}
    for i, y in enumerate(labels):
        by_class.setdefault(y, []).append(i)
    for y, idxs in by_class.items():
        if len(idxs) < 2:
            raise CorpusError("class %d too small to stratify (%d sample)" % (y, len(idxs)))

    target_total = _round_half_up(spec.validation_ratio * len(d))
    take = {}
    frac = {}
    for y, idxs in sorted(by_class.items()):
        exact = spec.validation_ratio * len(idxs)
        take[y] = _round_half_up(exact)
        frac[y] = exact - int(exact)
    diff = target_total - sum(take.values())
    if diff > 0:
        # grant one extra to the classes rounded down hardest
        order = sorted(by_class, key=lambda y: (-frac[y], y))
        for y in order:
            if diff == 0:
                break
            if take[y] < len(by_class[y]):
                take[y] += 1
                diff -= 1
    elif diff < 0:
        order = sorted(by_class, key=lambda y: (frac[y], y))
        for y in order:
            if diff == 0:
                break
            if take[y] > 0:
                take[y] -= 1
                diff += 1
    if diff != 0:
        raise CorpusError("cannot satisfy validation size %d" % target_total)

    rng = SplitMix64(spec.seed)
    val_indices = set()
    for y, idxs in sorted(by_class.items()):
        pool = list(idxs)
        rng.shuffle(pool)
        val_indices.update(pool[: take[y]])

    train = [s for i, s in enumerate(d.samples) if i not in val_indices]
    val = [s for i, s in enumerate(d.samples) if i in val_indices]
    return (
        Dataset(d.name + "_train", train, d.language),
        Dataset(d.name + "_val", val, d.language),
    )


def _namespaced(s: Sample) -> Sample:
    prefix = (s.source or "unknown") + ":"
    if s.id.startswith(prefix):
        return s
    return replace(s, id=prefix + s.id)


def concat_datasets(parts: list[Dataset], name: str) -> Dataset:
    """Append datasets in argument order into one fine-tuning set.

    Sample ids are namespaced by their source tag (idempotently) so that
    uniqueness survives mixing; a single-part concat is an identity apart
    from the name. Language becomes "multi" when the parts disagree.
    """
    if not parts:
        raise CorpusError("concat of an empty dataset list")
    langs = {p.language for p in parts}
    language = parts[0].language if len(langs) == 1 else "multi"
    if len(parts) == 1:
        return Dataset(name, list(parts[0].samples), language)
    samples = [_namespaced(s) for p in parts for s in p.samples]
    return Dataset(name, samples, language)


@dataclass(frozen=True)
class DatasetSummary:
    """Metadata-level view of a dataset: enough to reproduce the statistics
    table without materializing samples (the full English set is ~9M rows)."""

    name: str
    n_samples: int
    n_positive: int

    @property
    def positive_ratio(self) -> float:
        return self.n_positive / self.n_samples


def summarize(d: Dataset) -> DatasetSummary:
    stats = dataset_stats(d)
    return DatasetSummary(d.name, stats["count"], round(stats["count"] * stats["positive_ratio"]))


def combine_summaries(parts: Iterable[DatasetSummary], name: str) -> DatasetSummary:
    parts = list(parts)
    if not parts:
        raise CorpusError("combine of an empty summary list")
    return DatasetSummary(
        name,
        sum(p.n_samples for p in parts),
        sum(p.n_positive for p in parts),
    )


def dataset_stats(d: Dataset) -> dict:
    if len(d) == 0:
        raise CorpusError("dataset %r is empty" % d.name)
    labels = d.labels()
    positives = sum(1 for y in labels if y == POSITIVE)
    return {"count": len(d), "positive_ratio": positives / len(d)}


def stats_table(summaries: Iterable[DatasetSummary]) -> str:
    """Plain-text table with the statistics columns used for reporting."""
    rows = [("Dataset", "No. Samples", "Positive Ratio (%)")]
    for s in summaries:
        rows.append((s.name, format(s.n_samples, ","), "%.2f" % (100.0 * s.positive_ratio)))
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    lines = []
    for i, r in enumerate(rows):
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
