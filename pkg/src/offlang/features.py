"""Baseline feature stack: TF-IDF over word/POS/char n-grams plus lexicon
sentiment and lexical/readability statistics, assembled into one numeric
row per sample.

Column layout of the assembled matrix (fixed, relied on by tests and by
serialized models):

    0..7   dense block: n_chars, n_words, n_syllables, fk_grade,
           sent_pos, sent_neg, sent_neu, sent_compound
    then   word-n-gram TF-IDF columns (over stemmed tokens)
    then   POS-n-gram TF-IDF columns
    then   char-n-gram TF-IDF columns (over the preprocessed text)

Fitting happens only in ``BaselineFeaturizer.fit``; transforms are pure, so
train/validation leakage is structurally impossible.
"""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .preprocess import EmojiTable, SegmenterLexicon, preprocess
from .tokenization import NGramSpec, basic_tokenize, extract_ngrams

DENSE_FEATURES = (
    "n_chars",
    "n_words",
    "n_syllables",
    "fk_grade",
    "sent_pos",
    "sent_neg",
    "sent_neu",
    "sent_compound",
)

POS_TAGSET = frozenset(
    {"NOUN", "VERB", "ADJ", "ADV", "PRON", "DET", "ADP", "NUM", "PUNCT", "X"}
)

_VOWELS = frozenset("aeiouy")


class FeatureError(ValueError):
    pass


# ---------------------------------------------------------------------------
# TF-IDF


@dataclass
class TfIdfModel:
    vocabulary: dict[str, int]  # n-gram -> dense column index
    idf: np.ndarray
    ngram_spec: NGramSpec
    min_df: int

    @property
    def n_cols(self) -> int:
        return len(self.vocabulary)


def fit_tfidf(corpus: list[list[str]], spec: NGramSpec, min_df: int = 1) -> TfIdfModel:
    """Fit vocabulary and smoothed idf over a corpus of unit sequences.

    idf(t) = ln((1+N)/(1+df(t))) + 1; the vocabulary keeps n-grams with
    document frequency >= min_df, sorted lexicographically for determinism.
    """
    if not corpus:
        raise FeatureError("cannot fit TF-IDF on an empty corpus")
    df: Counter = Counter()
    for units in corpus:
        df.update(extract_ngrams(units, spec).keys())
    kept = sorted(t for t, c in df.items() if c >= min_df)
    vocabulary = {t: i for i, t in enumerate(kept)}
    n_docs = len(corpus)
    idf = np.array(
        [math.log((1.0 + n_docs) / (1.0 + df[t])) + 1.0 for t in kept], dtype=np.float64
    )
    return TfIdfModel(vocabulary, idf, spec, min_df)


def transform_tfidf(model: TfIdfModel, units: list[str]) -> dict[int, float]:
    """Map a unit sequence to {column: weight}: count * idf, L2-normalized.

    Out-of-vocabulary n-grams are ignored; an all-OOV document maps to {}.
    """
    weights = {}
    for gram, count in extract_ngrams(units, model.ngram_spec).items():
        col = model.vocabulary.get(gram)
        if col is not None:
            weights[col] = count * model.idf[col]
    norm = math.sqrt(sum(w * w for w in weights.values()))
    if norm > 0.0:
        weights = {c: w / norm for c, w in weights.items()}
    return weights


# ---------------------------------------------------------------------------
# POS tagging (lexicon + suffix rules; consistency is what matters here,
# the tags only feed TF-IDF n-grams)

DEFAULT_SUFFIX_RULES = [
    ("ing", "VERB"),
    ("ed", "VERB"),
    ("ly", "ADV"),
    ("ness", "NOUN"),
    ("ment", "NOUN"),
    ("tion", "NOUN"),
    ("ship", "NOUN"),
    ("able", "ADJ"),
    ("ible", "ADJ"),
    ("ful", "ADJ"),
    ("ous", "ADJ"),
    ("ive", "ADJ"),
    ("est", "ADJ"),
    ("ers", "NOUN"),
    ("er", "NOUN"),
    ("s", "NOUN"),
]


@dataclass
class PosLexicon:
    word_tags: dict[str, str]
    suffix_rules: list[tuple[str, str]] = field(default_factory=lambda: list(DEFAULT_SUFFIX_RULES))

    def __post_init__(self):
        for w, t in self.word_tags.items():
            if t not in POS_TAGSET:
                raise FeatureError("word %r carries unknown tag %r" % (w, t))
        for _, t in self.suffix_rules:
            if t not in POS_TAGSET:
                raise FeatureError("suffix rule carries unknown tag %r" % t)

    @classmethod
    def from_tsv(cls, text: str, **kw) -> "PosLexicon":
        word_tags = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            word, tag = line.split("\t")
            word_tags[word.lower()] = tag
        return cls(word_tags, **kw)


def pos_tag(tokens: list[str], lex: PosLexicon) -> list[str]:
    """Tag each token: punctuation/digits first, then lexicon, then suffixes, else X."""
    tags = []
    for tok in tokens:
        low = tok.lower()
        if tok and all(not c.isalnum() for c in tok):
            tags.append("PUNCT")
        elif tok and all(c.isdigit() for c in tok):
            tags.append("NUM")
        elif low in lex.word_tags:
            tags.append(lex.word_tags[low])
        else:
            for suffix, tag in lex.suffix_rules:
                if low.endswith(suffix) and len(low) > len(suffix) + 1:
                    tags.append(tag)
                    break
            else:
                tags.append("X")
    return tags


# ---------------------------------------------------------------------------
# Sentiment (reduced lexicon-rule scorer: valence lookup, negation window of
# three tokens, intensifier boost, alpha-15 compound normalization)

NEGATION_WINDOW = 3


@dataclass
class SentimentLexicon:
    valence: dict[str, float]
    negators: frozenset[str]
    intensifiers: dict[str, float]

    def __post_init__(self):
        for w, v in self.valence.items():
            if not -4.0 <= v <= 4.0:
                raise FeatureError("valence of %r out of [-4, 4]: %g" % (w, v))

    @classmethod
    def from_tsv(cls, valence_text: str, negators_text: str, intensifiers_text: str) -> "SentimentLexicon":
        valence = {}
        for line in valence_text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            word, v = line.split("\t")
            valence[word.lower()] = float(v)
        negators = frozenset(
            w.strip().lower() for w in negators_text.splitlines() if w.strip() and not w.startswith("#")
        )
        intensifiers = {}
        for line in intensifiers_text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            word, boost = line.split("\t")
            intensifiers[word.lower()] = float(boost)
        return cls(valence, negators, intensifiers)


def sentiment_scores(tokens: list[str], lex: SentimentLexicon) -> tuple[float, float, float, float]:
    """(pos, neg, neu, compound) over a token sequence.

    Each lexicon hit contributes its valence, sign-flipped when a negator
    occurs within the three preceding tokens and magnitude-scaled by an
    immediately preceding intensifier. compound = S / sqrt(S^2 + 15).
    """
    pos = 0.0
    neg = 0.0
    neu = 0
    total = 0.0
    lowered = [t.lower() for t in tokens]
    for i, tok in enumerate(lowered):
        v = lex.valence.get(tok)
        if v is None:
            neu += 1
            continue
        if any(p in lex.negators for p in lowered[max(0, i - NEGATION_WINDOW) : i]):
            v = -v
        if i > 0 and lowered[i - 1] in lex.intensifiers:
            v *= 1.0 + lex.intensifiers[lowered[i - 1]]
        total += v
        if v > 0:
            pos += v
        elif v < 0:
            neg += -v
    compound = total / math.sqrt(total * total + 15.0) if total != 0.0 else 0.0
    return pos, neg, float(neu), compound


# ---------------------------------------------------------------------------
# Lexical / readability


def count_syllables(word: str) -> int:
    """Maximal vowel-letter groups, minus one for a terminal silent 'e'.

    The terminal 'e' counts as silent only when it forms its own vowel group
    and does not close a consonant+"le" ending; the result is floored at 1.
    """
    letters = [c for c in word.lower() if c.isalpha()]
    if not letters:
        raise FeatureError("no letters in %r" % word)
    groups = 0
    in_group = False
    for c in letters:
        if c in _VOWELS:
            if not in_group:
                groups += 1
            in_group = True
        else:
            in_group = False
    if (
        groups > 1
        and letters[-1] == "e"
        and len(letters) >= 2
        and letters[-2] not in _VOWELS
        and not (len(letters) >= 3 and letters[-2] == "l" and letters[-3] not in _VOWELS)
    ):
        groups -= 1
    return max(1, groups)


def flesch_kincaid(text: str) -> float:
    """Grade level: 0.39 * words/sentences + 11.8 * syllables/words - 15.59.

    Sentences are maximal runs of {.!?}, floored at one; words are
    whitespace tokens containing at least one letter.
    """
    words = [t for t in text.split() if any(c.isalpha() for c in t)]
    if not words:
        raise FeatureError("no words in text")
    sentences = max(1, len(re.findall(r"[.!?]+", text)))
    syllables = sum(count_syllables(w) for w in words)
    return 0.39 * (len(words) / sentences) + 11.8 * (syllables / len(words)) - 15.59


# ---------------------------------------------------------------------------
# Stemming (deterministic suffix stripper standing in for lemmatization;
# only n-gram identity matters downstream, so consistency beats coverage)


def stem(word: str) -> str:
    if len(word) >= 6 and word.endswith("ing"):
        return word[:-3]
    if len(word) >= 5 and word.endswith("ed"):
        return word[:-2]
    if len(word) >= 5 and word.endswith("ly"):
        return word[:-2]
    if (
        len(word) >= 4
        and word.endswith("s")
        and not word.endswith(("ss", "us", "is"))
    ):
        return word[:-1]
    return word


# ---------------------------------------------------------------------------
# Sparse matrix container (CSR storage with a CSC view for training)


class FeatureMatrix:
    """Row-sparse numeric matrix: per row, sorted (column, value) pairs."""

    def __init__(self, indptr: np.ndarray, cols: np.ndarray, vals: np.ndarray, n_cols: int):
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.cols = np.asarray(cols, dtype=np.int64)
        self.vals = np.asarray(vals, dtype=np.float64)
        self.n_cols = int(n_cols)
        if self.indptr[0] != 0 or self.indptr[-1] != len(self.cols):
            raise FeatureError("inconsistent indptr")

    @property
    def n_rows(self) -> int:
        return len(self.indptr) - 1

    @classmethod
    def from_rows(cls, rows: list[dict[int, float]], n_cols: int) -> "FeatureMatrix":
        indptr = [0]
        cols = []
        vals = []
        for row in rows:
            for c in sorted(row):
                v = row[c]
                if not np.isfinite(v):
                    raise FeatureError("non-finite feature value at column %d" % c)
                if v != 0.0:
                    cols.append(c)
                    vals.append(v)
            indptr.append(len(cols))
        return cls(
            np.array(indptr, dtype=np.int64),
            np.array(cols, dtype=np.int64),
            np.array(vals, dtype=np.float64),
            n_cols,
        )

    @classmethod
    def from_dense(cls, x: np.ndarray) -> "FeatureMatrix":
        x = np.asarray(x, dtype=np.float64)
        rows = [{j: x[i, j] for j in range(x.shape[1]) if x[i, j] != 0.0} for i in range(x.shape[0])]
        return cls.from_rows(rows, x.shape[1])

    def get(self, i: int, j: int) -> float:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        k = np.searchsorted(self.cols[lo:hi], j)
        if k < hi - lo and self.cols[lo + k] == j:
            return float(self.vals[lo + k])
        return 0.0

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.cols[lo:hi], self.vals[lo:hi]

    def to_csc(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(indptr, row_idx, vals) in column-major order, rows ascending."""
        order = np.lexsort((np.repeat(np.arange(self.n_rows), np.diff(self.indptr)), self.cols))
        cols_sorted = self.cols[order]
        rows_all = np.repeat(np.arange(self.n_rows, dtype=np.int64), np.diff(self.indptr))
        indptr = np.zeros(self.n_cols + 1, dtype=np.int64)
        np.add.at(indptr, cols_sorted + 1, 1)
        np.cumsum(indptr, out=indptr)
        return indptr, rows_all[order], self.vals[order]


# ---------------------------------------------------------------------------
# Assembly


@dataclass
class FeatureVector:
    dense: np.ndarray  # the 8 DENSE_FEATURES values, in order
    sparse: dict[int, float]  # absolute column -> weight (TF-IDF families)
    n_cols: int

    def to_row(self) -> dict[int, float]:
        row = {j: float(v) for j, v in enumerate(self.dense) if v != 0.0}
        row.update(self.sparse)
        return row


class BaselineFeaturizer:
    """Bundles preprocessing resources, the three TF-IDF families and the
    lexicons into a fit/transform pipeline producing FeatureMatrix rows."""

    def __init__(
        self,
        emoji_table: EmojiTable,
        seg_lexicon: SegmenterLexicon,
        pos_lexicon: PosLexicon,
        sent_lexicon: SentimentLexicon,
        word_ngrams: NGramSpec = NGramSpec("word", frozenset({1, 2, 3})),
        pos_ngrams: NGramSpec = NGramSpec("pos_tag", frozenset({1, 2, 3})),
        char_ngrams: NGramSpec = NGramSpec("char", frozenset({1, 2, 3})),
        min_df_word: int = 2,
        min_df_pos: int = 2,
        min_df_char: int = 5,
        normalizer=stem,
    ):
        self.emoji_table = emoji_table
        self.seg_lexicon = seg_lexicon
        self.pos_lexicon = pos_lexicon
        self.sent_lexicon = sent_lexicon
        self.word_ngrams = word_ngrams
        self.pos_ngrams = pos_ngrams
        self.char_ngrams = char_ngrams
        self.min_df = (min_df_word, min_df_pos, min_df_char)
        self.normalizer = normalizer
        self.word_model: TfIdfModel | None = None
        self.pos_model: TfIdfModel | None = None
        self.char_model: TfIdfModel | None = None

    def _units(self, text: str) -> tuple[list[str], list[str], list[str], str]:
        clean = preprocess(text, self.emoji_table, self.seg_lexicon)
        tokens = basic_tokenize(clean, lowercase=True)
        words = [self.normalizer(t) for t in tokens]
        tags = pos_tag(tokens, self.pos_lexicon)
        return tokens, words, tags, clean

    def fit(self, texts: list[str]) -> "BaselineFeaturizer":
        if not texts:
            raise FeatureError("cannot fit featurizer on an empty corpus")
        word_corpus, pos_corpus, char_corpus = [], [], []
        for text in texts:
            _, words, tags, clean = self._units(text)
            word_corpus.append(words)
            pos_corpus.append(tags)
            char_corpus.append([clean])
        self.word_model = fit_tfidf(word_corpus, self.word_ngrams, self.min_df[0])
        self.pos_model = fit_tfidf(pos_corpus, self.pos_ngrams, self.min_df[1])
        self.char_model = fit_tfidf(char_corpus, self.char_ngrams, self.min_df[2])
        return self

    @property
    def n_cols(self) -> int:
        self._check_fitted()
        return (
            len(DENSE_FEATURES)
            + self.word_model.n_cols
            + self.pos_model.n_cols
            + self.char_model.n_cols
        )

    def _check_fitted(self):
        if self.word_model is None or self.pos_model is None or self.char_model is None:
            raise FeatureError("featurizer is not fitted")

    def transform_one(self, text: str) -> FeatureVector:
        self._check_fitted()
        tokens, words, tags, clean = self._units(text)
        pos, neg, neu, compound = sentiment_scores(tokens, self.sent_lexicon)
        lex_words = [t for t in clean.split() if any(c.isalpha() for c in t)]
        n_words = len(lex_words)
        n_syll = sum(count_syllables(w) for w in lex_words)
        fk = flesch_kincaid(clean) if n_words else 0.0
        dense = np.array(
            [len(clean), n_words, n_syll, fk, pos, neg, neu, compound], dtype=np.float64
        )
        sparse = {}
        offset = len(DENSE_FEATURES)
        for model, units in (
            (self.word_model, words),
            (self.pos_model, tags),
            (self.char_model, [clean]),
        ):
            for col, w in transform_tfidf(model, units).items():
                sparse[offset + col] = w
            offset += model.n_cols
        return FeatureVector(dense, sparse, self.n_cols)

    def transform(self, texts: list[str]) -> FeatureMatrix:
        rows = [self.transform_one(t).to_row() for t in texts]
        return FeatureMatrix.from_rows(rows, self.n_cols)
