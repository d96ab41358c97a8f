"""Versioned binary serialization for trained models.

Layout (all integers little-endian):

    magic   4 bytes  b"OFLM"
    version u8       currently 1
    kind    u8       1 = GBDT, 2 = transformer, 3 = TF-IDF model,
                     4 = GBDT text pipeline (featurizer + trees)
    payload          kind-specific, see the _write_* helpers

Strings are u32 byte length + UTF-8; float arrays are u64 element count +
row-major float64 data. Loading checks magic, version and kind and raises
on truncation, so a corrupted or cross-kind payload never yields a model.
"""
from __future__ import annotations

import struct

import numpy as np

from . import gbdt as _gbdt
from . import transformer as _tx
from .features import BaselineFeaturizer, PosLexicon, SentimentLexicon, TfIdfModel
from .preprocess import EmojiTable, SegmenterLexicon
from .tokenization import NGramSpec, WordPieceVocab

MAGIC = b"OFLM"
VERSION = 1

KIND_GBDT = 1
KIND_TRANSFORMER = 2
KIND_TFIDF = 3
KIND_GBDT_PIPELINE = 4


class SerializeError(ValueError):
    pass


class _Writer:
    def __init__(self):
        self.parts: list[bytes] = []

    def u8(self, v):
        self.parts.append(struct.pack("<B", v))

    def u32(self, v):
        self.parts.append(struct.pack("<I", v))

    def u64(self, v):
        self.parts.append(struct.pack("<Q", v))

    def f64(self, v):
        self.parts.append(struct.pack("<d", v))

    def s(self, text: str):
        raw = text.encode("utf-8")
        self.u32(len(raw))
        self.parts.append(raw)

    def f64_array(self, arr: np.ndarray):
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        self.u64(arr.size)
        self.parts.append(arr.tobytes())

    def i32_array(self, arr: np.ndarray):
        arr = np.ascontiguousarray(arr, dtype=np.int32)
        self.u64(arr.size)
        self.parts.append(arr.tobytes())

    def bytes(self) -> bytes:
        return b"".join(self.parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise SerializeError("truncated payload")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u8(self):
        return struct.unpack("<B", self.take(1))[0]

    def u32(self):
        return struct.unpack("<I", self.take(4))[0]

    def u64(self):
        return struct.unpack("<Q", self.take(8))[0]

    def f64(self):
        return struct.unpack("<d", self.take(8))[0]

    def s(self) -> str:
        n = self.u32()
        return self.take(n).decode("utf-8")

    def f64_array(self) -> np.ndarray:
        n = self.u64()
        return np.frombuffer(self.take(8 * n), dtype="<f8").copy()

    def i32_array(self) -> np.ndarray:
        n = self.u64()
        return np.frombuffer(self.take(4 * n), dtype="<i4").copy()


# ---------------------------------------------------------------------------
# GBDT


def _write_gbdt(w: _Writer, model: _gbdt.GbdtModel):
    w.f64(model.base_score)
    w.f64(model.learning_rate)
    w.u32(model.n_cols)
    w.u32(len(model.trees))
    for t in model.trees:
        w.u32(t.n_nodes)
        w.i32_array(t.feature)
        w.f64_array(t.threshold)
        w.i32_array(t.left)
        w.i32_array(t.right)
        w.f64_array(t.value)


def _read_gbdt(r: _Reader) -> _gbdt.GbdtModel:
    base = r.f64()
    lr = r.f64()
    n_cols = r.u32()
    n_trees = r.u32()
    trees = []
    for _ in range(n_trees):
        n = r.u32()
        feature = r.i32_array()
        threshold = r.f64_array()
        left = r.i32_array()
        right = r.i32_array()
        value = r.f64_array()
        if not (len(feature) == len(threshold) == len(left) == len(right) == len(value) == n):
            raise SerializeError("inconsistent tree arrays")
        trees.append(_gbdt.Tree(feature, threshold, left, right, value))
    return _gbdt.GbdtModel(base, lr, n_cols, trees)


# ---------------------------------------------------------------------------
# Transformer


def _write_transformer(w: _Writer, clf: _tx.TransformerClassifier):
    c = clf.config
    for v in (c.vocab_size, c.d_model, c.n_heads, c.n_layers, c.d_ff, c.max_len):
        w.u32(v)
    w.u8(1 if c.share_layer_params else 0)
    w.f64(c.dropout)
    tokens = sorted(clf.vocab.token_to_id, key=clf.vocab.token_to_id.get)
    w.u32(len(tokens))
    for t in tokens:
        w.s(t)
    w.s(clf.vocab.continuation_prefix)
    w.s(clf.vocab.unk_token)
    w.u32(len(clf.params))
    for name in sorted(clf.params):
        arr = clf.params[name]
        w.s(name)
        w.u8(arr.ndim)
        for d in arr.shape:
            w.u32(d)
        w.f64_array(arr)


def _read_transformer(r: _Reader) -> _tx.TransformerClassifier:
    vals = [r.u32() for _ in range(6)]
    share = bool(r.u8())
    dropout = r.f64()
    cfg = _tx.TransformerConfig(
        vocab_size=vals[0], d_model=vals[1], n_heads=vals[2],
        n_layers=vals[3], d_ff=vals[4], max_len=vals[5],
        share_layer_params=share, dropout=dropout,
    )
    tokens = [r.s() for _ in range(r.u32())]
    prefix = r.s()
    unk = r.s()
    vocab = WordPieceVocab.from_tokens(tokens, continuation_prefix=prefix, unk_token=unk)
    clf = _tx.TransformerClassifier(cfg, vocab, seed=0)
    n_params = r.u32()
    seen = set()
    for _ in range(n_params):
        name = r.s()
        ndim = r.u8()
        shape = tuple(r.u32() for _ in range(ndim))
        arr = r.f64_array().reshape(shape)
        if name not in clf.params or clf.params[name].shape != shape:
            raise SerializeError("unexpected parameter %r %r" % (name, shape))
        clf.params[name] = arr
        seen.add(name)
    if seen != set(clf.params):
        raise SerializeError("parameter set mismatch")
    return clf


# ---------------------------------------------------------------------------
# TF-IDF (flat format: sorted vocabulary + idf array)


def _write_tfidf(w: _Writer, model: TfIdfModel):
    w.s(model.ngram_spec.unit)
    ns = sorted(model.ngram_spec.n_values)
    w.u32(len(ns))
    for n in ns:
        w.u32(n)
    w.u32(model.min_df)
    terms = sorted(model.vocabulary, key=model.vocabulary.get)
    w.u32(len(terms))
    for t in terms:
        w.s(t)
    w.f64_array(model.idf)


def _read_tfidf(r: _Reader) -> TfIdfModel:
    unit = r.s()
    ns = frozenset(r.u32() for _ in range(r.u32()))
    min_df = r.u32()
    terms = [r.s() for _ in range(r.u32())]
    idf = r.f64_array()
    if len(idf) != len(terms):
        raise SerializeError("idf/vocabulary size mismatch")
    return TfIdfModel({t: i for i, t in enumerate(terms)}, idf, NGramSpec(unit, ns), min_df)


# ---------------------------------------------------------------------------
# GBDT text pipeline: preprocessing resources + featurizer + trees, fully
# self-contained so a saved model predicts on raw TSV rows anywhere.


class GbdtPipeline:
    def __init__(self, featurizer: BaselineFeaturizer, model: _gbdt.GbdtModel):
        featurizer._check_fitted()
        self.featurizer = featurizer
        self.model = model

    def predict_proba(self, texts: list[str]) -> np.ndarray:
        return _gbdt.predict_gbdt(self.model, self.featurizer.transform(texts))

    def predict(self, texts: list[str]) -> np.ndarray:
        return (self.predict_proba(texts) >= 0.5).astype(np.int64)


def _write_pipeline(w: _Writer, pipe: GbdtPipeline):
    f = pipe.featurizer
    w.u32(len(f.emoji_table.mapping))
    for seq, name in f.emoji_table.mapping.items():
        w.s(seq)
        w.s(name)
    ranked = sorted(f.seg_lexicon.word_rank, key=f.seg_lexicon.word_rank.get)
    w.u32(len(ranked))
    for word in ranked:
        w.s(word)
    w.u32(len(f.pos_lexicon.word_tags))
    for word, tag in f.pos_lexicon.word_tags.items():
        w.s(word)
        w.s(tag)
    w.u32(len(f.pos_lexicon.suffix_rules))
    for suffix, tag in f.pos_lexicon.suffix_rules:
        w.s(suffix)
        w.s(tag)
    w.u32(len(f.sent_lexicon.valence))
    for word, v in f.sent_lexicon.valence.items():
        w.s(word)
        w.f64(v)
    w.u32(len(f.sent_lexicon.negators))
    for word in sorted(f.sent_lexicon.negators):
        w.s(word)
    w.u32(len(f.sent_lexicon.intensifiers))
    for word, boost in f.sent_lexicon.intensifiers.items():
        w.s(word)
        w.f64(boost)
    for m in (f.word_model, f.pos_model, f.char_model):
        _write_tfidf(w, m)
    _write_gbdt(w, pipe.model)


def _read_pipeline(r: _Reader) -> GbdtPipeline:
    emoji = EmojiTable({r.s(): r.s() for _ in range(r.u32())})
    ranked = [r.s() for _ in range(r.u32())]
    seg = SegmenterLexicon(set(ranked), {wrd: i for i, wrd in enumerate(ranked)})
    word_tags = {r.s(): r.s() for _ in range(r.u32())}
    suffix_rules = [(r.s(), r.s()) for _ in range(r.u32())]
    pos_lex = PosLexicon(word_tags, suffix_rules)
    valence = {r.s(): r.f64() for _ in range(r.u32())}
    negators = frozenset(r.s() for _ in range(r.u32()))
    intensifiers = {r.s(): r.f64() for _ in range(r.u32())}
    sent_lex = SentimentLexicon(valence, negators, intensifiers)
    word_m = _read_tfidf(r)
    pos_m = _read_tfidf(r)
    char_m = _read_tfidf(r)
    feat = BaselineFeaturizer(
        emoji, seg, pos_lex, sent_lex,
        word_ngrams=word_m.ngram_spec, pos_ngrams=pos_m.ngram_spec,
        char_ngrams=char_m.ngram_spec,
        min_df_word=word_m.min_df, min_df_pos=pos_m.min_df, min_df_char=char_m.min_df,
    )
    feat.word_model = word_m
    feat.pos_model = pos_m
    feat.char_model = char_m
    return GbdtPipeline(feat, _read_gbdt(r))


# ---------------------------------------------------------------------------
# public surface

_KIND_OF_TYPE = [
    (KIND_GBDT, _gbdt.GbdtModel, _write_gbdt, _read_gbdt),
    (KIND_TRANSFORMER, _tx.TransformerClassifier, _write_transformer, _read_transformer),
    (KIND_TFIDF, TfIdfModel, _write_tfidf, _read_tfidf),
    (KIND_GBDT_PIPELINE, GbdtPipeline, _write_pipeline, _read_pipeline),
]


def save_model(model) -> bytes:
    for kind, typ, write, _ in _KIND_OF_TYPE:
        if isinstance(model, typ):
            w = _Writer()
            w.parts.append(MAGIC)
            w.u8(VERSION)
            w.u8(kind)
            write(w, model)
            return w.bytes()
    raise SerializeError("unsupported model type %r" % type(model).__name__)


def _open_reader(data: bytes) -> tuple[_Reader, int]:
    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise SerializeError("bad magic: not a model file")
    version = r.u8()
    if version != VERSION:
        raise SerializeError("unsupported format version %d" % version)
    return r, r.u8()


def load_model(data: bytes):
    """Load any supported kind; the payload's kind tag decides the type."""
    r, kind = _open_reader(data)
    for k, _, _, read in _KIND_OF_TYPE:
        if k == kind:
            return read(r)
    raise SerializeError("unknown model kind %d" % kind)


def _load_expected(data: bytes, expected_kind: int, label: str):
    r, kind = _open_reader(data)
    if kind != expected_kind:
        raise SerializeError("payload holds kind %d, expected %s" % (kind, label))
    for k, _, _, read in _KIND_OF_TYPE:
        if k == expected_kind:
            return read(r)
    raise AssertionError


def load_gbdt(data: bytes) -> _gbdt.GbdtModel:
    return _load_expected(data, KIND_GBDT, "GBDT")


def load_transformer(data: bytes) -> _tx.TransformerClassifier:
    return _load_expected(data, KIND_TRANSFORMER, "transformer")


def load_pipeline(data: bytes) -> GbdtPipeline:
    return _load_expected(data, KIND_GBDT_PIPELINE, "GBDT pipeline")
