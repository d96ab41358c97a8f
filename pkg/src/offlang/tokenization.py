"""Word/punctuation tokenization, WordPiece subwords and n-gram extraction.

WordPiece follows the reference greedy longest-match-first behavior: the
longest vocabulary entry matching the remaining prefix is taken repeatedly
(non-initial pieces matched with the ``##`` continuation prefix) and any
dead end maps the whole word to the unknown token.
"""
from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field

# Joining n-gram units with U+241F (symbol for unit separator) makes
# collisions with real text impossible.
NGRAM_SEP = "␟"

CLS_TOKEN = "[CLS]"
SEP_TOKEN = "[SEP]"
PAD_TOKEN = "[PAD]"
UNK_TOKEN = "[UNK]"

# Reference tokenizers cap word length; longer inputs become [UNK] outright.
MAX_WORD_CHARS = 100


def _is_punctuation(ch: str) -> bool:
    cp = ord(ch)
    if (33 <= cp <= 47) or (58 <= cp <= 64) or (91 <= cp <= 96) or (123 <= cp <= 126):
        return True
    return unicodedata.category(ch).startswith("P")


def basic_tokenize(text: str, lowercase: bool = True) -> list[str]:
    """Split on whitespace, isolating punctuation characters as tokens."""
    if lowercase:
        text = text.lower()
    tokens = []
    current = []
    for ch in text:
        if ch.isspace():
            if current:
                tokens.append("".join(current))
                current = []
        elif _is_punctuation(ch):
            if current:
                tokens.append("".join(current))
                current = []
            tokens.append(ch)
        else:
            current.append(ch)
    if current:
        tokens.append("".join(current))
    return tokens


@dataclass
class WordPieceVocab:
    token_to_id: dict[str, int]
    continuation_prefix: str = "##"
    unk_token: str = UNK_TOKEN
    _max_piece_len: int = field(init=False, repr=False)

    def __post_init__(self):
        ids = sorted(self.token_to_id.values())
        if ids != list(range(len(ids))):
            raise ValueError("vocab ids must be dense in [0, |vocab|)")
        for special in (self.unk_token, CLS_TOKEN, SEP_TOKEN, PAD_TOKEN):
            if special not in self.token_to_id:
                raise ValueError("vocab is missing required token %r" % special)
        self._max_piece_len = max(len(t) for t in self.token_to_id)

    def __len__(self):
        return len(self.token_to_id)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def id(self, token: str) -> int:
        return self.token_to_id.get(token, self.token_to_id[self.unk_token])

    @classmethod
    def from_tokens(cls, tokens: list[str], **kw) -> "WordPieceVocab":
        return cls({t: i for i, t in enumerate(tokens)}, **kw)

    @classmethod
    def from_file_text(cls, text: str, **kw) -> "WordPieceVocab":
        """Standard pre-trained vocab layout: one token per line, id = line number."""
        tokens = [line.rstrip("\n") for line in text.splitlines()]
        return cls.from_tokens([t for t in tokens if t], **kw)


def wordpiece_tokenize(word: str, v: WordPieceVocab) -> list[str]:
    """Greedy longest-match-first segmentation of a single word."""
    if not word or any(c.isspace() for c in word):
        raise ValueError("wordpiece input must be a non-empty whitespace-free word")
    if len(word) > MAX_WORD_CHARS:
        return [v.unk_token]
    pieces = []
    start = 0
    n = len(word)
    while start < n:
        end = n
        found = None
        while start < end:
            piece = word[start:end]
            if start > 0:
                piece = v.continuation_prefix + piece
            if piece in v.token_to_id:
                found = piece
                break
            end -= 1
        if found is None:
            return [v.unk_token]
        pieces.append(found)
        start = end
    return pieces


def encode(
    text: str,
    v: WordPieceVocab,
    max_len: int,
    lowercase: bool = True,
) -> list[int]:
    """Text -> [CLS] pieces [SEP] id sequence, truncated to ``max_len``.

    Sequences longer than max_len are truncated with the final position
    forced back to [SEP]; padding is left to the batching code.
    """
    pieces = [CLS_TOKEN]
    for word in basic_tokenize(text, lowercase=lowercase):
        pieces.extend(wordpiece_tokenize(word, v))
    pieces.append(SEP_TOKEN)
    if len(pieces) > max_len:
        pieces = pieces[: max_len - 1] + [SEP_TOKEN]
    return [v.id(p) for p in pieces]


def build_vocab_from_texts(texts: list[str], max_words: int = 4000, lowercase: bool = True) -> WordPieceVocab:
    """Word-list vocabulary for desk-scale training runs.

    Not WordPiece training: just the most frequent whole words plus single
    characters (with continuation variants) so rare words degrade into
    character pieces instead of [UNK]. Ordering is deterministic.
    """
    freq: Counter = Counter()
    chars = set()
    for text in texts:
        for tok in basic_tokenize(text, lowercase=lowercase):
            freq[tok] += 1
            chars.update(tok)
    words = [w for w, _ in sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))[:max_words]]
    pieces = [PAD_TOKEN, CLS_TOKEN, SEP_TOKEN, UNK_TOKEN]
    pieces.extend(words)
    for c in sorted(chars):
        if c not in freq:
            pieces.append(c)
        pieces.append("##" + c)
    return WordPieceVocab.from_tokens(pieces)


@dataclass(frozen=True)
class NGramSpec:
    unit: str = "word"  # word | pos_tag | char
    n_values: frozenset[int] = frozenset({1, 2, 3})

    def __post_init__(self):
        if self.unit not in ("word", "pos_tag", "char"):
            raise ValueError("unknown n-gram unit %r" % self.unit)
        if not self.n_values:
            raise ValueError("n_values must be non-empty")
        if any(n < 1 for n in self.n_values):
            raise ValueError("all n must be >= 1")


def extract_ngrams(units: list[str], spec: NGramSpec) -> Counter:
    """Multiset of n-grams over ``units``.

    Word and POS units are joined with the reserved separator; char n-grams
    run over the units concatenated into one string with single-space word
    boundary markers.
    """
    grams: Counter = Counter()
    if spec.unit == "char":
        seq = " ".join(units)
        for n in spec.n_values:
            for i in range(len(seq) - n + 1):
                grams[seq[i : i + n]] += 1
    else:
        for n in spec.n_values:
            for i in range(len(units) - n + 1):
                grams[NGRAM_SEP.join(units[i : i + n])] += 1
    return grams
