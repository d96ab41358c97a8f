"""Twitter-specific normalization applied before tokenization.

Two steps, then whitespace collapsing:

* emoji are replaced by their textual names (``🔥`` -> `` :fire: ``), via a
  longest-match lookup in a plain TSV table so tiny fixtures and full tables
  are interchangeable;
* hashtags are segmented into words -- camel-case and letter/digit boundaries
  first, a dictionary DP as fallback ("#MakeAmericaGreatAgain" becomes
  "Make America Great Again").

Mentions (@USER) and URLs pass through untouched. The composition is
idempotent: emoji names contain no emoji and segmented hashtags contain
no '#'.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field


@dataclass
class EmojiTable:
    mapping: dict[str, str]
    _max_key_len: int = field(init=False, repr=False)
    _first_chars: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        for seq, name in self.mapping.items():
            if not seq:
                raise ValueError("empty emoji sequence")
            if not (len(name) >= 3 and name.startswith(":") and name.endswith(":") and name.isascii()):
                raise ValueError("emoji name %r must look like :name:" % name)
        self._max_key_len = max((len(k) for k in self.mapping), default=0)
        self._first_chars = frozenset(k[0] for k in self.mapping)

    @classmethod
    def from_tsv(cls, text: str) -> "EmojiTable":
        """Rows are ``codepoints<TAB>name`` with codepoints space-joined hex."""
        mapping = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                codes, name = line.split("\t")
            except ValueError:
                raise ValueError("emoji table line %d: expected 2 columns" % lineno) from None
            seq = "".join(chr(int(c, 16)) for c in codes.split())
            mapping[seq] = name
        return cls(mapping)


@dataclass
class SegmenterLexicon:
    words: set[str]
    word_rank: dict[str, int]

    def __post_init__(self):
        missing = set(self.word_rank) - self.words
        if missing:
            raise ValueError("ranked words missing from the word set: %r" % sorted(missing)[:5])

    @classmethod
    def from_wordlist(cls, text: str) -> "SegmenterLexicon":
        """Newline-delimited ranked list; rank = line number (0 = most common)."""
        words = []
        for line in text.splitlines():
            w = line.strip().lower()
            if w and not w.startswith("#"):
                words.append(w)
        rank = {}
        for i, w in enumerate(words):
            rank.setdefault(w, i)
        return cls(set(rank), rank)


def replace_emojis(text: str, table: EmojiTable) -> str:
    """Replace every maximal table-known emoji sequence by its padded name.

    Longest match wins at each position, scanning left to right; unknown
    emoji and all other characters are copied through unchanged.
    """
    if not table.mapping:
        return text
    out = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in table._first_chars:
            match = None
            for l in range(min(table._max_key_len, n - i), 0, -1):
                cand = text[i : i + l]
                if cand in table.mapping:
                    match = cand
                    break
            if match is not None:
                out.append(" %s " % table.mapping[match])
                i += len(match)
                continue
        out.append(ch)
        i += 1
    return "".join(out)


def _camel_digit_split(core: str) -> list[str]:
    """Split at camel-case humps and letter/digit boundaries.

    A boundary sits before an uppercase that follows a lowercase or digit,
    before the last uppercase of an acronym run followed by lowercase
    ("USAToday" -> "USA", "Today"), and wherever letters meet digits.
    """
    pieces = []
    start = 0
    for i in range(1, len(core)):
        prev, cur = core[i - 1], core[i]
        boundary = False
        if cur.isupper() and (prev.islower() or prev.isdigit()):
            boundary = True
        elif cur.islower() and prev.isupper() and i - start >= 2:
            # end of an acronym run: break before the upper that starts this word
            pieces.append(core[start : i - 1])
            start = i - 1
            continue
        elif cur.isdigit() != prev.isdigit():
            boundary = True
        if boundary:
            pieces.append(core[start:i])
            start = i
    pieces.append(core[start:])
    return [p for p in pieces if p]


def _dp_segment(core: str, lexicon: SegmenterLexicon) -> list[str] | None:
    """Minimal-word-count segmentation over the lexicon; ties broken by the
    lower summed frequency rank. Returns None when no full cover exists."""
    n = len(core)
    lower = core.lower()
    # best[i] = (word_count, summed_rank, split_start) for prefix of length i
    best: list[tuple[int, int, int] | None] = [None] * (n + 1)
    best[0] = (0, 0, -1)
    max_word = max((len(w) for w in lexicon.words), default=0)
    for i in range(1, n + 1):
        for j in range(max(0, i - max_word), i):
            if best[j] is None:
                continue
            w = lower[j:i]
            if w in lexicon.words:
                cand = (best[j][0] + 1, best[j][1] + lexicon.word_rank.get(w, 0), j)
                if best[i] is None or cand[:2] < best[i][:2]:
                    best[i] = cand
    if best[n] is None:
        return None
    cuts = []
    i = n
    while i > 0:
        j = best[i][2]
        cuts.append((j, i))
        i = j
    return [core[a:b] for a, b in reversed(cuts)]


def segment_hashtag(core: str, lexicon: SegmenterLexicon) -> list[str]:
    """Segment the body of a hashtag (the text after '#')."""
    camel = _camel_digit_split(core)
    if len(camel) > 1:
        return camel
    dp = _dp_segment(core, lexicon)
    if dp is not None:
        return dp
    return [core]


def normalize_hashtags(text: str, lexicon: SegmenterLexicon) -> str:
    """Strip '#' from hashtag tokens and segment their bodies into words.

    Only whitespace-delimited tokens that start with '#' are touched; a
    non-alphanumeric body is passed through with just the leading '#'
    marks removed. Whitespace runs are preserved (collapsing happens in
    :func:`preprocess`).
    """
    parts = re.split(r"(\s+)", text)
    out = []
    for token in parts:
        if token.startswith("#") and len(token) > 1:
            core = token.lstrip("#")
            if core.isalnum():
                out.append(" ".join(segment_hashtag(core, lexicon)))
            else:
                out.append(core)
        else:
            out.append(token)
    return "".join(out)


def collapse_whitespace(text: str) -> str:
    return " ".join(text.split())


def preprocess(text: str, table: EmojiTable, lexicon: SegmenterLexicon) -> str:
    """Emoji textualization, then hashtag segmentation, then whitespace collapse."""
    return collapse_whitespace(normalize_hashtags(replace_emojis(text, table), lexicon))
