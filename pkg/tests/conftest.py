import pathlib

import pytest

from offlang.features import PosLexicon, SentimentLexicon
from offlang.preprocess import EmojiTable, SegmenterLexicon
from offlang.tokenization import WordPieceVocab

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def read(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def emoji_table() -> EmojiTable:
    return EmojiTable.from_tsv(read("emoji_10.tsv"))


@pytest.fixture(scope="session")
def seg_lexicon() -> SegmenterLexicon:
    return SegmenterLexicon.from_wordlist(read("segmenter_small.txt"))


@pytest.fixture(scope="session")
def pos_lexicon() -> PosLexicon:
    return PosLexicon.from_tsv(read("pos_small.tsv"))


@pytest.fixture(scope="session")
def sent_lexicon() -> SentimentLexicon:
    return SentimentLexicon.from_tsv(
        read("sentiment_small.tsv"), read("negators_small.txt"), read("intensifiers_small.tsv")
    )


@pytest.fixture(scope="session")
def wp_vocab() -> WordPieceVocab:
    return WordPieceVocab.from_file_text(read("vocab_small.txt"))
