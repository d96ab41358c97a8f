import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from offlang.preprocess import (
    EmojiTable,
    SegmenterLexicon,
    _dp_segment,
    collapse_whitespace,
    normalize_hashtags,
    preprocess,
    replace_emojis,
    segment_hashtag,
)


class TestReplaceEmojis:
    def test_single_known_emoji(self, emoji_table):
        assert replace_emojis("good \U0001F525", emoji_table) == "good  :fire: "

    def test_plain_text_untouched(self, emoji_table):
        assert replace_emojis("plain text", emoji_table) == "plain text"

    def test_repeated_leftmost_first(self, emoji_table):
        assert replace_emojis("\U0001F525\U0001F525", emoji_table) == " :fire:  :fire: "

    def test_multi_codepoint_longest_match(self, emoji_table):
        flag = "\U0001F1FA\U0001F1F8"
        assert replace_emojis(flag, emoji_table) == " :flag_united_states: "

    def test_unknown_emoji_left_intact(self, emoji_table):
        assert replace_emojis("x \U0001F9EA y", emoji_table) == "x \U0001F9EA y"

    def test_table_validation(self):
        with pytest.raises(ValueError):
            EmojiTable({"\U0001F525": "fire"})  # missing colons


def brute_force_segmentations(core, words, max_len=20):
    """All full covers of ``core`` by lexicon words (lowercased match)."""
    low = core.lower()
    n = len(low)
    out = []

    def rec(i, acc):
        if i == n:
            out.append(list(acc))
            return
        for j in range(i + 1, min(n, i + max_len) + 1):
            if low[i:j] in words:
                acc.append(core[i:j])
                rec(j, acc)
                acc.pop()

    rec(0, [])
    return out


class TestHashtags:
    def test_paper_example(self, seg_lexicon):
        assert (
            normalize_hashtags("#MakeAmericaGreatAgain", seg_lexicon)
            == "Make America Great Again"
        )

    def test_single_dictionary_word(self, seg_lexicon):
        assert normalize_hashtags("#hello", seg_lexicon) == "hello"

    def test_letter_digit_boundaries(self, seg_lexicon):
        assert normalize_hashtags("#covid19news", seg_lexicon) == "covid 19 news"

    def test_dp_fallback_segments(self, seg_lexicon):
        assert normalize_hashtags("#makeamericagreatagain", seg_lexicon) == (
            "make america great again"
        )

    def test_unsegmentable_left_bare(self, seg_lexicon):
        assert normalize_hashtags("#qzjxq", seg_lexicon) == "qzjxq"

    def test_non_hashtag_tokens_untouched(self, seg_lexicon):
        assert normalize_hashtags("a#b @USER http://x.y", seg_lexicon) == "a#b @USER http://x.y"

    def test_dp_minimal_word_count_vs_brute_force(self, seg_lexicon):
        for core in ("sunday", "sunrise", "makeamerica", "thenews", "aato"):
            got = _dp_segment(core, seg_lexicon)
            all_segs = brute_force_segmentations(core, seg_lexicon.words)
            if not all_segs:
                assert got is None
                continue
            min_count = min(len(s) for s in all_segs)
            assert got is not None and len(got) == min_count
            # tie-break: no segmentation of equal length has lower summed rank
            rank = lambda seg: sum(seg_lexicon.word_rank[w.lower()] for w in seg)  # noqa: E731
            best_rank = min(rank(s) for s in all_segs if len(s) == min_count)
            assert rank(got) == best_rank

    def test_dp_words_all_in_lexicon(self, seg_lexicon):
        got = _dp_segment("covidnews", seg_lexicon)
        assert got is not None
        assert all(w.lower() in seg_lexicon.words for w in got)

    def test_camel_priority_over_dictionary(self, seg_lexicon):
        # "SunDay" could be one dictionary word lowered; camel rule wins
        assert segment_hashtag("SunDay", seg_lexicon) == ["Sun", "Day"]

    def test_lexicon_invariant(self):
        with pytest.raises(ValueError):
            SegmenterLexicon({"a"}, {"b": 0})


class TestPreprocess:
    def test_composition(self, emoji_table, seg_lexicon):
        assert preprocess("#Fun \U0001F525", emoji_table, seg_lexicon) == "Fun :fire:"

    def test_empty(self, emoji_table, seg_lexicon):
        assert preprocess("", emoji_table, seg_lexicon) == ""

    def test_noop_collapse_only(self, emoji_table, seg_lexicon):
        assert preprocess("a   b\tc", emoji_table, seg_lexicon) == collapse_whitespace("a   b\tc")

    def test_mentions_and_urls_pass_through(self, emoji_table, seg_lexicon):
        assert preprocess("@USER check http://a.b", emoji_table, seg_lexicon) == (
            "@USER check http://a.b"
        )

    @given(st.text(alphabet=st.characters(codec="utf-8"), max_size=60))
    @settings(max_examples=200, deadline=None)
    def test_idempotent(self, text):
        # hypothesis can't see pytest fixtures; build inline
        table = EmojiTable({"\U0001F525": ":fire:", "\U0001F602": ":joy:"})
        lex = SegmenterLexicon.from_wordlist("the\nnews\ncovid\nfun\n")
        once = preprocess(text, table, lex)
        assert preprocess(once, table, lex) == once

    def test_no_deletion_of_regular_chars(self, emoji_table, seg_lexicon):
        text = "Keep: letters, DIGITS 123 \U0001F525 #CovidNews symbols %&*!"
        after_emoji = replace_emojis(text, emoji_table)
        for ch in set(text) - {"\U0001F525"}:
            assert after_emoji.count(ch) >= text.count(ch)
        after_tags = normalize_hashtags(after_emoji, seg_lexicon)
        for ch in set(after_emoji) - {"#", " "}:
            assert after_tags.count(ch) == after_emoji.count(ch)
