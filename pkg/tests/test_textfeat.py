from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monitor.textfeat import (
    CONTENT_FEATURE_NAMES,
    Lexicon,
    TokenClass,
    count_syllables,
    default_lexicon,
    extract_content_features,
    flesch_reading_ease,
    primary_language,
    tokenize,
)


@pytest.fixture(scope="module")
def lex():
    return default_lexicon()


def classes(text):
    return Counter(t.cls for t in tokenize(text))


def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_tweet():
    toks = tokenize("OMG!! #fake @user http://t.co/x :)")
    c = Counter(t.cls for t in toks)
    assert c == {TokenClass.WORD: 1, TokenClass.HASHTAG: 1, TokenClass.MENTION: 1,
                 TokenClass.URL: 1, TokenClass.EMOTICON_HAPPY: 1, TokenClass.PUNCT: 2}
    assert [t.surface for t in toks if t.cls is TokenClass.PUNCT] == ["!", "!"]


def test_tokenize_boundary():
    assert [(t.surface, t.cls) for t in tokenize("a#b")] == [("a", TokenClass.WORD), ("#b", TokenClass.HASHTAG)]


def test_tokenize_sad_and_bare_symbols():
    c = classes("oh no :( :-( ;( ='( @ #")
    assert c[TokenClass.EMOTICON_SAD] == 4
    assert c[TokenClass.MENTION] == 0 and c[TokenClass.HASHTAG] == 0
    assert c[TokenClass.PUNCT] == 2


def test_digits_are_not_words():
    assert classes("route 66 now")[TokenClass.WORD] == 2


def test_content_example(lex):
    f = extract_content_features("I love this! You lie.", lex, "en")
    assert f.n_pos_senti_words == 1 and f.n_neg_senti_words == 1
    assert f.n_first_pron == 1 and f.n_second_pron == 1
    assert f.n_exclammark == 1
    assert f.n_third_pron == 0


def test_content_empty(lex):
    f = extract_content_features("", lex, "en")
    counts = [v for k, v in f.as_dict().items() if k != "readability"]
    assert all(v == 0 for v in counts)
    assert f.readability is None


def test_undetermined_language_is_missing(lex):
    f = extract_content_features("I love this! You lie.", lex, "und")
    assert f.n_pos_senti_words is None and f.n_neg_senti_words is None
    assert f.n_first_pron is None and f.n_second_pron is None and f.n_third_pron is None
    assert f.readability is None
    assert f.n_exclammark == 1


def test_no_lexicon_sentiment_missing():
    f = extract_content_features("I love it", None, "en")
    assert f.n_pos_senti_words is None and f.n_first_pron == 1


def test_region_subtag_uses_primary_language(lex):
    assert primary_language("en-GB") == "en"
    assert extract_content_features("love", lex, "en-GB").n_pos_senti_words == 1


def test_sentiment_case_insensitive(lex):
    assert extract_content_features("LOVE Love love", lex).n_pos_senti_words == 3


def test_uppercase_and_chars():
    f = extract_content_features("ABc dÉ!", None)
    assert f.n_uppercase_chars == 3
    assert f.n_chars == 7


def test_lexicon_overlap_rejected():
    with pytest.raises(ValueError):
        Lexicon(frozenset({"a", "b"}), frozenset({"b"}))


def test_lexicon_manifest(tmp_path):
    (tmp_path / "p.txt").write_text("; comment\nGood\n")
    (tmp_path / "n.txt").write_text("bad\n")
    (tmp_path / "m.json").write_text('{"language": "de", "positive_path": "p.txt", "negative_path": "n.txt"}')
    lx = Lexicon.from_manifest(tmp_path / "m.json")
    assert lx.positive_words == {"good"} and lx.language == "de"
    # a German lexicon gives no sentiment to an English post
    assert extract_content_features("good", lx, "en").n_pos_senti_words is None


def test_shipped_lexicon_disjoint(lex):
    assert lex.positive_words and lex.negative_words
    assert not lex.positive_words & lex.negative_words


@pytest.mark.parametrize("word,n", [("cat", 1), ("table", 2), ("queue", 1), ("the", 1), ("rhythm", 1),
                                    ("make", 1), ("beautiful", 3)])
def test_syllables(word, n):
    assert count_syllables(word) == n


def test_flesch_cat_clamped():
    # 6 words, 1 sentence, 6 syllables: 206.835 - 1.015*6 - 84.6*1 = 116.145
    assert flesch_reading_ease("The cat sat on the mat.") == 100.0


def test_flesch_unclamped_value():
    text = "The happy dog ran to the park. It was a sunny morning."
    words = text.replace(".", "").split()
    syl = sum(count_syllables(w) for w in words)
    raw = 206.835 - 1.015 * len(words) / 2 - 84.6 * syl / len(words)
    assert 0 < raw < 100
    assert flesch_reading_ease(text) == pytest.approx(raw, abs=1e-12)


def test_flesch_missing_without_words():
    assert flesch_reading_ease("") is None
    assert flesch_reading_ease("!!! 123") is None


def test_flesch_polysyllabic_lower():
    hard = ("Incomprehensibility characterizes institutionalized bureaucratic administrative "
            "communication notwithstanding considerable organizational deliberation.")
    assert flesch_reading_ease(hard) < flesch_reading_ease("The cat sat on the mat.")


def test_flesch_url_dots_not_sentences():
    a = flesch_reading_ease("see this now http://a.b.c/d.e")
    b = flesch_reading_ease("see this now")
    assert a == b


def test_feature_names_order():
    assert CONTENT_FEATURE_NAMES[0] == "n_chars" and CONTENT_FEATURE_NAMES[-1] == "readability"
    assert len(CONTENT_FEATURE_NAMES) == 16


@settings(max_examples=200, deadline=None)
@given(st.text())
def test_properties(text):
    lex = default_lexicon()
    f = extract_content_features(text, lex, "en")
    d = f.as_dict()
    assert f.n_chars == len(text)
    for k, v in d.items():
        if k != "readability":
            assert isinstance(v, int) and v >= 0
    if f.readability is not None:
        assert 0.0 <= f.readability <= 100.0
    assert extract_content_features(text, lex, "en") == f
    assert tokenize(text) == tokenize(text)
