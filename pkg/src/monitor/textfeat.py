"""Message-content features: token counts, sentiment-lexicon hits, pronouns, readability."""
from __future__ import annotations

import enum
import json
import logging
import re
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

logger = logging.getLogger(__name__)


class TokenClass(enum.Enum):
    WORD = "word"
    MENTION = "mention"
    HASHTAG = "hashtag"
    URL = "url"
    EMOTICON_HAPPY = "emoticon_happy"
    EMOTICON_SAD = "emoticon_sad"
    PUNCT = "punct"


HAPPY_EMOTICONS = (":)", ":-)", ":D", "=)")
SAD_EMOTICONS = (":(", ":-(", ";(", "='(")

PRONOUNS = {
    "en": (
        frozenset({"i", "we", "me", "us", "my", "our", "mine", "ours"}),
        frozenset({"you", "your", "yours"}),
        frozenset({"he", "she", "it", "they", "him", "her", "them", "his", "hers", "its", "their", "theirs"}),
    ),
}
# Flesch reading ease is calibrated for English only
READABILITY_LANGUAGES = frozenset({"en"})


def _emo_pattern(items) -> str:
    return "|".join(re.escape(e) for e in sorted(items, key=len, reverse=True))


# alternation order decides ties at the same start position
_TOKEN_RE = re.compile(
    r"(?P<url>https?://\S+)"
    rf"|(?P<happy>{_emo_pattern(HAPPY_EMOTICONS)})"
    rf"|(?P<sad>{_emo_pattern(SAD_EMOTICONS)})"
    r"|(?P<mention>@\w+)"
    r"|(?P<hashtag>#\w+)"
    r"|(?P<word>[^\W\d_]+)"
    r"|(?P<punct>[^\w\s])"
)
_GROUP_CLASS = {
    "url": TokenClass.URL,
    "happy": TokenClass.EMOTICON_HAPPY,
    "sad": TokenClass.EMOTICON_SAD,
    "mention": TokenClass.MENTION,
    "hashtag": TokenClass.HASHTAG,
    "word": TokenClass.WORD,
    "punct": TokenClass.PUNCT,
}


@dataclass(frozen=True)
class Token:
    surface: str
    cls: TokenClass


TokenStream = list[Token]


def tokenize(text: str) -> TokenStream:
    return [Token(m.group(), _GROUP_CLASS[m.lastgroup]) for m in _TOKEN_RE.finditer(text)]


@dataclass(frozen=True)
class Lexicon:
    positive_words: frozenset
    negative_words: frozenset
    language: str = "en"

    def __post_init__(self):
        overlap = self.positive_words & self.negative_words
        if overlap:
            raise ValueError(f"lexicon polarity sets overlap: {sorted(overlap)[:5]}")

    @classmethod
    def from_manifest(cls, path: str | Path) -> "Lexicon":
        path = Path(path)
        man = json.loads(path.read_text(encoding="utf-8"))
        base = path.parent

        def words(rel: str) -> frozenset:
            lines = (base / rel).read_text(encoding="utf-8").splitlines()
            return frozenset(w.strip().lower() for w in lines if w.strip() and not w.startswith(";"))

        lex = cls(words(man["positive_path"]), words(man["negative_path"]), man.get("language", "und"))
        if not lex.positive_words or not lex.negative_words:
            raise ValueError(f"lexicon {path} has an empty polarity list")
        return lex


def default_lexicon() -> Lexicon:
    return Lexicon.from_manifest(Path(str(resources.files("monitor") / "data" / "lexicon" / "en" / "manifest.json")))


def primary_language(tag: str | None) -> str:
    return (tag or "und").split("-")[0].split("_")[0].lower()


_VOWEL_RUN = re.compile(r"[aeiouy]+")


def count_syllables(word: str) -> int:
    w = word.lower()
    n = len(_VOWEL_RUN.findall(w))
    if len(w) > 2 and w.endswith("e") and not w.endswith("le"):
        n -= 1
    return max(n, 1)


_URL_RE = re.compile(r"https?://\S+")
_SENTENCE_END = re.compile(r"[.!?]+")


def flesch_reading_ease(text: str) -> Optional[float]:
    """Flesch reading ease clamped to [0, 100]; ``None`` without any word."""
    words = [t.surface for t in tokenize(text) if t.cls is TokenClass.WORD]
    if not words:
        return None
    sentences = max(len(_SENTENCE_END.findall(_URL_RE.sub(" ", text))), 1)
    syllables = sum(count_syllables(w) for w in words)
    raw = 206.835 - 1.015 * (len(words) / sentences) - 84.6 * (syllables / len(words))
    logger.debug("flesch raw=%.3f words=%d sentences=%d syllables=%d", raw, len(words), sentences, syllables)
    return min(max(raw, 0.0), 100.0)


@dataclass(frozen=True)
class ContentFeatures:
    n_chars: int
    n_words: int
    n_questmark: int
    n_exclammark: int
    n_uppercase_chars: int
    n_pos_senti_words: Optional[int]
    n_neg_senti_words: Optional[int]
    n_mentions: int
    n_hashtags: int
    n_urls: int
    n_happy_emoticons: int
    n_sad_emoticons: int
    n_first_pron: Optional[int]
    n_second_pron: Optional[int]
    n_third_pron: Optional[int]
    readability: Optional[float]

    def as_dict(self) -> dict:
        return asdict(self)


CONTENT_FEATURE_NAMES = tuple(ContentFeatures.__dataclass_fields__)


def extract_content_features(text: str, lex: Lexicon | None, language: str = "en") -> ContentFeatures:
    """Content features; language-dependent fields are ``None`` when unsupported.

    Sentiment needs a lexicon of the post's language, pronouns a known list,
    readability an English post.
    """
    toks = tokenize(text)
    by = {c: [t.surface for t in toks if t.cls is c] for c in TokenClass}
    words = [w.lower() for w in by[TokenClass.WORD]]
    puncts = by[TokenClass.PUNCT]
    lang = primary_language(language)

    pos = neg = None
    if lex is not None and primary_language(lex.language) == lang:
        pos = sum(w in lex.positive_words for w in words)
        neg = sum(w in lex.negative_words for w in words)
    first = second = third = None
    if lang in PRONOUNS:
        p1, p2, p3 = PRONOUNS[lang]
        first = sum(w in p1 for w in words)
        second = sum(w in p2 for w in words)
        third = sum(w in p3 for w in words)
    readability = flesch_reading_ease(text) if lang in READABILITY_LANGUAGES else None

    return ContentFeatures(
        n_chars=len(text),
        n_words=len(words),
        n_questmark=puncts.count("?"),
        n_exclammark=puncts.count("!"),
        n_uppercase_chars=sum(c.isupper() for c in text),
        n_pos_senti_words=pos,
        n_neg_senti_words=neg,
        n_mentions=len(by[TokenClass.MENTION]),
        n_hashtags=len(by[TokenClass.HASHTAG]),
        n_urls=len(by[TokenClass.URL]),
        n_happy_emoticons=len(by[TokenClass.EMOTICON_HAPPY]),
        n_sad_emoticons=len(by[TokenClass.EMOTICON_SAD]),
        n_first_pron=first,
        n_second_pron=second,
        n_third_pron=third,
        readability=readability,
    )
