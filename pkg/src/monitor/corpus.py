"""Post/event data model, JSONL ingestion, usability filtering and event-level splits."""
from __future__ import annotations

import enum
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional

import numpy as np

logger = logging.getLogger(__name__)


class CorpusError(ValueError):
    pass


class MalformedRecord(CorpusError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class Label(enum.Enum):
    REAL = "real"
    FAKE = "fake"
    UNKNOWN = "unknown"

    @classmethod
    def parse(cls, v) -> "Label":
        if v is None:
            return cls.UNKNOWN
        if isinstance(v, Label):
            return v
        s = str(v).strip().lower()
        for lab in cls:
            if lab.value == s:
                return lab
        raise ValueError(f"unknown label {v!r}")

    def to_json(self):
        return None if self is Label.UNKNOWN else self.value


@dataclass(frozen=True)
class UserProfile:
    followers: int = 0
    friends: int = 0
    statuses_posted: int = 0
    favourites: int = 0
    times_listed: int = 0
    verified: bool = False
    has_profile_image: bool = False
    has_homepage_url: bool = False


@dataclass(frozen=True)
class ImageRef:
    uri: str
    content_hash: str = ""

    def __post_init__(self):
        if not self.uri:
            raise ValueError("image uri must be non-empty")


@dataclass(frozen=True)
class Post:
    id: str
    event_id: str
    text: str
    user: UserProfile = field(default_factory=UserProfile)
    retweets: int = 0
    likes: int = 0
    images: tuple[ImageRef, ...] = ()
    label: Label = Label.UNKNOWN
    language: str = "und"
    split: Optional[str] = None


@dataclass(frozen=True)
class Event:
    event_id: str
    posts: tuple[Post, ...]


@dataclass(frozen=True)
class SkipRecord:
    line_no: int
    reason: str


@dataclass(frozen=True)
class Dataset:
    posts: tuple[Post, ...] = ()
    provenance: str = ""
    skipped: tuple[SkipRecord, ...] = ()

    def __post_init__(self):
        dup = [k for k, n in Counter(p.id for p in self.posts).items() if n > 1]
        if dup:
            raise CorpusError(f"duplicate post ids: {sorted(dup)[:5]}")

    def __len__(self) -> int:
        return len(self.posts)

    def ids(self) -> list[str]:
        return [p.id for p in self.posts]

    def labels(self) -> list[Label]:
        return [p.label for p in self.posts]

    def subset(self, posts: Iterable[Post], note: str = "") -> "Dataset":
        prov = f"{self.provenance} | {note}" if note else self.provenance
        return Dataset(tuple(posts), prov)

    def skip_report(self) -> list[dict]:
        return [{"line": s.line_no, "reason": s.reason} for s in self.skipped]


# ---------------------------------------------------------------- ingestion

_USER_FIELDS = {
    "followers": "followers",
    "friends": "friends",
    "statuses": "statuses_posted",
    "favourites": "favourites",
    "listed": "times_listed",
}
_USER_FLAGS = ("verified", "has_profile_image", "has_homepage_url")


def _count(v, name: str) -> int:
    if v is None:
        return 0
    if isinstance(v, bool) or not isinstance(v, (int, float)) or v != int(v):
        raise ValueError(f"{name} must be an integer count")
    if v < 0:
        raise ValueError(f"{name} must be >= 0")
    return int(v)


def _flag(v, name: str) -> bool:
    if v is None:
        return False
    if not isinstance(v, (bool, int)) or v not in (0, 1, True, False):
        raise ValueError(f"{name} must be boolean")
    return bool(v)


def _nonempty_str(v, name: str) -> str:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        v = str(v)
    if not isinstance(v, str) or not v:
        raise ValueError(f"{name} must be a non-empty string")
    return v


def _resolve(uri: str, base: Path | None) -> str:
    p = Path(uri)
    if base is not None and not p.is_absolute():
        return str(base / p)
    return uri


def parse_record(rec: dict, base_dir: Path | None = None) -> Post:
    """Build a Post from one decoded JSON record (raises ValueError on schema violations)."""
    if not isinstance(rec, dict):
        raise ValueError("record is not an object")
    for key in ("id", "event_id", "text"):
        if key not in rec:
            raise ValueError(f"missing field {key!r}")
    if not isinstance(rec["text"], str):
        raise ValueError("text must be a string")
    u = rec.get("user")
    if not isinstance(u, dict):
        raise ValueError("missing or invalid user object")
    ukw = {attr: _count(u.get(key), f"user.{key}") for key, attr in _USER_FIELDS.items()}
    ukw.update({k: _flag(u.get(k), f"user.{k}") for k in _USER_FLAGS})
    imgs = rec.get("images") or []
    if not isinstance(imgs, list):
        raise ValueError("images must be a list")
    refs = []
    for im in imgs:
        uri = im.get("uri") if isinstance(im, dict) else im
        refs.append(ImageRef(_resolve(_nonempty_str(uri, "images[].uri"), base_dir)))
    split = rec.get("split")
    if split is not None and split not in ("train", "test"):
        raise ValueError(f"split must be 'train' or 'test', got {split!r}")
    lang = rec.get("language") or "und"
    if not isinstance(lang, str):
        raise ValueError("language must be a string")
    return Post(
        id=_nonempty_str(rec["id"], "id"),
        event_id=_nonempty_str(rec["event_id"], "event_id"),
        text=rec["text"],
        user=UserProfile(**ukw),
        retweets=_count(rec.get("retweets"), "retweets"),
        likes=_count(rec.get("likes"), "likes"),
        images=tuple(refs),
        label=Label.parse(rec.get("label")),
        language=lang,
        split=split,
    )


def post_to_record(p: Post, base_dir: Path | None = None) -> dict:
    def rel(uri: str) -> str:
        if base_dir is None:
            return uri
        try:
            return str(Path(uri).relative_to(base_dir))
        except ValueError:
            return uri

    rec = {
        "id": p.id,
        "event_id": p.event_id,
        "text": p.text,
        "language": p.language,
        "label": p.label.to_json(),
        "user": {
            "followers": p.user.followers,
            "friends": p.user.friends,
            "statuses": p.user.statuses_posted,
            "favourites": p.user.favourites,
            "listed": p.user.times_listed,
            "verified": p.user.verified,
            "has_profile_image": p.user.has_profile_image,
            "has_homepage_url": p.user.has_homepage_url,
        },
        "retweets": p.retweets,
        "likes": p.likes,
        "images": [{"uri": rel(im.uri)} for im in p.images],
    }
    if p.split is not None:
        rec["split"] = p.split
    return rec


def write_posts(posts: Iterable[Post], path: str | Path, base_dir: Path | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in posts:
            fh.write(json.dumps(post_to_record(p, base_dir), ensure_ascii=False) + "\n")


def load_posts(path: str | Path, strict: bool = False) -> Dataset:
    """Read a JSONL post file; relative image uris resolve against the file's directory.

    Lenient mode skips malformed lines and records them in ``Dataset.skipped``;
    strict mode raises :class:`MalformedRecord` at the first one. Duplicate
    post ids are always an error.
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    base = path.parent
    posts, skipped, seen = [], [], {}
    for line_no, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            p = parse_record(json.loads(line), base)
        except (ValueError, TypeError, AttributeError) as exc:
            if strict:
                raise MalformedRecord(line_no, str(exc)) from exc
            skipped.append(SkipRecord(line_no, str(exc)))
            continue
        if p.id in seen:
            raise CorpusError(f"line {line_no}: duplicate post id {p.id!r} (first on line {seen[p.id]})")
        seen[p.id] = line_no
        posts.append(p)
    if skipped:
        logger.warning("%s: skipped %d malformed record(s)", path, len(skipped))
    return Dataset(tuple(posts), f"loaded from {path.name}", tuple(skipped))


# ---------------------------------------------------------------- filtering


def _decodable(uri: str) -> bool:
    from .iqa.nss import ImageDecodeError, load_image

    try:
        load_image(uri)
    except (ImageDecodeError, FileNotFoundError):
        return False
    return True


def filter_usable(d: Dataset, decodable: Callable[[str], bool] | None = None) -> Dataset:
    """Keep posts with non-blank text and at least one decodable image."""
    check = decodable or _decodable
    cache: dict[str, bool] = {}

    def ok(uri: str) -> bool:
        if uri not in cache:
            cache[uri] = check(uri)
            if not cache[uri]:
                logger.warning("undecodable image %s", uri)
        return cache[uri]

    kept = [p for p in d.posts if p.text.strip() and any(ok(im.uri) for im in p.images)]
    if len(kept) < len(d.posts):
        logger.info("filter_usable removed %d of %d posts", len(d.posts) - len(kept), len(d.posts))
    return Dataset(tuple(kept), d.provenance, d.skipped)


def group_events(d: Dataset) -> list[Event]:
    """Partition posts by event id, events in first-appearance order."""
    groups: dict[str, list[Post]] = {}
    for p in d.posts:
        groups.setdefault(p.event_id, []).append(p)
    return [Event(k, tuple(v)) for k, v in groups.items()]


# ---------------------------------------------------------------- splitting


@dataclass(frozen=True)
class FixedByFlag:
    """Use each record's ``split`` flag; unflagged posts go to train."""


@dataclass(frozen=True)
class RandomRatio:
    ratio: float = 0.8

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise ValueError("ratio must lie in (0, 1)")


SplitScheme = FixedByFlag | RandomRatio


def ratio_train_events(events: list[str], ratio: float, seed: int) -> set[str]:
    """Seeded choice of round(ratio * n) training events (at least one per side)."""
    if len(events) < 2:
        raise CorpusError(f"random split needs at least 2 events, got {len(events)}")
    order = np.random.default_rng(seed).permutation(len(events))
    n_train = min(max(int(round(ratio * len(events))), 1), len(events) - 1)
    return {events[i] for i in order[:n_train]}


def split(d: Dataset, scheme: SplitScheme, seed: int = 0) -> tuple[Dataset, Dataset]:
    if isinstance(scheme, FixedByFlag):
        unflagged = sum(p.split is None for p in d.posts)
        if unflagged:
            logger.warning("%d post(s) carry no split flag; assigned to train", unflagged)
        train = [p for p in d.posts if p.split != "test"]
        test = [p for p in d.posts if p.split == "test"]
        if not test:
            logger.warning("fixed split has an empty test side")
        if not train:
            logger.warning("fixed split has an empty train side")
        return d.subset(train, "split=fixed:train"), d.subset(test, "split=fixed:test")
    if isinstance(scheme, RandomRatio):
        train_ev = ratio_train_events([e.event_id for e in group_events(d)], scheme.ratio, seed)
        train = [p for p in d.posts if p.event_id in train_ev]
        test = [p for p in d.posts if p.event_id not in train_ev]
        note = f"split=ratio({scheme.ratio},seed={seed})"
        return d.subset(train, note + ":train"), d.subset(test, note + ":test")
    raise TypeError(f"unknown split scheme {scheme!r}")


def with_labels_known(d: Dataset) -> Dataset:
    return Dataset(tuple(p for p in d.posts if p.label is not Label.UNKNOWN), d.provenance, d.skipped)

