"""Per-post extraction of the three feature families into aligned matrices."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Dataset, Label, group_events
from .fuse import IMAGE_COLUMNS, FeatureMatrix
from .imagestat import IMAGE_STAT_NAMES, PIXEL, cached_identity, image_stats, post_iqa
from .iqa import QualityModels, load_default_models
from .socialfeat import SOCIAL_FEATURE_NAMES, extract_social_features
from .textfeat import CONTENT_FEATURE_NAMES, Lexicon, default_lexicon, extract_content_features

logger = logging.getLogger(__name__)

TEXTUAL_COLUMNS = CONTENT_FEATURE_NAMES + SOCIAL_FEATURE_NAMES
ROW_COLUMNS = ("id", "event_id", "label", "split")


@dataclass(frozen=True)
class FeatureSet:
    """Textual and image matrices over the same rows, with labels and event ids."""

    textual: FeatureMatrix
    image: FeatureMatrix
    labels: tuple[Label, ...]
    event_ids: tuple[str, ...]
    splits: tuple[str | None, ...]

    @property
    def row_ids(self) -> tuple[str, ...]:
        return self.textual.row_ids

    def y(self) -> np.ndarray:
        if any(lab is Label.UNKNOWN for lab in self.labels):
            raise ValueError("rows with unknown labels cannot be used for training or evaluation")
        return np.array([lab is Label.FAKE for lab in self.labels], dtype=np.intp)

    def take(self, rows) -> "FeatureSet":
        rows = np.asarray(rows, dtype=np.intp)
        return FeatureSet(self.textual.take(rows), self.image.take(rows),
                          tuple(self.labels[i] for i in rows), tuple(self.event_ids[i] for i in rows),
                          tuple(self.splits[i] for i in rows))

    def where_split(self, name: str) -> "FeatureSet":
        pick = [i for i, s in enumerate(self.splits) if (s or "train") == name]
        return self.take(pick)

    def save(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        self.textual.to_tsv(out / "textual.tsv")
        self.image.to_tsv(out / "image.tsv")
        lines = ["\t".join(ROW_COLUMNS)]
        for rid, ev, lab, sp in zip(self.row_ids, self.event_ids, self.labels, self.splits):
            lines.append("\t".join([rid, ev, lab.value, sp or "NA"]))
        (out / "rows.tsv").write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, in_dir: str | Path) -> "FeatureSet":
        d = Path(in_dir)
        txt = FeatureMatrix.from_tsv(d / "textual.tsv")
        img = FeatureMatrix.from_tsv(d / "image.tsv")
        rows = [ln.split("\t") for ln in (d / "rows.tsv").read_text().splitlines()[1:] if ln]
        if tuple(r[0] for r in rows) != txt.row_ids or img.row_ids != txt.row_ids:
            raise ValueError(f"feature tables in {d} are not row-aligned")
        return cls(txt, img, tuple(Label(r[2]) for r in rows), tuple(r[1] for r in rows),
                   tuple(None if r[3] == "NA" else r[3] for r in rows))


def textual_matrix(d: Dataset, lex: Lexicon | None) -> FeatureMatrix:
    recs = []
    for p in d.posts:
        r = extract_content_features(p.text, lex, p.language).as_dict()
        r.update(extract_social_features(p).as_dict())
        recs.append(r)
    return FeatureMatrix.from_records(d.ids(), recs, TEXTUAL_COLUMNS)


def image_matrix(d: Dataset, models: QualityModels, identity_mode: str = PIXEL) -> FeatureMatrix:
    ident = cached_identity(identity_mode)
    stats = {e.event_id: image_stats(e, ident).as_dict() for e in group_events(d)}
    cache: dict = {}
    recs = []
    for p in d.posts:
        q = post_iqa(p, models, cache)
        r = {"brisque": q.brisque, "niqe": q.niqe, "piqe": q.piqe}
        r.update({k: stats[p.event_id][k] for k in IMAGE_STAT_NAMES})
        recs.append(r)
    return FeatureMatrix.from_records(d.ids(), recs, IMAGE_COLUMNS)


def extract_features(
    d: Dataset,
    models: QualityModels | None = None,
    lexicon: Lexicon | None | str = "default",
    identity_mode: str = PIXEL,
) -> FeatureSet:
    """All three feature families for every post of ``d`` (assumed already filtered)."""
    lex = default_lexicon() if lexicon == "default" else lexicon
    models = models or load_default_models()
    txt = textual_matrix(d, lex)
    img = image_matrix(d, models, identity_mode)
    return FeatureSet(txt, img, tuple(d.labels()), tuple(p.event_id for p in d.posts),
                      tuple(p.split for p in d.posts))
