"""Identification over per-person feature templates, fusing four spectra.

Two closed-set schemes share the same gallery:

* minimum distance: per spectrum, a weighted sum of squared entry
  differences between the probe's feature matrix and each person's
  template, averaged over spectra, then argmin;
* weighted majority voting: each of the 14 feature rows, in each
  spectrum, votes for the person whose template row is nearest in
  normalized Euclidean distance, the vote is worth that row's weight,
  and the highest total score wins.

Row weighting uses two per-row factors: ``alpha`` (reciprocal of the
row's mean over the training corpus, mapping rows onto comparable
scales) and ``w`` (how accurately the row identifies on its own,
measured by two-fold validation inside the training set, never on test
data). All argmin/argmax ties resolve to the lowest person id.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .dataset import SPECTRA, Spectrum
from .features import NUM_FEATURES

log = logging.getLogger(__name__)

__all__ = [
    "PersonTemplate",
    "ModelWeights",
    "GalleryModel",
    "ScoreBoard",
    "build_templates",
    "fit_alpha",
    "fit_w",
    "fit_gallery",
    "distance",
    "identify_mdc",
    "identify_wmv",
    "save_model",
    "load_model",
]

# person id -> that person's training samples, each a per-spectrum
# feature-matrix mapping; list order is significant for fold splits.
TrainingSamples = Mapping[int, Sequence[Mapping[Spectrum, np.ndarray]]]

_ALPHA_EPS = 1e-12


@dataclass(frozen=True)
class PersonTemplate:
    """Per-spectrum mean of one person's training feature matrices."""

    person_id: int
    templates: dict[Spectrum, np.ndarray]

    def __post_init__(self):
        missing = [s.value for s in SPECTRA if s not in self.templates]
        if missing:
            raise ValueError(f"person {self.person_id} lacks spectra {missing}")
        shapes = {self.templates[s].shape for s in SPECTRA}
        if len(shapes) != 1:
            raise ValueError(f"person {self.person_id} has mixed shapes {shapes}")
        shape = shapes.pop()
        if len(shape) != 2 or shape[0] != NUM_FEATURES:
            raise ValueError(f"expected {NUM_FEATURES} x M templates, got {shape}")


@dataclass(frozen=True)
class ModelWeights:
    """Per-row normalization factors alpha and importance weights w."""

    alpha: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=np.float64)
        w = np.asarray(self.w, dtype=np.float64)
        if alpha.shape != (NUM_FEATURES,) or w.shape != (NUM_FEATURES,):
            raise ValueError("alpha and w must have one entry per feature row")
        if np.any(alpha <= 0.0):
            raise ValueError("alpha factors must be positive")
        if np.any(w < 0.0) or np.any(w > 1.0):
            raise ValueError("w weights must lie in [0, 1]")
        if not np.any(w > 0.0):
            raise ValueError("at least one w weight must be positive")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "w", w)


@dataclass(frozen=True)
class GalleryModel:
    """Immutable enrolled gallery: templates plus fitted weights."""

    templates: tuple[PersonTemplate, ...]
    weights: ModelWeights
    block_size: int
    blocks_per_image: int

    def __post_init__(self):
        ordered = tuple(sorted(self.templates, key=lambda t: t.person_id))
        ids = [t.person_id for t in ordered]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate person ids in gallery")
        if not ordered:
            raise ValueError("gallery must contain at least one person")
        for t in ordered:
            m = t.templates[SPECTRA[0]].shape[1]
            if m != self.blocks_per_image:
                raise ValueError(
                    f"person {t.person_id} has {m} blocks, expected {self.blocks_per_image}"
                )
        object.__setattr__(self, "templates", ordered)

    @property
    def person_ids(self) -> list[int]:
        return [t.person_id for t in self.templates]


@dataclass(frozen=True)
class ScoreBoard:
    """Vote tally of one majority-voting query.

    ``votes[s][i]`` is the person that feature row i elected in spectrum
    s; ``scores`` accumulates each person's awarded weights (every row
    awards its full weight exactly once per spectrum).
    """

    scores: dict[int, float]
    votes: dict[Spectrum, list[int]]

    def ranked(self) -> list[tuple[int, float]]:
        """Person ids by descending score, ties by ascending id."""
        return sorted(self.scores.items(), key=lambda kv: (-kv[1], kv[0]))


def _check_training(training: TrainingSamples) -> list[int]:
    if not training:
        raise ValueError("empty training set")
    persons = sorted(training)
    shape = None
    for person in persons:
        samples = training[person]
        if not samples:
            raise ValueError(f"person {person} has no training samples")
        for sample in samples:
            for s in SPECTRA:
                if s not in sample:
                    raise ValueError(f"person {person} lacks spectrum {s.value}")
                f = np.asarray(sample[s])
                if shape is None:
                    shape = f.shape
                if f.shape != shape or f.shape[0] != NUM_FEATURES:
                    raise ValueError(
                        f"feature matrix of person {person} has shape {f.shape}, "
                        f"expected {shape}"
                    )
    return persons


def build_templates(training: TrainingSamples) -> list[PersonTemplate]:
    """Elementwise mean of each person's training matrices, per spectrum."""
    persons = _check_training(training)
    out = []
    for person in persons:
        samples = training[person]
        templates = {
            s: np.mean([np.asarray(sample[s], dtype=np.float64) for sample in samples], axis=0)
            for s in SPECTRA
        }
        out.append(PersonTemplate(person_id=person, templates=templates))
    return out


def fit_alpha(training: TrainingSamples) -> np.ndarray:
    """Reciprocal mean of each feature row over the whole training corpus.

    Rows whose mean is not positive (within 1e-12) keep alpha = 1 so the
    factor stays usable as a positive scale.
    """
    persons = _check_training(training)
    stacked = np.stack(
        [
            np.asarray(sample[s], dtype=np.float64)
            for person in persons
            for sample in training[person]
            for s in SPECTRA
        ]
    )
    means = stacked.mean(axis=(0, 2))
    alpha = np.ones(NUM_FEATURES, dtype=np.float64)
    degenerate = means <= _ALPHA_EPS
    alpha[~degenerate] = 1.0 / means[~degenerate]
    if np.any(degenerate):
        log.warning(
            "alpha fallback to 1.0 for feature rows %s (non-positive row mean)",
            np.nonzero(degenerate)[0].tolist(),
        )
    return alpha


def _fold_indices(n: int) -> list[tuple[list[int], list[int]]]:
    """Two (probe, gallery) index splits; odd counts favor the gallery."""
    half = n // 2
    return [
        (list(range(half)), list(range(half, n))),
        (list(range(n - half, n)), list(range(0, n - half))),
    ]


def fit_w(training: TrainingSamples, alpha: np.ndarray | None = None) -> np.ndarray:
    """Per-row single-feature identification accuracy.

    For each feature row, a two-fold validation inside the training set:
    half of every person's samples form a row-restricted sub-gallery
    (averaged templates), the other half are probes classified by the
    normalized squared row distance summed over blocks and averaged over
    spectra. The weight is the fraction of correct probes, averaged over
    the two fold orientations.
    """
    persons = _check_training(training)
    if len(persons) < 2:
        raise ValueError("fitting w requires at least 2 persons")
    counts = {p: len(training[p]) for p in persons}
    if min(counts.values()) < 2:
        raise ValueError("fitting w requires at least 2 training samples per person")
    if alpha is None:
        alpha = fit_alpha(training)

    # stacked[p] : (samples, spectra, rows, blocks)
    stacked = {
        p: np.stack(
            [
                np.stack([np.asarray(sample[s], dtype=np.float64) for s in SPECTRA])
                for sample in training[p]
            ]
        )
        for p in persons
    }

    fractions = []
    for orientation in range(2):
        gallery_rows = []
        probe_rows = []
        labels = []
        for pi, person in enumerate(persons):
            probe_idx, gallery_idx = _fold_indices(counts[person])[orientation]
            gallery_rows.append(stacked[person][gallery_idx].mean(axis=0))
            probe_rows.append(stacked[person][probe_idx])
            labels.extend([pi] * len(probe_idx))
        gallery = np.stack(gallery_rows)          # (P, S, rows, blocks)
        probes = np.concatenate(probe_rows)       # (Q, S, rows, blocks)
        labels_arr = np.array(labels)
        dist = np.empty((probes.shape[0], gallery.shape[0], NUM_FEATURES))
        for start in range(0, probes.shape[0], 32):  # chunked to bound memory
            diff = probes[start : start + 32, None] - gallery[None, :]
            dist[start : start + 32] = (
                np.einsum("qpsrb,r->qpr", diff * diff, alpha) / len(SPECTRA)
            )
        winners = np.argmin(dist, axis=1)          # (Q, rows); ties -> lowest index
        fractions.append((winners == labels_arr[:, None]).mean(axis=0))
    return (fractions[0] + fractions[1]) / 2.0


def fit_gallery(training: TrainingSamples, block_size: int) -> GalleryModel:
    """Templates plus both weight vectors, fitted on training data only."""
    templates = build_templates(training)
    alpha = fit_alpha(training)
    w = fit_w(training, alpha=alpha)
    blocks = templates[0].templates[SPECTRA[0]].shape[1]
    return GalleryModel(
        templates=tuple(templates),
        weights=ModelWeights(alpha=alpha, w=w),
        block_size=block_size,
        blocks_per_image=blocks,
    )


def _check_probe(test: Mapping[Spectrum, np.ndarray], shape: tuple) -> None:
    for s in SPECTRA:
        if s not in test:
            raise ValueError(f"probe lacks spectrum {s.value}")
        if np.asarray(test[s]).shape != shape:
            raise ValueError(
                f"probe spectrum {s.value} has shape {np.asarray(test[s]).shape}, "
                f"expected {shape}"
            )


def distance(
    test: Mapping[Spectrum, np.ndarray],
    template: PersonTemplate,
    weights: ModelWeights,
) -> float:
    """Row-weighted squared difference, averaged over the four spectra."""
    shape = template.templates[SPECTRA[0]].shape
    _check_probe(test, shape)
    coeff = (weights.w * weights.alpha)[:, None]
    total = 0.0
    for s in SPECTRA:
        diff = np.asarray(test[s], dtype=np.float64) - template.templates[s]
        total += float(np.sum(coeff * diff * diff))
    return total / len(SPECTRA)


def identify_mdc(test: Mapping[Spectrum, np.ndarray], gallery: GalleryModel) -> int:
    """Person with the minimum spectrum-averaged template distance."""
    best_id = -1
    best_dist = math.inf
    for template in gallery.templates:
        d = distance(test, template, gallery.weights)
        if d < best_dist:
            best_dist = d
            best_id = template.person_id
    return best_id


def identify_wmv(
    test: Mapping[Spectrum, np.ndarray], gallery: GalleryModel
) -> tuple[int, ScoreBoard]:
    """Weighted majority vote over feature rows in every spectrum.

    Each row votes (per spectrum) for the person whose template row is
    nearest in Euclidean distance after scaling by that row's alpha; the
    elected person collects the row's weight w.
    """
    shape = gallery.templates[0].templates[SPECTRA[0]].shape
    _check_probe(test, shape)
    alpha = gallery.weights.alpha[:, None]
    w = gallery.weights.w
    ids = gallery.person_ids

    awards: dict[int, list[float]] = {pid: [] for pid in ids}
    votes: dict[Spectrum, list[int]] = {}
    for s in SPECTRA:
        probe = np.asarray(test[s], dtype=np.float64)
        row_dists = np.stack(
            [
                np.sum((alpha * (probe - t.templates[s])) ** 2, axis=1)
                for t in gallery.templates
            ]
        )  # (P, rows); argmin ties -> first occurrence -> lowest id
        winners = np.argmin(row_dists, axis=0)
        votes[s] = [ids[j] for j in winners]
        for i, j in enumerate(winners):
            awards[ids[j]].append(float(w[i]))

    scores = {pid: math.fsum(values) for pid, values in awards.items()}
    best_id = ids[0]
    best_score = scores[best_id]
    for pid in ids[1:]:
        if scores[pid] > best_score:
            best_score = scores[pid]
            best_id = pid
    return best_id, ScoreBoard(scores=scores, votes=votes)


# ---------------------------------------------------------------------------
# Model persistence


def model_to_dict(model: GalleryModel) -> dict:
    return {
        "persons": [
            {
                "id": t.person_id,
                "templates": {s.value: t.templates[s].tolist() for s in SPECTRA},
            }
            for t in model.templates
        ],
        "alpha": model.weights.alpha.tolist(),
        "w": model.weights.w.tolist(),
        "N": model.block_size,
        "M": model.blocks_per_image,
    }


def model_from_dict(doc: dict) -> GalleryModel:
    templates = tuple(
        PersonTemplate(
            person_id=int(entry["id"]),
            templates={
                s: np.asarray(entry["templates"][s.value], dtype=np.float64)
                for s in SPECTRA
            },
        )
        for entry in doc["persons"]
    )
    weights = ModelWeights(
        alpha=np.asarray(doc["alpha"], dtype=np.float64),
        w=np.asarray(doc["w"], dtype=np.float64),
    )
    return GalleryModel(
        templates=templates,
        weights=weights,
        block_size=int(doc["N"]),
        blocks_per_image=int(doc["M"]),
    )


def save_model(model: GalleryModel, path: Path | str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh)
        fh.write("\n")


def load_model(path: Path | str) -> GalleryModel:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
