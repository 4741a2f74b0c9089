"""Identification experiments: seeded splits, repeated trials, reporting.

For every trial, each person's sample indices are shuffled with the
self-contained generator from :mod:`palmid.rng` (stream seeded from the
experiment seed, the train count, the trial index and the person id, so
every trial and every train ratio draws an independent but replayable
shuffle). The first ``train_per_person`` samples enroll, the rest probe;
the four spectra of a sample always stay on the same side. Weights and
templates are refitted from scratch each trial.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import classify
from .dataset import SPECTRA, DatasetManifest, Spectrum, load_image
from .features import DEFAULT_BLOCK, extract_feature_matrix
from .rng import SplitMix64, seed_from

__all__ = [
    "SplitConfig",
    "ClassifierResult",
    "EvalReport",
    "REFERENCE_ACCURACY",
    "split",
    "extract_features",
    "run_experiment",
    "render_report",
]

# Rank-1 accuracies (percent) reported for this pipeline on the full
# PolyU multispectral gallery (500 subjects x 12 samples), by train
# count out of 12, as (minimum distance, majority voting). That corpus
# is license-restricted, so these are reference points only; nothing in
# this repository asserts against them.
REFERENCE_ACCURACY = {
    3: (97.42, 99.95),
    4: (99.72, 99.99),
    5: (99.51, 99.99),
    6: (100.0, 99.99),
}

FeatureStore = Mapping[tuple[int, int, Spectrum], np.ndarray]


@dataclass(frozen=True)
class SplitConfig:
    train_per_person: int
    trials: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if self.train_per_person < 2:
            raise ValueError("train_per_person must be >= 2")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class ClassifierResult:
    per_trial_accuracy: list[float]
    per_trial_misidentified: list[int]
    per_query_seconds: float

    @property
    def mean_accuracy(self) -> float:
        return sum(self.per_trial_accuracy) / len(self.per_trial_accuracy)

    @property
    def misidentified(self) -> int:
        return sum(self.per_trial_misidentified)

    def to_dict(self) -> dict:
        return {
            "per_trial_accuracy": self.per_trial_accuracy,
            "per_trial_misidentified": self.per_trial_misidentified,
            "mean_accuracy": self.mean_accuracy,
            "misidentified": self.misidentified,
        }


@dataclass(frozen=True)
class EvalReport:
    config: SplitConfig
    persons: int
    samples_per_person: int
    probes_per_trial: int
    mdc: ClassifierResult
    wmv: ClassifierResult

    def to_dict(self) -> dict:
        """JSON form; wall-clock numbers are isolated under "timing"."""
        return {
            "train_per_person": self.config.train_per_person,
            "trials": self.config.trials,
            "rng_seed": self.config.rng_seed,
            "persons": self.persons,
            "samples_per_person": self.samples_per_person,
            "probes_per_trial": self.probes_per_trial,
            "mdc": self.mdc.to_dict(),
            "wmv": self.wmv.to_dict(),
            "timing": {
                "mdc_per_query_s": self.mdc.per_query_seconds,
                "wmv_per_query_s": self.wmv.per_query_seconds,
            },
        }


def split(
    manifest: DatasetManifest, config: SplitConfig, trial: int
) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """Per-person shuffled train/test partition of (person, sample) pairs.

    Deterministic in (rng_seed, train_per_person, trial, person); train
    and test are disjoint and jointly cover every sample.
    """
    spp = manifest.samples_per_person
    if config.train_per_person >= spp:
        raise ValueError(
            f"train_per_person {config.train_per_person} must leave test data "
            f"(samples per person: {spp})"
        )
    train: list[tuple[int, int]] = []
    test: list[tuple[int, int]] = []
    for person in manifest.person_ids:
        indices = list(range(spp))
        rng = SplitMix64(
            seed_from(config.rng_seed, config.train_per_person, trial, person)
        )
        rng.shuffle(indices)
        train.extend((person, i) for i in indices[: config.train_per_person])
        test.extend((person, i) for i in indices[config.train_per_person :])
    return train, test


def extract_features(
    manifest: DatasetManifest, block: int = DEFAULT_BLOCK
) -> dict[tuple[int, int, Spectrum], np.ndarray]:
    """Feature matrices for every image in the manifest, keyed by
    (person, sample, spectrum). Extraction is per-image and
    label-independent, so one pass serves all trials and ratios."""
    return {
        (r.person, r.sample, r.spectrum): extract_feature_matrix(
            load_image(manifest.root / r.path), block
        )
        for r in manifest.records
    }


def _gather(
    features: FeatureStore, pairs: list[tuple[int, int]]
) -> dict[int, list[dict[Spectrum, np.ndarray]]]:
    grouped: dict[int, list[dict[Spectrum, np.ndarray]]] = {}
    for person, sample in pairs:
        grouped.setdefault(person, []).append(
            {s: features[(person, sample, s)] for s in SPECTRA}
        )
    return grouped


def run_experiment(
    manifest: DatasetManifest,
    config: SplitConfig,
    block: int = DEFAULT_BLOCK,
    features: FeatureStore | None = None,
) -> EvalReport:
    """Full protocol for one train ratio: split, fit, identify, tally.

    Fitting only ever sees the train partition. Pass a precomputed
    ``features`` store to share extraction across ratios.
    """
    if features is None:
        features = extract_features(manifest, block)
    mdc_acc: list[float] = []
    wmv_acc: list[float] = []
    mdc_miss: list[int] = []
    wmv_miss: list[int] = []
    mdc_time = 0.0
    wmv_time = 0.0
    probes_per_trial = 0
    for trial in range(config.trials):
        train_pairs, test_pairs = split(manifest, config, trial)
        gallery = classify.fit_gallery(_gather(features, train_pairs), block)
        probes_per_trial = len(test_pairs)
        mdc_correct = 0
        wmv_correct = 0
        for person, sample in test_pairs:
            probe = {s: features[(person, sample, s)] for s in SPECTRA}
            t0 = time.perf_counter()
            mdc_pred = classify.identify_mdc(probe, gallery)
            t1 = time.perf_counter()
            wmv_pred, _ = classify.identify_wmv(probe, gallery)
            t2 = time.perf_counter()
            mdc_time += t1 - t0
            wmv_time += t2 - t1
            mdc_correct += mdc_pred == person
            wmv_correct += wmv_pred == person
        mdc_acc.append(mdc_correct / len(test_pairs))
        wmv_acc.append(wmv_correct / len(test_pairs))
        mdc_miss.append(len(test_pairs) - mdc_correct)
        wmv_miss.append(len(test_pairs) - wmv_correct)
    total = probes_per_trial * config.trials
    return EvalReport(
        config=config,
        persons=manifest.persons,
        samples_per_person=manifest.samples_per_person,
        probes_per_trial=probes_per_trial,
        mdc=ClassifierResult(mdc_acc, mdc_miss, mdc_time / total),
        wmv=ClassifierResult(wmv_acc, wmv_miss, wmv_time / total),
    )


def render_report(reports: list[EvalReport]) -> str:
    """Fixed-width accuracy table, one row per train ratio."""
    header = (
        f"{'train/total':>12} {'MDC accuracy':>14} {'WMV accuracy':>14} "
        f"{'MDC ms/query':>14} {'WMV ms/query':>14}"
    )
    lines = [header, "-" * len(header)]
    for report in reports:
        ratio = f"{report.config.train_per_person}/{report.samples_per_person}"
        lines.append(
            f"{ratio:>12} {100.0 * report.mdc.mean_accuracy:>13.2f}% "
            f"{100.0 * report.wmv.mean_accuracy:>13.2f}% "
            f"{1e3 * report.mdc.per_query_seconds:>14.3f} "
            f"{1e3 * report.wmv.per_query_seconds:>14.3f}"
        )
    return "\n".join(lines)
