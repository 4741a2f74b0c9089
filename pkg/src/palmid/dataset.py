"""Multispectral palm image datasets: on-disk layout, loading, synthesis.

A dataset is a directory with a ``manifest.json`` and one binary PGM
(P5, maxval 255) file per image. The manifest schema:

    {
      "persons": int,
      "samples_per_person": int,
      "records": [
        {"person": int, "sample": int, "spectrum": "R"|"G"|"B"|"NIR",
         "path": "relative/file.pgm"},
        ...
      ]
    }

Every (person, sample) pair must appear with all four spectra, exactly
once each: the four spectral images of a sample are captures of the same
scene under different illumination.

The synthetic generator stands in for real acquisitions: each person
gets a reproducible base texture (a ridged background crossed by a few
dark principal lines), each sample perturbs it with sensor noise, a
small translation and a contrast jitter, and each spectrum applies a
fixed monotone tone curve.
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

__all__ = [
    "Spectrum",
    "SPECTRA",
    "SampleRecord",
    "DatasetManifest",
    "ManifestError",
    "ManifestParseError",
    "IncompleteSpectraError",
    "DuplicateRecordError",
    "PgmFormatError",
    "load_manifest",
    "save_manifest",
    "load_image",
    "save_image",
    "generate_bases",
    "generate_synthetic",
]


class Spectrum(enum.Enum):
    """Illumination channel of a capture."""

    RED = "R"
    GREEN = "G"
    BLUE = "B"
    NIR = "NIR"


SPECTRA = tuple(Spectrum)

# Tone-curve exponents per spectrum, applied as 255 * (x / 255) ** gamma.
SPECTRUM_GAMMA = {
    Spectrum.RED: 0.8,
    Spectrum.GREEN: 1.0,
    Spectrum.BLUE: 1.2,
    Spectrum.NIR: 1.4,
}


class ManifestError(ValueError):
    """Structurally invalid manifest."""


class ManifestParseError(ManifestError):
    """Manifest file is not valid JSON or misses required fields."""


class IncompleteSpectraError(ManifestError):
    """Some (person, sample) pair lacks one or more spectra."""


class DuplicateRecordError(ManifestError):
    """The same (person, sample, spectrum) key appears twice."""


class PgmFormatError(ValueError):
    """Image file is not a binary PGM we can read."""


@dataclass(frozen=True)
class SampleRecord:
    person: int
    sample: int
    spectrum: Spectrum
    path: str


@dataclass
class DatasetManifest:
    persons: int
    samples_per_person: int
    records: list[SampleRecord]
    root: Path = field(default_factory=Path)

    def __post_init__(self):
        self.root = Path(self.root)
        self._validate()
        self._index = {
            (r.person, r.sample, r.spectrum): r.path for r in self.records
        }

    def _validate(self) -> None:
        expected = self.persons * self.samples_per_person * len(SPECTRA)
        if len(self.records) != expected:
            raise ManifestError(
                f"expected {expected} records "
                f"({self.persons} persons x {self.samples_per_person} samples "
                f"x {len(SPECTRA)} spectra), found {len(self.records)}"
            )
        seen = set()
        for r in self.records:
            key = (r.person, r.sample, r.spectrum)
            if key in seen:
                raise DuplicateRecordError(f"duplicate record for {key}")
            seen.add(key)
        for r in self.records:
            for s in SPECTRA:
                if (r.person, r.sample, s) not in seen:
                    raise IncompleteSpectraError(
                        f"person {r.person} sample {r.sample} lacks spectrum {s.value}"
                    )

    @property
    def person_ids(self) -> list[int]:
        return sorted({r.person for r in self.records})

    def image_path(self, person: int, sample: int, spectrum: Spectrum) -> Path:
        return self.root / self._index[(person, sample, spectrum)]


def _manifest_to_dict(manifest: DatasetManifest) -> dict:
    return {
        "persons": manifest.persons,
        "samples_per_person": manifest.samples_per_person,
        "records": [
            {
                "person": r.person,
                "sample": r.sample,
                "spectrum": r.spectrum.value,
                "path": r.path,
            }
            for r in manifest.records
        ],
    }


def save_manifest(manifest: DatasetManifest, path: Path | str) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_manifest_to_dict(manifest), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_manifest(path: Path | str) -> DatasetManifest:
    """Read and fully validate a manifest; raises on the first defect."""
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    with open(path, "rb") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ManifestParseError(f"{path}: {exc}") from exc
    try:
        records = [
            SampleRecord(
                person=int(r["person"]),
                sample=int(r["sample"]),
                spectrum=Spectrum(r["spectrum"]),
                path=str(r["path"]),
            )
            for r in doc["records"]
        ]
        persons = int(doc["persons"])
        samples_per_person = int(doc["samples_per_person"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestParseError(f"{path}: malformed manifest: {exc}") from exc
    return DatasetManifest(
        persons=persons,
        samples_per_person=samples_per_person,
        records=records,
        root=path.parent,
    )


# ---------------------------------------------------------------------------
# PGM (P5) reader / writer


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        if data[pos : pos + 1].isspace():
            pos += 1
        elif data[pos : pos + 1] == b"#":
            while pos < n and data[pos] not in (0x0A, 0x0D):
                pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise PgmFormatError("truncated header")
    return data[start:pos], pos


def load_image(path: Path | str) -> np.ndarray:
    """Read a binary PGM file into an (H, W) uint8 array."""
    data = Path(path).read_bytes()
    magic, pos = _next_token(data, 0)
    if magic != b"P5":
        raise PgmFormatError(f"{path}: unsupported format {magic!r}, expected binary P5")
    fields = []
    for _ in range(3):
        token, pos = _next_token(data, pos)
        try:
            fields.append(int(token))
        except ValueError as exc:
            raise PgmFormatError(f"{path}: bad header token {token!r}") from exc
    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise PgmFormatError(f"{path}: bad dimensions {width}x{height}")
    if maxval != 255:
        raise PgmFormatError(f"{path}: maxval {maxval} unsupported, expected 255")
    pos += 1  # single whitespace byte after maxval
    payload = data[pos : pos + width * height]
    if len(payload) < width * height:
        raise PgmFormatError(
            f"{path}: truncated payload, {len(payload)} of {width * height} bytes"
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width)


def save_image(path: Path | str, image: np.ndarray) -> None:
    """Write an (H, W) uint8 array as binary PGM."""
    arr = np.ascontiguousarray(image, dtype=np.uint8)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {arr.shape}")
    height, width = arr.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (width, height))
        fh.write(arr.tobytes())


# ---------------------------------------------------------------------------
# Synthetic generator

IMAGE_SIDE = 128
_BACKGROUND = 200.0
_RIDGE_AMPLITUDE = 12.0
_LINE_DEPTH = (60.0, 100.0)
_LINE_WIDTH = (2.0, 4.0)
_CURVE_SAMPLES = 300
# Any two identities must differ in >= MIN_DIFF_FRACTION of pixels by
# >= MIN_DIFF_LEVELS gray levels; bases failing this are redrawn.
MIN_DIFF_LEVELS = 20
MIN_DIFF_FRACTION = 0.10
_MAX_BASE_ATTEMPTS = 25


def _principal_line(rng: np.random.Generator, yy: np.ndarray, xx: np.ndarray) -> np.ndarray:
    """Depth map of one smooth dark curve crossing the image."""
    side = IMAGE_SIDE
    if rng.random() < 0.5:  # left edge to right edge
        p0 = np.array([rng.uniform(0, side), 0.0])
        p2 = np.array([rng.uniform(0, side), float(side)])
    else:  # top edge to bottom edge
        p0 = np.array([0.0, rng.uniform(0, side)])
        p2 = np.array([float(side), rng.uniform(0, side)])
    p1 = (p0 + p2) / 2.0 + rng.uniform(-40.0, 40.0, size=2)
    t = np.linspace(0.0, 1.0, _CURVE_SAMPLES)[:, None]
    pts = (1 - t) ** 2 * p0 + 2 * t * (1 - t) * p1 + t**2 * p2  # quadratic Bezier
    dy = yy.ravel()[:, None] - pts[None, :, 0]
    dx = xx.ravel()[:, None] - pts[None, :, 1]
    dist_sq = np.min(dy * dy + dx * dx, axis=1).reshape(side, side)
    depth = rng.uniform(*_LINE_DEPTH)
    width = rng.uniform(*_LINE_WIDTH)
    return depth * np.exp(-dist_sq / (2.0 * width * width))


def _draw_base(rng: np.random.Generator) -> np.ndarray:
    side = IMAGE_SIDE
    yy, xx = np.mgrid[0:side, 0:side].astype(np.float64)
    theta = rng.uniform(0.0, np.pi)
    wavelength = rng.uniform(6.0, 12.0)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    ridges = _RIDGE_AMPLITUDE * np.sin(
        2.0 * np.pi / wavelength * (xx * np.cos(theta) + yy * np.sin(theta)) + phase
    )
    img = _BACKGROUND + ridges
    for _ in range(int(rng.integers(3, 6))):  # 3 to 5 principal lines
        img = img - _principal_line(rng, yy, xx)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def _separated(a: np.ndarray, b: np.ndarray) -> bool:
    diff = np.abs(a.astype(np.int16) - b.astype(np.int16))
    return float(np.mean(diff >= MIN_DIFF_LEVELS)) >= MIN_DIFF_FRACTION


def generate_bases(persons: int, seed: int) -> list[np.ndarray]:
    """Deterministic per-person identity textures, pairwise well separated.

    A freshly drawn base that is too close to any earlier one is redrawn
    from the same per-person stream, so the result is still a pure
    function of (persons, seed).
    """
    seeds = np.random.SeedSequence(seed).spawn(persons)
    bases: list[np.ndarray] = []
    for p in range(persons):
        rng = np.random.default_rng(seeds[p])
        for attempt in range(_MAX_BASE_ATTEMPTS):
            base = _draw_base(rng)
            if all(_separated(base, other) for other in bases):
                break
            log.debug("person %d base attempt %d too close, redrawing", p, attempt)
        else:
            raise RuntimeError(f"could not draw a distinct base for person {p}")
        bases.append(base)
    return bases


def _tone_curve(img: np.ndarray, gamma: float) -> np.ndarray:
    scaled = np.clip(img, 0.0, 255.0) / 255.0
    return np.clip(np.rint(255.0 * np.power(scaled, gamma)), 0, 255).astype(np.uint8)


def generate_synthetic(
    persons: int,
    samples: int,
    seed: int,
    out_dir: Path | str,
    *,
    noise_sigma: float = 6.0,
    max_shift: int = 2,
    contrast_jitter: float = 0.03,
) -> DatasetManifest:
    """Write a synthetic multispectral dataset and its manifest.

    Per sample: Gaussian sensor noise (sigma in gray levels), a uniform
    translation of at most ``max_shift`` pixels per axis (applied
    circularly), and a contrast scaling of at most ``contrast_jitter``
    around mid-gray, shared by all four spectra; then one file per
    spectrum through its tone curve. Identical arguments reproduce the
    output byte for byte.
    """
    if persons < 2:
        raise ValueError("persons must be >= 2")
    if samples < 2:
        raise ValueError("samples must be >= 2")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    bases = generate_bases(persons, seed)
    sample_seeds = np.random.SeedSequence(entropy=seed, spawn_key=(1,)).spawn(persons)
    records: list[SampleRecord] = []
    for p in range(persons):
        person_dir = out_dir / f"p{p:04d}"
        person_dir.mkdir(exist_ok=True)
        rng = np.random.default_rng(sample_seeds[p])
        base = bases[p].astype(np.float64)
        for i in range(samples):
            img = base + rng.normal(0.0, noise_sigma, base.shape)
            dy, dx = rng.integers(-max_shift, max_shift + 1, size=2)
            img = np.roll(img, (dy, dx), axis=(0, 1))
            gain = 1.0 + rng.uniform(-contrast_jitter, contrast_jitter)
            img = 127.5 + gain * (img - 127.5)
            for spectrum in SPECTRA:
                rel = f"p{p:04d}/s{i:02d}_{spectrum.value}.pgm"
                save_image(out_dir / rel, _tone_curve(img, SPECTRUM_GAMMA[spectrum]))
                records.append(
                    SampleRecord(person=p, sample=i, spectrum=spectrum, path=rel)
                )
    manifest = DatasetManifest(
        persons=persons, samples_per_person=samples, records=records, root=out_dir
    )
    save_manifest(manifest, out_dir / "manifest.json")
    return manifest
