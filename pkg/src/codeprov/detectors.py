"""Base detectors whose confidence scores feed the cascade ensemble.

Built-ins are classical statistics (character n-gram perplexity, token
entropy, a stylometric logistic model); externally produced scores are
plugged in through the adapter classes. Every detector returns a
confidence in [0, 1] that the sample is AI-generated, deterministically
for a fixed trained state.
"""

from __future__ import annotations

import json
import math
import random
import re
import statistics
import subprocess
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import lexical
from .metrics import MetricsReport, confusion, metrics, require_two_class
from .records import CodeSample, DataError, Diagnostic, ProvenanceLabel
from .validation import check_non_empty, check_positive, check_unit_interval


class DetectorError(DataError):
    """A detector could not produce a score for a sample."""


class MissingScoreError(DetectorError):
    """The external score table has no entry for the requested sample."""


@dataclass(frozen=True)
class DetectorScore:
    detector_id: str
    score: float
    aux: Mapping[str, float] | None = None

    def __post_init__(self) -> None:
        if not self.detector_id:
            raise DataError("detector_id must be non-empty")
        check_unit_interval(f"score from {self.detector_id}", self.score)


class Detector(ABC):
    """Contract: ``score(sample)`` maps a code sample to an AI confidence."""

    detector_id: str

    @abstractmethod
    def score(self, sample: CodeSample) -> DetectorScore:
        ...

    def score_value(self, sample: CodeSample) -> float:
        return self.score(sample).score


def _logistic(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-min(x, 700.0)))
    return math.exp(max(x, -700.0)) / (1.0 + math.exp(max(x, -700.0)))


class ConstantDetector(Detector, BaseEstimator):
    """Scores every sample with the same constant; useful as a stub."""

    def __init__(self, value: float = 0.5, detector_id: str = "constant"):
        check_unit_interval("value", value)
        self.value = value
        self.detector_id = detector_id

    def score(self, sample: CodeSample) -> DetectorScore:
        return DetectorScore(self.detector_id, self.value)


class ExternalScoreDetector(Detector, BaseEstimator):
    """Adapter over a precomputed sample-id -> score table.

    Stands in for third-party baseline models whose scores arrive as files.
    """

    def __init__(self, scores: Mapping[str, float], detector_id: str = "external"):
        self.scores = dict(scores)
        self.detector_id = detector_id

    def score(self, sample: CodeSample) -> DetectorScore:
        try:
            value = self.scores[sample.id]
        except KeyError:
            raise MissingScoreError(
                f"detector {self.detector_id!r} has no score for sample {sample.id!r}"
            ) from None
        return DetectorScore(self.detector_id, float(value))


def load_external_scores(path: str | Path) -> tuple[dict[str, ExternalScoreDetector], list[Diagnostic]]:
    """Read a JSON Lines score file of {sample_id, detector_id, score}.

    Returns one ExternalScoreDetector per detector_id present in the file.
    """
    tables: dict[str, dict[str, float]] = {}
    diagnostics: list[Diagnostic] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                continue
            try:
                obj = json.loads(text)
                sample_id = str(obj["sample_id"])
                detector_id = str(obj["detector_id"])
                value = float(obj["score"])
                check_unit_interval("score", value)
            except (KeyError, TypeError, ValueError, DataError) as exc:
                diagnostics.append(Diagnostic(f"bad score line: {exc}", line=line_no))
                continue
            tables.setdefault(detector_id, {})[sample_id] = value
    detectors = {
        detector_id: ExternalScoreDetector(table, detector_id=detector_id)
        for detector_id, table in tables.items()
    }
    return detectors, diagnostics


class SubprocessScoreDetector(Detector, BaseEstimator):
    """Scores via a child process: one sample id per input line, one decimal
    score per output line, exit code 0."""

    def __init__(self, command: Sequence[str], detector_id: str = "subprocess"):
        self.command = list(command)
        self.detector_id = detector_id
        self._cache: dict[str, float] = {}

    def prefetch(self, samples: Iterable[CodeSample]) -> None:
        ids = [s.id for s in samples if s.id not in self._cache]
        if ids:
            self._cache.update(zip(ids, self._run(ids)))

    def _run(self, ids: Sequence[str]) -> list[float]:
        proc = subprocess.run(
            self.command, input="".join(i + "\n" for i in ids),
            capture_output=True, text=True,
        )
        if proc.returncode != 0:
            raise DetectorError(
                f"detector {self.detector_id!r} subprocess failed (exit {proc.returncode})"
            )
        lines = proc.stdout.splitlines()
        if len(lines) != len(ids):
            raise DetectorError(
                f"detector {self.detector_id!r} returned {len(lines)} scores for {len(ids)} ids"
            )
        try:
            values = [float(line) for line in lines]
        except ValueError as exc:
            raise DetectorError(f"detector {self.detector_id!r} emitted a non-decimal score: {exc}")
        for value in values:
            check_unit_interval(f"score from {self.detector_id}", value)
        return values

    def score(self, sample: CodeSample) -> DetectorScore:
        if sample.id not in self._cache:
            self._cache[sample.id] = self._run([sample.id])[0]
        return DetectorScore(self.detector_id, self._cache[sample.id])


# ---------------------------------------------------------------------------
# Character n-gram perplexity detector
# ---------------------------------------------------------------------------

_BOS = "\x00"


@dataclass
class NgramModel:
    """Character-level order-n model with add-one smoothing."""

    order: int
    counts: dict[str, dict[str, int]]
    context_totals: dict[str, int]
    vocabulary: frozenset[str]
    midpoint: float  # median calibration perplexity
    slope: float

    @property
    def vocabulary_size(self) -> int:
        return len(self.vocabulary)

    def perplexity(self, text: str) -> float:
        if not text:
            raise DataError("perplexity of empty text is undefined")
        v = len(self.vocabulary) + 1  # +1 reserves mass for unseen symbols
        padded = _BOS * (self.order - 1) + text
        log_sum = 0.0
        for i in range(self.order - 1, len(padded)):
            context = padded[i - self.order + 1 : i]
            symbol = padded[i]
            hits = self.counts.get(context)
            count = hits.get(symbol, 0) if hits else 0
            total = self.context_totals.get(context, 0)
            log_sum += math.log((count + 1) / (total + v))
        return math.exp(-log_sum / len(text))


def _calibration_slice(
    samples: Sequence[CodeSample], fraction: float, seed: int
) -> tuple[list[CodeSample], list[CodeSample]]:
    """Seeded (train, calibration) split; tiny corpora calibrate on themselves."""
    indices = list(range(len(samples)))
    random.Random(seed).shuffle(indices)
    held = max(1, round(fraction * len(samples)))
    if held >= len(samples):
        full = list(samples)
        return full, full
    calibration = [samples[i] for i in indices[:held]]
    train = [samples[i] for i in indices[held:]]
    return train, calibration


def train_ngram(
    corpus: Sequence[CodeSample],
    order: int = 4,
    seed: int = 0,
    calibration_fraction: float = 0.1,
    slope: float = 1.0,
) -> NgramModel:
    """Train the character model and calibrate its logistic midpoint.

    The midpoint is the median perplexity of a held-out seeded calibration
    slice, so samples resembling the training corpus score above 0.5.
    """
    samples = check_non_empty("corpus", corpus)
    if order < 1:
        raise DataError(f"order must be >= 1, got {order}")
    total_chars = sum(len(s.content) for s in samples)
    if total_chars < order:
        raise DataError(f"corpus has {total_chars} characters, fewer than order {order}")

    train, calibration = _calibration_slice(samples, calibration_fraction, seed)
    counts: dict[str, dict[str, int]] = {}
    totals: dict[str, int] = {}
    vocabulary: set[str] = set()
    for sample in train:
        padded = _BOS * (order - 1) + sample.content
        for i in range(order - 1, len(padded)):
            context = padded[i - order + 1 : i]
            symbol = padded[i]
            bucket = counts.setdefault(context, {})
            bucket[symbol] = bucket.get(symbol, 0) + 1
            totals[context] = totals.get(context, 0) + 1
            vocabulary.add(symbol)

    model = NgramModel(
        order=order, counts=counts, context_totals=totals,
        vocabulary=frozenset(vocabulary), midpoint=0.0, slope=slope,
    )
    perplexities = [model.perplexity(s.content) for s in calibration if s.content]
    if not perplexities:
        raise DataError("calibration slice contains no non-empty samples")
    model.midpoint = statistics.median(perplexities)
    check_positive("calibration midpoint", model.midpoint)
    return model


class NgramPerplexityDetector(Detector, BaseEstimator):
    """Scores by perplexity under a model of AI-generated code: lower
    perplexity means more AI-like, mapped through a calibrated logistic."""

    def __init__(
        self,
        order: int = 4,
        slope: float = 1.0,
        seed: int = 0,
        calibration_fraction: float = 0.1,
        detector_id: str = "ngram",
    ):
        self.order = order
        self.slope = slope
        self.seed = seed
        self.calibration_fraction = calibration_fraction
        self.detector_id = detector_id

    def fit(self, samples: Sequence[CodeSample], y=None) -> "NgramPerplexityDetector":
        self.model_ = train_ngram(
            samples, order=self.order, seed=self.seed,
            calibration_fraction=self.calibration_fraction, slope=self.slope,
        )
        return self

    def score(self, sample: CodeSample) -> DetectorScore:
        if not hasattr(self, "model_"):
            raise NotFittedError("NgramPerplexityDetector must be fit before scoring")
        if not sample.content:
            return DetectorScore(self.detector_id, 0.5, aux={"empty_content": 1.0})
        perplexity = self.model_.perplexity(sample.content)
        value = _logistic((self.model_.midpoint - perplexity) * self.model_.slope)
        return DetectorScore(self.detector_id, value, aux={"perplexity": perplexity})


# ---------------------------------------------------------------------------
# Token entropy detector
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def token_entropy(text: str) -> float:
    """Shannon entropy (bits) of the token frequency distribution."""
    tokens = _TOKEN_RE.findall(text)
    if not tokens:
        return 0.0
    freq: dict[str, int] = {}
    for token in tokens:
        freq[token] = freq.get(token, 0) + 1
    n = len(tokens)
    return -sum((c / n) * math.log2(c / n) for c in freq.values())


class TokenEntropyDetector(Detector, BaseEstimator):
    """Scores by token-distribution entropy, calibrated like the n-gram
    detector: lower entropy than the midpoint reads as AI-like."""

    def __init__(
        self,
        slope: float = 1.0,
        seed: int = 0,
        calibration_fraction: float = 0.1,
        detector_id: str = "entropy",
    ):
        self.slope = slope
        self.seed = seed
        self.calibration_fraction = calibration_fraction
        self.detector_id = detector_id

    def fit(self, samples: Sequence[CodeSample], y=None) -> "TokenEntropyDetector":
        corpus = check_non_empty("corpus", samples)
        _, calibration = _calibration_slice(corpus, self.calibration_fraction, self.seed)
        entropies = [token_entropy(s.content) for s in calibration]
        self.midpoint_ = statistics.median(entropies)
        return self

    def score(self, sample: CodeSample) -> DetectorScore:
        if not hasattr(self, "midpoint_"):
            raise NotFittedError("TokenEntropyDetector must be fit before scoring")
        if not sample.content:
            return DetectorScore(self.detector_id, 0.5, aux={"empty_content": 1.0})
        entropy = token_entropy(sample.content)
        value = _logistic((self.midpoint_ - entropy) * self.slope)
        return DetectorScore(self.detector_id, value, aux={"entropy": entropy})


# ---------------------------------------------------------------------------
# Stylometric logistic detector
# ---------------------------------------------------------------------------

_IDENTIFIER_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

STYLE_FEATURES = (
    "lcs",
    "mean_line_length",
    "std_line_length",
    "comment_ratio",
    "identifier_length_entropy",
    "blank_line_ratio",
)


def style_features(sample: CodeSample) -> np.ndarray:
    """Extract the stylometric feature vector for one sample."""
    content = sample.content
    lines = content.splitlines() or [""]
    lengths = [len(line) for line in lines]
    mean_len = sum(lengths) / len(lengths)
    std_len = math.sqrt(sum((x - mean_len) ** 2 for x in lengths) / len(lengths))
    blank_ratio = sum(1 for line in lines if not line.strip()) / len(lines)
    _, comment_chars = lexical.mask_literals(content, sample.language)
    comment_ratio = comment_chars / len(content) if content else 0.0
    ident_lengths = [len(m) for m in _IDENTIFIER_RE.findall(content)]
    if ident_lengths:
        freq: dict[int, int] = {}
        for length in ident_lengths:
            freq[length] = freq.get(length, 0) + 1
        n = len(ident_lengths)
        ident_entropy = -sum((c / n) * math.log2(c / n) for c in freq.values())
    else:
        ident_entropy = 0.0
    lcs = float(lexical.lexical_profile(content, sample.language).lcs)
    return np.array([lcs, mean_len, std_len, comment_ratio, ident_entropy, blank_ratio])


class StyleDetector(Detector, BaseEstimator):
    """Logistic regression over stylometric features, trained by full-batch
    gradient descent with a fixed epoch count and seeded initialization."""

    def __init__(
        self,
        epochs: int = 300,
        learning_rate: float = 0.5,
        seed: int = 0,
        detector_id: str = "style",
    ):
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.seed = seed
        self.detector_id = detector_id

    @classmethod
    def from_weights(
        cls, coef: Sequence[float], intercept: float = 0.0, detector_id: str = "style"
    ) -> "StyleDetector":
        detector = cls(detector_id=detector_id)
        detector.coef_ = np.asarray(coef, dtype=float)
        detector.intercept_ = float(intercept)
        detector.feature_means_ = np.zeros(len(detector.coef_))
        detector.feature_stds_ = np.ones(len(detector.coef_))
        return detector

    def fit(self, samples: Sequence[CodeSample], y: Sequence[int] | None = None) -> "StyleDetector":
        corpus = check_non_empty("corpus", samples)
        if y is None:
            targets = []
            for sample in corpus:
                if sample.label not in (ProvenanceLabel.AI, ProvenanceLabel.HUMAN):
                    raise DataError(f"sample {sample.id!r} lacks a definite label for training")
                targets.append(1.0 if sample.label is ProvenanceLabel.AI else 0.0)
        else:
            targets = [float(v) for v in y]
        matrix = np.stack([style_features(s) for s in corpus])
        labels = np.asarray(targets)

        self.feature_means_ = matrix.mean(axis=0)
        stds = matrix.std(axis=0)
        stds[stds == 0] = 1.0
        self.feature_stds_ = stds
        z = (matrix - self.feature_means_) / self.feature_stds_

        rng = np.random.RandomState(self.seed)
        weights = rng.normal(0.0, 0.01, z.shape[1])
        bias = 0.0
        n = len(corpus)
        for _ in range(self.epochs):
            preds = 1.0 / (1.0 + np.exp(-np.clip(z @ weights + bias, -700, 700)))
            error = preds - labels
            weights -= self.learning_rate * (z.T @ error) / n
            bias -= self.learning_rate * error.mean()
        self.coef_ = weights
        self.intercept_ = bias
        return self

    def score(self, sample: CodeSample) -> DetectorScore:
        if not hasattr(self, "coef_"):
            raise NotFittedError("StyleDetector must be fit before scoring")
        z = (style_features(sample) - self.feature_means_) / self.feature_stds_
        value = _logistic(float(z @ self.coef_ + self.intercept_))
        return DetectorScore(self.detector_id, value)


# ---------------------------------------------------------------------------
# Detector profiling
# ---------------------------------------------------------------------------


class DetectorGroup(str, Enum):
    HIGH_PRECISION = "high_precision"
    HIGH_RECALL = "high_recall"
    EXCLUDED = "excluded"


@dataclass(frozen=True)
class DetectorProfile:
    detector_id: str
    metrics: MetricsReport
    group: DetectorGroup


# Detectors whose F1 collapses below this floor are dropped from ensembles,
# the mechanical analogue of discarding the two worst baseline models.
EXCLUSION_F1_FLOOR = Fraction(1, 5)


def profile_detectors(
    detectors: Sequence[Detector],
    samples: Sequence[CodeSample],
    threshold: float = 0.5,
) -> dict[str, DetectorProfile]:
    """Measure each detector on a labeled profiling split and group it.

    Grouping: high-precision when precision >= recall, high-recall otherwise;
    excluded when F1 is undefined or below the exclusion floor.
    """
    corpus = check_non_empty("profiling corpus", samples)
    require_two_class(corpus)
    truth = {s.id: s.label for s in corpus}
    profiles: dict[str, DetectorProfile] = {}
    for detector in detectors:
        predicted = {
            s.id: ProvenanceLabel.AI if detector.score(s).score >= threshold else ProvenanceLabel.HUMAN
            for s in corpus
        }
        report = metrics(confusion(predicted, truth))
        if report.f1 is None or report.f1 < EXCLUSION_F1_FLOOR:
            group = DetectorGroup.EXCLUDED
        elif report.precision >= report.recall:
            group = DetectorGroup.HIGH_PRECISION
        else:
            group = DetectorGroup.HIGH_RECALL
        profiles[detector.detector_id] = DetectorProfile(detector.detector_id, report, group)
    return profiles
