"""Projection onto a discriminant space, classifiers, and evaluation.

Classification projects a raw vector through the model's optional whitening
map onto the discriminant basis, optionally normalizes the projection to
unit length, and compares it against per-class reference points, either by
squared Euclidean distance or by signed cosine.  The two rules coincide
when projections and references are both normalized.
"""

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import UndefinedDirectionError, ValidationError
from .fisher import DiscriminantModel

NEAREST_MEAN = "nearest-mean"
COSINE = "cosine"
RULES = (NEAREST_MEAN, COSINE)

# How pooled verification scores are turned into an equal error rate; kept in
# every report so downstream consumers know the protocol.
EER_PROTOCOL = (
    "one genuine score per test sample (its true class) and C-1 impostor "
    "scores (every other class), pooled globally; false-accept picks "
    "impostors strictly above the threshold, false-reject genuines strictly "
    "below; the crossing is located by linear interpolation between "
    "adjacent score thresholds"
)


@dataclass(frozen=True)
class ProjectedPoint:
    """Coordinates of a sample in the discriminant space."""

    coords: np.ndarray
    normalized: bool


def project(model: DiscriminantModel, x, normalize: Optional[bool] = None) -> ProjectedPoint:
    """Project a raw vector onto the model's discriminant space.

    The vector is first mapped through the whitening map when the model has
    one.  With normalize (defaulting to the model's own flag) the projection
    is scaled to unit length; a numerically zero projection then has no
    direction and raises UndefinedDirectionError.
    """
    if normalize is None:
        normalize = model.normalized
    x = np.asarray(x, dtype=float).ravel()
    w = x if model.whitening_map is None else model.whitening_map @ x
    t = model.basis.T @ w
    if normalize:
        norm = np.linalg.norm(t)
        if norm <= 1e-12 * max(np.linalg.norm(w), 1e-300):
            raise UndefinedDirectionError(
                "projection is numerically zero; cannot normalize")
        t = t / norm
    return ProjectedPoint(coords=t, normalized=bool(normalize))


def _reference_points(model: DiscriminantModel) -> np.ndarray:
    refs = model.class_refs
    if model.normalized:
        norms = np.linalg.norm(refs, axis=1, keepdims=True)
        if np.any(norms <= 0):
            raise UndefinedDirectionError("a class reference projects to zero")
        refs = refs / norms
    return refs


def _scores(model: DiscriminantModel, x, rule: str) -> np.ndarray:
    """Per-class affinity scores for one sample; larger is better."""
    if rule == NEAREST_MEAN:
        t = project(model, x).coords
        d = _reference_points(model) - t
        return -np.sum(d * d, axis=1)
    if rule == COSINE:
        t = project(model, x, normalize=True).coords
        refs = model.class_refs
        rnorms = np.linalg.norm(refs, axis=1)
        if np.any(rnorms <= 0):
            raise UndefinedDirectionError("a class reference projects to zero")
        return refs @ t / rnorms
    raise ValidationError(f"unknown rule {rule!r}; pick one of {RULES}")


def _best_label(labels, scores):
    # ties resolved toward the smallest label for determinism
    top = np.max(scores)
    winners = [lab for lab, s in zip(labels, scores) if s == top]
    return min(winners)


def classify_nearest_mean(model: DiscriminantModel, x):
    """Label of the reference point closest in squared L2 distance."""
    scores = _scores(model, x, NEAREST_MEAN)
    return _best_label(model.class_labels, scores)


def classify_cosine(model: DiscriminantModel, x):
    """Label of the reference point with the largest signed cosine (plain
    cosine rather than its square, so angles past 90 degrees count against)."""
    scores = _scores(model, x, COSINE)
    return _best_label(model.class_labels, scores)


def equal_error_rate(genuine, impostor) -> float:
    """Equal error rate, in percent, of pooled verification scores.

    Thresholds walk the sorted scores (plus sentinels outside the range);
    the false-accept rate P(impostor > t) falls while the false-reject rate
    P(genuine < t) rises, and their crossing is located by linear
    interpolation between the two adjacent thresholds where the difference
    changes sign.
    """
    genuine = np.sort(np.asarray(genuine, dtype=float).ravel())
    impostor = np.sort(np.asarray(impostor, dtype=float).ravel())
    if genuine.size == 0 or impostor.size == 0:
        raise ValidationError("need both genuine and impostor scores")
    knots = np.unique(np.concatenate([genuine, impostor]))
    knots = np.concatenate([[knots[0] - 1.0], knots, [knots[-1] + 1.0]])
    far = 1.0 - np.searchsorted(impostor, knots, side="right") / impostor.size
    frr = np.searchsorted(genuine, knots, side="left") / genuine.size
    diff = far - frr  # nonincreasing, starts at +1, ends at -1
    k = int(np.argmax(diff <= 0.0))
    if diff[k] == 0.0:
        return 100.0 * float(far[k])
    s = diff[k - 1] / (diff[k - 1] - diff[k])
    eer = far[k - 1] + s * (far[k] - far[k - 1])
    return 100.0 * float(eer)


@dataclass(frozen=True)
class EvalReport:
    """Recognition and verification metrics over one labeled test set.

    recognition_rate and eer are percentages; eer is None when the test set
    contains a single class (no impostor scores exist).  confusion maps
    (true label, predicted label) to a count; the counts sum to n_test.
    """

    recognition_rate: float
    eer: Optional[float]
    confusion: dict
    genuine_scores: np.ndarray
    impostor_scores: np.ndarray
    n_test: int
    rule: str
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "recognition_rate": self.recognition_rate,
            "eer": self.eer,
            "confusion": {f"{t}->{p}": c for (t, p), c in sorted(
                self.confusion.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1])))},
            "n_test": self.n_test,
            "rule": self.rule,
            "metadata": self.metadata,
        }


def evaluate(model: DiscriminantModel, X, y, rule: str = NEAREST_MEAN) -> EvalReport:
    """Classify a labeled test set and report recognition rate and EER.

    Every sample contributes one genuine score (against its true class) and
    C - 1 impostor scores.  Scores are negative squared distances under the
    nearest-mean rule and signed cosines under the cosine rule.
    """
    X = np.asarray(X, dtype=float)
    y = list(y)
    if X.shape[0] == 0 or X.shape[0] != len(y):
        raise ValidationError("test set is empty or labels do not align")
    unknown = sorted({str(lab) for lab in y
                      if lab not in model.class_labels})
    if unknown:
        raise ValidationError(f"test labels not in the model: {unknown}")

    label_pos = {lab: i for i, lab in enumerate(model.class_labels)}
    correct = 0
    confusion: dict = {}
    genuine, impostor = [], []
    for x, true in zip(X, y):
        scores = _scores(model, x, rule)
        pred = _best_label(model.class_labels, scores)
        if pred == true:
            correct += 1
        confusion[(true, pred)] = confusion.get((true, pred), 0) + 1
        i = label_pos[true]
        genuine.append(scores[i])
        impostor.extend(np.delete(scores, i))

    if len(set(y)) < 2:
        warnings.warn("single-class test set: EER is undefined",
                      RuntimeWarning, stacklevel=2)
        eer = None
    else:
        eer = equal_error_rate(genuine, impostor)
    return EvalReport(
        recognition_rate=100.0 * correct / X.shape[0],
        eer=eer,
        confusion=confusion,
        genuine_scores=np.asarray(genuine),
        impostor_scores=np.asarray(impostor),
        n_test=X.shape[0],
        rule=rule,
        metadata={"eer_protocol": EER_PROTOCOL, "method": model.method},
    )
