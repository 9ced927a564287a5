"""Downstream evaluation: kNN classification, top-k retrieval, Procrustes
alignment error and confusion matrices.

All evaluators are pure and deterministic; distance ties are broken by
original index order.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "LabeledSplit",
    "RetrievalScore",
    "seeded_split",
    "knn_classify",
    "retrieval_topk",
    "procrustes_align",
    "procrustes_rmse",
    "confusion_matrix",
]


@dataclass
class LabeledSplit:
    """Class labels plus disjoint train/test index sets."""

    labels: np.ndarray
    train_idx: np.ndarray
    test_idx: np.ndarray

    def __post_init__(self):
        self.labels = np.asarray(self.labels)
        self.train_idx = np.asarray(self.train_idx, dtype=int)
        self.test_idx = np.asarray(self.test_idx, dtype=int)
        n = self.labels.shape[0]
        for name, idx in (("train", self.train_idx), ("test", self.test_idx)):
            if idx.size and (idx.min() < 0 or idx.max() >= n):
                raise ValueError(f"{name} indices out of range")
            if np.unique(idx).size != idx.size:
                raise ValueError(f"{name} indices contain duplicates")
        if np.intersect1d(self.train_idx, self.test_idx).size:
            raise ValueError("train and test indices overlap")


@dataclass
class RetrievalScore:
    """Per-query correct-neighbour counts and their total."""

    per_query: np.ndarray
    k: int

    def __post_init__(self):
        self.per_query = np.asarray(self.per_query, dtype=int)

    @property
    def total(self) -> int:
        return int(self.per_query.sum())


def seeded_split(labels, train_fraction=0.5, seed=0) -> LabeledSplit:
    """Stratified random split with at least one training item per class."""
    labels = np.asarray(labels)
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    train = []
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        k = max(1, int(round(train_fraction * members.size)))
        train.append(rng.choice(members, size=min(k, members.size), replace=False))
    train_idx = np.sort(np.concatenate(train))
    test_idx = np.setdiff1d(np.arange(labels.shape[0]), train_idx)
    return LabeledSplit(labels, train_idx, test_idx)


def _pairwise_sq_dists(rows):
    sq = np.sum(rows * rows, axis=1)
    d = sq[:, None] + sq[None, :] - 2.0 * rows @ rows.T
    return np.maximum(d, 0.0)


def knn_classify(split: LabeledSplit, features=None, distances=None, k=1):
    """k-nearest-neighbour vote over the training set.

    Give either ``features`` (rows = instances) or a full ``distances``
    matrix.  Vote ties go to the class with the smallest total distance
    among the k neighbours, then to the smallest class id.  Returns
    ``(predictions, accuracy)`` over the test indices.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if (features is None) == (distances is None):
        raise ValueError("give exactly one of features or distances")
    if split.train_idx.size == 0:
        raise ValueError("empty training set")
    if features is not None:
        features = np.asarray(features, dtype=float)
        dist = _pairwise_sq_dists(features)
    else:
        dist = np.asarray(distances, dtype=float)
    labels = split.labels
    kk = min(k, split.train_idx.size)
    preds = np.empty(split.test_idx.size, dtype=labels.dtype)
    for t, i in enumerate(split.test_idx):
        cand = dist[i, split.train_idx]
        order = np.argsort(cand, kind="stable")[:kk]
        nn_labels = labels[split.train_idx[order]]
        nn_dists = cand[order]
        classes, votes = np.unique(nn_labels, return_counts=True)
        best = classes[votes == votes.max()]
        if best.size > 1:
            totals = [nn_dists[nn_labels == c].sum() for c in best]
            best = best[np.flatnonzero(totals == np.min(totals))]
        preds[t] = np.min(best)
    accuracy = float(np.mean(preds == labels[split.test_idx]))
    return preds, accuracy


def retrieval_topk(labels, distances=None, configuration=None, k=10) -> RetrievalScore:
    """Count same-class items among each query's k nearest (self excluded)."""
    labels = np.asarray(labels)
    n = labels.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"k={k} out of range for N={n}")
    if (distances is None) == (configuration is None):
        raise ValueError("give exactly one of distances or configuration")
    if configuration is not None:
        dist = _pairwise_sq_dists(np.asarray(configuration, dtype=float))
    else:
        dist = np.asarray(distances, dtype=float).copy()
    np.fill_diagonal(dist, np.inf)
    counts = np.empty(n, dtype=int)
    for i in range(n):
        top = np.argsort(dist[i], kind="stable")[:k]
        counts[i] = int(np.sum(labels[top] == labels[i]))
    return RetrievalScore(per_query=counts, k=k)


def procrustes_align(estimate, reference):
    """Best orthogonal-plus-translation map of ``estimate`` onto ``reference``.

    Reflections are allowed and there is no scaling.  Returns the aligned
    copy of ``estimate``.
    """
    est = np.asarray(estimate, dtype=float)
    ref = np.asarray(reference, dtype=float)
    if est.shape != ref.shape:
        raise ValueError(f"shape mismatch: {est.shape} vs {ref.shape}")
    ref_c = ref - ref.mean(axis=0)
    if not np.any(ref_c):
        raise ValueError("degenerate reference: all points identical")
    est_c = est - est.mean(axis=0)
    u, _, vt = np.linalg.svd(est_c.T @ ref_c)
    rot = u @ vt
    return est_c @ rot + ref.mean(axis=0)


def procrustes_rmse(estimate, reference, subset=None) -> float:
    """RMSE over ``subset`` rows after aligning on all rows."""
    aligned = procrustes_align(estimate, reference)
    ref = np.asarray(reference, dtype=float)
    err = aligned - ref
    if subset is not None:
        err = err[np.asarray(subset, dtype=int)]
    return float(np.sqrt(np.mean(np.sum(err * err, axis=1))))


def confusion_matrix(predictions, labels):
    """Counts with rows = true class, columns = predicted class.

    Classes are the sorted unique true labels; predictions outside that set
    are rejected.  Returns ``(classes, matrix)``.
    """
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape:
        raise ValueError("predictions and labels differ in length")
    classes = np.unique(labels)
    index = {c: i for i, c in enumerate(classes)}
    mat = np.zeros((classes.size, classes.size), dtype=int)
    for pred, true in zip(predictions, labels):
        if pred not in index:
            raise ValueError(f"prediction {pred!r} is not a known class")
        mat[index[true], index[pred]] += 1
    return classes, mat
