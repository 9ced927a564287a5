"""Deterministic synthetic-data generators.

Everything here is a pure function of its parameters and a seed: planted
low-rank multi-view instances for recovery oracles, the salt-and-pepper
corruption protocols used by the noise experiments, a 25-point 2-D
reconstruction instance with complementary per-view distance corruption,
and class-structured stand-ins for the labeled feature / retrieval-fusion
experiments.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .embedding import DissimilarityViews
from .features import MultiViewFeatureSet

__all__ = [
    "NoiseSpec",
    "gen_planted_multiview",
    "corrupt_instances",
    "corrupt_pixels",
    "gen_point_set_views",
    "gen_cluster_retrieval_views",
    "gen_labeled_multiview",
]

_NOISE_KINDS = ("instance_replacement", "pixel_replacement", "distance_salt_pepper")


@dataclass
class NoiseSpec:
    """What to corrupt and how strongly.

    ``fraction`` selects a random affected subset; ``indices`` pins it
    explicitly (exactly one of the two).  ``magnitude`` scales the
    salt/pepper amplitude around the clean mean (1.0 reproduces the clean
    min/max exactly); for distance noise it is the additive amplitude.
    """

    kind: str
    fraction: float = None
    indices: tuple = None
    magnitude: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in _NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if (self.fraction is None) == (self.indices is None):
            raise ValueError("give exactly one of fraction or indices")
        if self.fraction is not None and not 0.0 <= self.fraction <= 1.0:
            raise ValueError("fraction must be in [0, 1]")
        if self.magnitude < 0:
            raise ValueError("magnitude must be >= 0")
        if self.indices is not None:
            self.indices = tuple(int(i) for i in self.indices)


def _pick_indices(spec, total, rng, what):
    if spec.indices is not None:
        idx = np.asarray(spec.indices, dtype=int)
        if idx.size and (idx.min() < 0 or idx.max() >= total):
            raise ValueError(f"{what} indices out of range")
        return idx
    count = int(round(spec.fraction * total))
    if spec.fraction > 0 and count == 0:
        warnings.warn(f"fraction {spec.fraction} selects zero {what}", stacklevel=3)
    return rng.choice(total, size=count, replace=False)


def _salt_pepper_levels(clean, magnitude):
    # Two-level replacement values whose min/max equal the clean extremes
    # (scaled by `magnitude` around the clean mean) and whose expected value
    # equals the clean mean regardless of magnitude.
    lo, hi, mean = float(clean.min()), float(clean.max()), float(clean.mean())
    if hi == lo:
        raise ValueError("clean data is constant; salt-and-pepper levels undefined")
    p_salt = (mean - lo) / (hi - lo)
    salt = mean + magnitude * (hi - mean)
    pepper = mean + magnitude * (lo - mean)
    return pepper, salt, p_salt


def gen_planted_multiview(n_views, n_instances, latent_dim, view_dims, seed=0):
    """Exactly low-rank multi-view data z_v = W*_v @ X*.

    Returns ``(feature_set, true_maps, true_latents)``.  Requires
    ``latent_dim < n_instances`` and ``latent_dim <= min(view_dims)`` so the
    planted model is identifiable in recovery tests.
    """
    if len(view_dims) != n_views:
        raise ValueError("view_dims must have one entry per view")
    if latent_dim >= n_instances:
        raise ValueError(
            f"latent_dim must be < n_instances ({latent_dim} >= {n_instances})"
        )
    if latent_dim > min(view_dims):
        raise ValueError("latent_dim must not exceed any view dimension")
    rng = np.random.default_rng(seed)
    x_true = rng.standard_normal((latent_dim, n_instances))
    w_true = [
        rng.standard_normal((dv, latent_dim)) / np.sqrt(latent_dim) for dv in view_dims
    ]
    fs = MultiViewFeatureSet([w @ x_true for w in w_true])
    return fs, w_true, x_true


def corrupt_instances(fs, view_index, spec: NoiseSpec):
    """Replace whole columns of one view with moment-matched salt and pepper.

    Levels are the clean columns' global min/max and the salt probability is
    chosen so the expected value matches the clean mean; other views are
    untouched.  Returns ``(corrupted_set, affected_indices)``.
    """
    if spec.kind != "instance_replacement":
        raise ValueError(f"expected instance_replacement, got {spec.kind!r}")
    if not 0 <= view_index < fs.n_views:
        raise ValueError(f"view index {view_index} out of range")
    rng = np.random.default_rng(spec.seed)
    n = fs.n_instances
    idx = _pick_indices(spec, n, rng, "instances")
    views = [z.copy() for z in fs.views]
    if idx.size:
        z = views[view_index]
        clean_mask = np.ones(n, dtype=bool)
        clean_mask[idx] = False
        clean = z[:, clean_mask] if clean_mask.any() else z
        pepper, salt, p_salt = _salt_pepper_levels(clean, spec.magnitude)
        draws = rng.random((z.shape[0], idx.size))
        z[:, idx] = np.where(draws < p_salt, salt, pepper)
    return MultiViewFeatureSet(views), np.sort(idx)


def corrupt_pixels(fs, view_index, spec: NoiseSpec):
    """Replace a subset of feature entries of every instance in one view.

    Positions are drawn per instance; the magnitude multiplier scales the
    salt/pepper amplitude without changing positions or the salt/pepper
    pattern for a fixed seed.  Returns ``(corrupted_set, affected_mask)``
    with the mask shaped like the view.
    """
    if spec.kind != "pixel_replacement":
        raise ValueError(f"expected pixel_replacement, got {spec.kind!r}")
    if not 0 <= view_index < fs.n_views:
        raise ValueError(f"view index {view_index} out of range")
    rng = np.random.default_rng(spec.seed)
    views = [z.copy() for z in fs.views]
    z = views[view_index]
    dv, n = z.shape
    pepper, salt, p_salt = _salt_pepper_levels(z, spec.magnitude)
    mask = np.zeros((dv, n), dtype=bool)
    for i in range(n):
        rows = _pick_indices(spec, dv, rng, "pixels")
        mask[rows, i] = True
    draws = rng.random(int(mask.sum()))
    z[mask] = np.where(draws < p_salt, salt, pepper)
    return MultiViewFeatureSet(views), mask


def _corrupted_pair_mask(n, points):
    mask = np.zeros((n, n), dtype=bool)
    points = np.asarray(points, dtype=int)
    mask[points, :] = True
    mask[:, points] = True
    np.fill_diagonal(mask, False)
    return mask


def _noisy_distance_view(dist, points, magnitude, rng, noise_on):
    """Add +-magnitude to every distance touching the given points.

    Noise is drawn for i < j and mirrored; values are clamped at zero.  With
    ``noise_on="raw"`` the corruption hits the plain distances which are then
    squared; ``"squared"`` corrupts the squared matrix directly.
    """
    n = dist.shape[0]
    base = dist if noise_on == "raw" else dist**2
    mask = np.triu(_corrupted_pair_mask(n, points))
    eps = np.zeros_like(base)
    eps[mask] = magnitude * rng.choice([-1.0, 1.0], size=int(mask.sum()))
    noisy = base + eps
    noisy = np.triu(noisy, 1)
    noisy = noisy + noisy.T
    noisy = np.maximum(noisy, 0.0)
    return noisy**2 if noise_on == "raw" else noisy


def gen_point_set_views(
    seed=0,
    n_points=25,
    box=4.0,
    magnitude=10.0,
    view1_points=(0, 1, 2, 3),
    view2_points=(23, 24),
    noise_on="raw",
    points=None,
):
    """2-D reconstruction instance with complementary distance corruption.

    Points default to a seeded uniform draw in a square of side ``box`` (pass
    ``points`` to pin a layout).  View 1 corrupts every distance touching
    ``view1_points`` with +-``magnitude`` salt-and-pepper noise, view 2 does
    the same for ``view2_points``; matrices are clamped at zero, symmetrized
    and squared (see ``noise_on``).  Returns ``(points, views)``.
    """
    if noise_on not in ("raw", "squared"):
        raise ValueError(f"noise_on must be 'raw' or 'squared', got {noise_on!r}")
    rng = np.random.default_rng(seed)
    if points is None:
        points = rng.uniform(0.0, box, size=(n_points, 2))
    else:
        points = np.asarray(points, dtype=float)
        n_points = points.shape[0]
    for p in (*view1_points, *view2_points):
        if not 0 <= p < n_points:
            raise ValueError(f"corrupted point index {p} out of range")
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    d1 = _noisy_distance_view(dist, view1_points, magnitude, rng, noise_on)
    d2 = _noisy_distance_view(dist, view2_points, magnitude, rng, noise_on)
    return points, DissimilarityViews([d1, d2])


def gen_cluster_retrieval_views(
    classes,
    per_class,
    n_views=2,
    corrupt_per_view=10,
    magnitude=10.0,
    separation=12.0,
    spread=1.0,
    seed=0,
):
    """Class-structured dissimilarity views with complementary corruption.

    Points sit around well-separated class centroids, so with zero noise
    retrieval of the ``per_class - 1`` nearest neighbours is perfect on any
    single view.  Each view then corrupts all distances touching its own
    disjoint subset of ``corrupt_per_view`` instances, so no single view is
    sufficient but the ensemble is.  Returns ``(labels, views)``.
    """
    if classes < 2 or per_class < 2:
        raise ValueError("need at least 2 classes and 2 instances per class")
    n = classes * per_class
    if n_views * corrupt_per_view > n:
        raise ValueError("disjoint corruption subsets exceed instance count")
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(classes), per_class)
    centroids = separation * np.eye(classes)
    pts = centroids[labels] + spread * rng.standard_normal((n, classes))
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    order = rng.permutation(n)
    deltas = []
    for v in range(n_views):
        subset = order[v * corrupt_per_view : (v + 1) * corrupt_per_view]
        deltas.append(_noisy_distance_view(dist, subset, magnitude, rng, "raw"))
    return labels, DissimilarityViews(deltas)


def gen_labeled_multiview(
    classes=10,
    per_class=40,
    view_dims=(64, 32),
    latent_dim=8,
    scatter=0.25,
    observation_noise=0.01,
    seed=0,
):
    """Class-structured multi-view features for classification experiments.

    Latent vectors sit around ``classes`` random centroids in
    ``latent_dim`` dimensions; each view observes them through its own
    random linear map plus Gaussian noise (``observation_noise`` may be one
    level per view, relative to the view's RMS signal), then gets rescaled
    to unit mean squared column norm (a fixed point of view normalization).
    Returns ``(labels, feature_set)``.
    """
    if classes < 2 or per_class < 1:
        raise ValueError("need at least 2 classes and 1 instance per class")
    if np.ndim(observation_noise) == 0:
        observation_noise = [float(observation_noise)] * len(view_dims)
    if len(observation_noise) != len(view_dims):
        raise ValueError("observation_noise must be scalar or one level per view")
    rng = np.random.default_rng(seed)
    n = classes * per_class
    labels = np.repeat(np.arange(classes), per_class)
    centroids = rng.standard_normal((classes, latent_dim))
    latents = centroids[labels] + scatter * rng.standard_normal((n, latent_dim))
    views = []
    for dv, noise in zip(view_dims, observation_noise):
        w = rng.standard_normal((dv, latent_dim)) / np.sqrt(latent_dim)
        z = w @ latents.T
        z += noise * np.sqrt(np.mean(z * z)) * rng.standard_normal((dv, n))
        z /= np.sqrt(np.sum(z * z) / n)  # unit mean squared column norm
        views.append(z)
    return labels, MultiViewFeatureSet(views)
