"""Alternating solvers for feature-based multi-view learning.

Four solvers share one alternation skeleton: a latent matrix ``X`` (one
column per instance) and per-view linear maps ``W`` are fit so that every
view ``Z_v`` is approximately ``W_v @ X``.  They differ only in how the
auxiliary weights ``A`` are refreshed in the outer loop:

* ``cmv_fit``      -- correntropy loss, one weight per (view, instance);
* ``cemv_fit``     -- correntropy loss, one weight per (view, entry);
* ``l2mv_fit``     -- plain least squares, weights frozen at -1;
* ``cauchymv_fit`` -- Cauchy loss via iteratively reweighted least squares.

Weights are kept negative (each is ``-exp(-nonnegative)`` or an IRLS
analogue) so that the half-quadratic surrogate traced by the correntropy
solvers is maximized; the inner x/W updates are ridge solves in the
equivalent positive-weight form.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .trace import NumericalError, SolverTrace

__all__ = [
    "MultiViewFeatureSet",
    "CmvConfig",
    "IntactSpaceModel",
    "normalize_views",
    "cmv_update_a",
    "cmv_update_x",
    "cmv_update_w",
    "cmv_objective",
    "cmv_fit",
    "cemv_sigmas",
    "cemv_update_a",
    "cemv_update_x",
    "cemv_update_w",
    "cemv_objective",
    "cemv_fit",
    "l2mv_fit",
    "cauchymv_fit",
    "instance_weight_profile",
]

# Floor keeping weights strictly negative when exp(-b) underflows.
_WEIGHT_FLOOR = np.finfo(float).tiny


@dataclass
class MultiViewFeatureSet:
    """M feature matrices over N shared instances.

    ``views[v]`` has shape ``(d_v, N)``; column ``i`` is the feature vector
    of instance ``i`` in view ``v``.
    """

    views: list

    def __post_init__(self):
        if not self.views:
            raise ValueError("at least one view is required")
        self.views = [np.asarray(v, dtype=float) for v in self.views]
        for v, z in enumerate(self.views):
            if z.ndim != 2:
                raise ValueError(f"view {v} must be a 2-D matrix, got shape {z.shape}")
            if z.shape[0] < 1 or z.shape[1] < 1:
                raise ValueError(f"view {v} has empty shape {z.shape}")
            if not np.all(np.isfinite(z)):
                raise ValueError(f"view {v} contains non-finite values")
        counts = {z.shape[1] for z in self.views}
        if len(counts) != 1:
            raise ValueError(f"views disagree on instance count: {sorted(counts)}")

    @property
    def n_views(self) -> int:
        return len(self.views)

    @property
    def n_instances(self) -> int:
        return self.views[0].shape[1]

    @property
    def view_dims(self) -> list:
        return [z.shape[0] for z in self.views]


@dataclass
class CmvConfig:
    """Configuration shared by all feature-space solvers.

    ``c1``/``c2`` are the ridge coefficients appearing verbatim in the
    closed-form W/x updates.  ``sigma`` doubles as the Cauchy scale for
    ``cauchymv_fit``.  ``view_sigmas`` overrides the per-view kernel sizes
    of ``cemv_fit`` (default ``sigma / sqrt(d_v)``).
    """

    latent_dim: int
    sigma: float = 0.5
    c1: float = 1e-3
    c2: float = 1e-3
    max_outer: int = 50
    max_inner: int = 5
    rel_tol: float = 1e-6
    seed: int = 0
    view_sigmas: list = None

    def __post_init__(self):
        if self.latent_dim < 1:
            raise ValueError("latent_dim must be >= 1")
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        if not (self.c1 > 0 and self.c2 > 0):
            raise ValueError("c1 and c2 must be > 0")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.rel_tol < 0:
            raise ValueError("rel_tol must be >= 0")
        if self.view_sigmas is not None and any(s <= 0 for s in self.view_sigmas):
            raise ValueError("view_sigmas must all be > 0")


@dataclass
class IntactSpaceModel:
    """Fitted latent representation.

    ``X`` is ``(d, N)`` with one latent column per instance, ``W`` the list
    of per-view maps ``(d_v, d)``.  ``A`` holds the auxiliary weights: an
    ``(M, N)`` array for the instance-weighted solvers, or one ``(d_v, N)``
    array per view for the entrywise solver.  All weights lie in ``[-1, 0)``
    (exactly -1 for ``l2mv_fit``).
    """

    X: np.ndarray
    W: list
    A: object
    trace: SolverTrace
    solver: str = "cmv"


def normalize_views(fs: MultiViewFeatureSet) -> MultiViewFeatureSet:
    """Divide each view by its mean squared column norm.

    The scale is ``sum_i ||z_i||^2 / N``; a view whose scale is already 1 is
    a fixed point, otherwise re-running changes the scale again (the rule is
    intentionally not idempotent).  An all-zero view is rejected.
    """
    out = []
    for v, z in enumerate(fs.views):
        scale = np.sum(z * z) / z.shape[1]
        if scale == 0.0:
            raise ValueError(f"view {v} is all zeros; cannot normalize")
        out.append(z / scale)
    return MultiViewFeatureSet(out)


def _solve_spd(mat, rhs):
    # Positive-definite ridge systems only; Cholesky, never explicit inverses.
    if not np.all(np.isfinite(mat)):
        raise NumericalError("linear system overflowed to non-finite values")
    return cho_solve(cho_factor(mat, lower=True), rhs)


def _residuals(fs, X, W):
    return [fs.views[v] - W[v] @ X for v in range(fs.n_views)]


def _g(a):
    # Convex HQ potential evaluated on negative weights.
    return -a * np.log(-a) + a


# ---------------------------------------------------------------------------
# instance-weighted solvers (C-MV family)
# ---------------------------------------------------------------------------


def cmv_update_a(fs, X, W, sigma):
    """Per-instance weights a[v, i] = -exp(-||z_i^v - W_v x_i||^2 / 2 sigma^2)."""
    res2 = np.stack([np.sum(r * r, axis=0) for r in _residuals(fs, X, W)])
    return -np.maximum(np.exp(-res2 / (2.0 * sigma * sigma)), _WEIGHT_FLOOR)


def cmv_update_x(fs, W, a, c2):
    """Closed-form latent update given maps and instance weights.

    Solves, independently per instance, the ridge problem
    ``min_x sum_v p_v ||z_i^v - W_v x||^2 + c2 ||x||^2`` with ``p = -a > 0``.
    """
    p = -np.asarray(a)
    d = W[0].shape[1]
    grams = [wv.T @ wv for wv in W]
    rhs = np.stack([wv.T @ zv for wv, zv in zip(W, fs.views)])  # (M, d, N)
    rhs = np.einsum("vn,vdn->dn", p, rhs)
    X = np.empty((d, fs.n_instances))
    eye = c2 * np.eye(d)
    for i in range(fs.n_instances):
        lhs = eye.copy()
        for v in range(fs.n_views):
            lhs += p[v, i] * grams[v]
        X[:, i] = _solve_spd(lhs, rhs[:, i])
    return X


def cmv_update_w(fs, X, a, c1):
    """Closed-form map update: ridge regression of each view onto X."""
    p = -np.asarray(a)
    d = X.shape[0]
    eye = c1 * np.eye(d)
    W = []
    for v in range(fs.n_views):
        lhs = (X * p[v]) @ X.T + eye
        rhs = X @ (fs.views[v] * p[v]).T  # (d, d_v)
        W.append(_solve_spd(lhs, rhs).T)
    return W


def _penalty(W, X, c1, c2, view_balance=None):
    wpen = 0.0
    for v, wv in enumerate(W):
        term = np.sum(wv * wv)
        if view_balance is not None:
            term /= view_balance[v]
        wpen += term
    return c1 * wpen + c2 * np.sum(X * X)


def cmv_objective(fs, X, W, A, cfg: CmvConfig) -> float:
    """Half-quadratic surrogate maximized by the C-MV alternation.

    With ``b = res^2 / (2 sigma^2)`` this is
    ``sum(b*A - g(A)) - (c1*||W||^2 + c2*||X||^2) / (2 sigma^2)``,
    which every block update (A, X, W) increases and which is bounded above
    by M*N.
    """
    A = np.asarray(A)
    if not np.all(A < 0):
        raise ValueError("auxiliary weights must be strictly negative")
    two_s2 = 2.0 * cfg.sigma * cfg.sigma
    res2 = np.stack([np.sum(r * r, axis=0) for r in _residuals(fs, X, W)])
    b = res2 / two_s2
    hq = np.sum(b * A - _g(A))
    return float(hq - _penalty(W, X, cfg.c1, cfg.c2) / two_s2)


def _l2_objective(fs, X, W, A, cfg):
    res2 = sum(np.sum(r * r) for r in _residuals(fs, X, W))
    return float(res2 + _penalty(W, X, cfg.c1, cfg.c2))


def _cauchy_objective(fs, X, W, A, cfg):
    c2sq = cfg.sigma * cfg.sigma
    loss = sum(
        np.sum(np.log1p(np.sum(r * r, axis=0) / c2sq)) for r in _residuals(fs, X, W)
    )
    return float(loss + _penalty(W, X, cfg.c1, cfg.c2) / c2sq)


def _init_maps(fs, cfg):
    # Keyed on (seed, view dim) so views of equal dimension start from the
    # same map; identical views then behave symmetrically from the start.
    scale = 1.0 / math.sqrt(cfg.latent_dim)
    return [
        np.random.default_rng((cfg.seed, dv)).standard_normal((dv, cfg.latent_dim))
        * scale
        for dv in fs.view_dims
    ]


def _check_fit_inputs(fs, cfg):
    if cfg.latent_dim >= fs.n_instances:
        raise ValueError(
            f"latent_dim must be < instance count ({cfg.latent_dim} >= {fs.n_instances})"
        )
    if cfg.view_sigmas is not None and len(cfg.view_sigmas) != fs.n_views:
        raise ValueError("view_sigmas must have one entry per view")


def _alternate(fs, cfg, solver, update_a, update_x, update_w, objective, unit_a):
    """Shared double loop: refresh A, then alternate x/W updates."""
    _check_fit_inputs(fs, cfg)
    W = _init_maps(fs, cfg)
    X = update_x(fs, W, unit_a, cfg.c2)
    trace = SolverTrace()
    A = None
    prev = None
    stopped = False
    for _ in range(cfg.max_outer):
        A = update_a(fs, X, W, cfg)
        for _ in range(cfg.max_inner):
            X = update_x(fs, W, A, cfg.c2)
            W = update_w(fs, X, A, cfg.c1)
        obj = objective(fs, X, W, A, cfg)
        if not np.isfinite(obj):
            raise NumericalError(f"{solver}: non-finite objective {obj}")
        trace.record(obj)
        if prev is not None and abs(obj - prev) <= cfg.rel_tol * max(1.0, abs(prev)):
            trace.finish(True, "objective change below rel_tol")
            stopped = True
            break
        prev = obj
    if not stopped:
        trace.finish(False, "max_outer reached")
    return IntactSpaceModel(X=X, W=W, A=A, trace=trace, solver=solver)


def _unit_instance_weights(fs):
    return -np.ones((fs.n_views, fs.n_instances))


def cmv_fit(fs: MultiViewFeatureSet, cfg: CmvConfig) -> IntactSpaceModel:
    """Correntropy multi-view fit with per-instance weighting.

    Expects normalized views (see :func:`normalize_views`).  The recorded
    objective is :func:`cmv_objective`; it is non-decreasing across outer
    iterations and bounded by ``M * N``.
    """
    return _alternate(
        fs,
        cfg,
        "cmv",
        lambda fs_, X, W, c: cmv_update_a(fs_, X, W, c.sigma),
        cmv_update_x,
        cmv_update_w,
        cmv_objective,
        _unit_instance_weights(fs),
    )


def l2mv_fit(fs: MultiViewFeatureSet, cfg: CmvConfig) -> IntactSpaceModel:
    """Least-squares baseline: the same alternation with A frozen at -1."""
    return _alternate(
        fs,
        cfg,
        "l2mv",
        lambda fs_, X, W, c: _unit_instance_weights(fs_),
        cmv_update_x,
        cmv_update_w,
        _l2_objective,
        _unit_instance_weights(fs),
    )


def _cauchy_update_a(fs, X, W, cfg):
    # IRLS weight of log(1 + res^2/c^2); cfg.sigma plays the role of c.
    res2 = np.stack([np.sum(r * r, axis=0) for r in _residuals(fs, X, W)])
    return -1.0 / (1.0 + res2 / (cfg.sigma * cfg.sigma))


def cauchymv_fit(fs: MultiViewFeatureSet, cfg: CmvConfig) -> IntactSpaceModel:
    """Cauchy-loss baseline solved by iteratively reweighted least squares."""
    return _alternate(
        fs,
        cfg,
        "cauchymv",
        _cauchy_update_a,
        cmv_update_x,
        cmv_update_w,
        _cauchy_objective,
        _unit_instance_weights(fs),
    )


# ---------------------------------------------------------------------------
# entrywise solver (Ce-MV)
# ---------------------------------------------------------------------------


def cemv_sigmas(fs, cfg):
    """Per-view kernel sizes: explicit overrides or sigma / sqrt(d_v)."""
    if cfg.view_sigmas is not None:
        return [float(s) for s in cfg.view_sigmas]
    return [cfg.sigma / math.sqrt(dv) for dv in fs.view_dims]


def cemv_update_a(fs, X, W, sigmas):
    """Entrywise weights a[v][j, i] = -exp(-(z_ji^v - W_j^v x_i)^2 / 2 sigma_v^2)."""
    out = []
    for r, s in zip(_residuals(fs, X, W), sigmas):
        out.append(-np.maximum(np.exp(-(r * r) / (2.0 * s * s)), _WEIGHT_FLOOR))
    return out


def cemv_update_x(fs, W, a, c2):
    """Latent update with entrywise weights and 1/d_v view balancing."""
    p = [-np.asarray(av) for av in a]
    d = W[0].shape[1]
    inv_dims = [1.0 / dv for dv in fs.view_dims]
    rhs = np.zeros((d, fs.n_instances))
    for v in range(fs.n_views):
        rhs += inv_dims[v] * (W[v].T @ (p[v] * fs.views[v]))
    X = np.empty((d, fs.n_instances))
    eye = c2 * np.eye(d)
    for i in range(fs.n_instances):
        lhs = eye.copy()
        for v in range(fs.n_views):
            lhs += inv_dims[v] * ((W[v] * p[v][:, i : i + 1]).T @ W[v])
        X[:, i] = _solve_spd(lhs, rhs[:, i])
    return X


def cemv_update_w(fs, X, a, c1):
    """Row-by-row map update; no view balancing enters here."""
    d = X.shape[0]
    eye = c1 * np.eye(d)
    W = []
    for v in range(fs.n_views):
        p = -np.asarray(a[v])
        wv = np.empty((fs.view_dims[v], d))
        for j in range(fs.view_dims[v]):
            lhs = (X * p[j]) @ X.T + eye
            rhs = X @ (p[j] * fs.views[v][j])
            wv[j] = _solve_spd(lhs, rhs)
        W.append(wv)
    return W


def cemv_objective(fs, X, W, A, cfg: CmvConfig) -> float:
    """Half-quadratic surrogate maximized by the Ce-MV alternation.

    Each view's HQ sum (with ``b = res^2 / (2 sigma_v^2)``) is weighted by
    ``sigma_v^2 / (d_v * max_w sigma_w^2)``; that weighting is exactly what
    makes the closed-form updates above blockwise-exact ascent steps when
    kernel sizes differ per view, and it keeps the total bounded by M*N.
    """
    sigmas = cemv_sigmas(fs, cfg)
    s2 = [s * s for s in sigmas]
    t = 1.0 / (2.0 * max(s2))
    hq = 0.0
    for v, r in enumerate(_residuals(fs, X, W)):
        av = np.asarray(A[v])
        if not np.all(av < 0):
            raise ValueError("auxiliary weights must be strictly negative")
        b = (r * r) / (2.0 * s2[v])
        kappa = 2.0 * s2[v] * t / fs.view_dims[v]
        hq += kappa * np.sum(b * av - _g(av))
    pen = _penalty(W, X, cfg.c1, cfg.c2, view_balance=fs.view_dims)
    return float(hq - t * pen)


def cemv_fit(fs: MultiViewFeatureSet, cfg: CmvConfig) -> IntactSpaceModel:
    """Entrywise correntropy multi-view fit.

    Weights individual feature entries rather than whole instances, so a few
    corrupted coordinates cannot drag down an otherwise clean instance.
    """
    sigmas = cemv_sigmas(fs, cfg)
    unit = [-np.ones((dv, fs.n_instances)) for dv in fs.view_dims]
    return _alternate(
        fs,
        cfg,
        "cemv",
        lambda fs_, X, W, c: cemv_update_a(fs_, X, W, sigmas),
        cemv_update_x,
        cemv_update_w,
        cemv_objective,
        unit,
    )


def instance_weight_profile(model: IntactSpaceModel) -> np.ndarray:
    """Weight magnitudes per (view, instance), in [0, 1].

    For the entrywise solver this is the per-instance mean of the entry
    weights, which is the quantity worth plotting against noise labels.
    """
    if isinstance(model.A, np.ndarray):
        return np.abs(model.A)
    return np.stack([np.abs(av).mean(axis=0) for av in model.A])
