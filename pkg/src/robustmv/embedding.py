"""Dissimilarity-matrix solvers.

Given one or more symmetric nonnegative dissimilarity matrices, these
solvers look for a Gram matrix ``B`` on the positive semidefinite cone whose
induced squared-distance matrix ``D`` (``D_ij = B_ii + B_jj - B_ij - B_ji``)
agrees with the views.  Classical MDS does it in closed form for a single
view; the iterative solvers trade the quadratic fit for an L1 cost
(subgradient steps) or a bounded correntropy score (gradient ascent), each
followed by projection back onto the PSD cone.  Coordinates come out of the
final eigendecomposition, ordered by descending eigenvalue.

Entry convention: matrices hold *squared* dissimilarities throughout, and
objectives/gradients sum over ordered index pairs exactly the way the
formulas below state, so a symmetric pair contributes twice to the reported
objective while the gradient treats it once.
"""

from dataclasses import dataclass, field

import numpy as np

from .trace import NumericalError, SolverTrace

__all__ = [
    "DissimilarityViews",
    "GramState",
    "EmbedConfig",
    "EmbeddingResult",
    "b_to_d",
    "double_center",
    "cmds",
    "psd_project",
    "mvree_subgradient",
    "cmvree_gradient",
    "f0_objective",
    "f_objective",
    "ree_fit",
    "extract_configuration",
    "hadamard_combine",
    "median_kernel_size",
    "KERNEL_PRESETS",
]

# Kernel sizes used by the reference experiments on each data family.
KERNEL_PRESETS = {"pointset": 3.0, "kimia": 1.5, "lidar": 2.0, "fish": 1.0}

_EIG_FLOOR = 1e-8  # relative floor for "numerically PSD"


def _check_square_symmetric(m, name, atol=0.0):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    if atol == 0.0:
        ok = np.array_equal(m, m.T)
    else:
        ok = np.allclose(m, m.T, atol=atol, rtol=0.0)
    if not ok:
        raise ValueError(f"{name} must be symmetric")
    return m


@dataclass
class DissimilarityViews:
    """M symmetric nonnegative N x N matrices with zero diagonal.

    ``weights[v]`` is the per-entry weighting of view v; omitted weights
    default to all ones.
    """

    deltas: list
    weights: list = None

    def __post_init__(self):
        if not self.deltas:
            raise ValueError("at least one view is required")
        checked = []
        for v, m in enumerate(self.deltas):
            m = _check_square_symmetric(m, f"view {v}")
            if not np.all(np.isfinite(m)):
                raise ValueError(f"view {v} contains non-finite values")
            if np.any(np.diag(m) != 0):
                raise ValueError(f"view {v} must have a zero diagonal")
            if np.any(m < 0):
                raise ValueError(f"view {v} has negative entries")
            checked.append(m)
        sizes = {m.shape[0] for m in checked}
        if len(sizes) != 1:
            raise ValueError(f"views disagree on size: {sorted(sizes)}")
        self.deltas = checked
        n = checked[0].shape[0]
        if self.weights is None:
            self.weights = [np.ones((n, n)) for _ in checked]
        else:
            if len(self.weights) != len(checked):
                raise ValueError("need one weight matrix per view")
            ws = []
            for v, w in enumerate(self.weights):
                w = _check_square_symmetric(w, f"weights {v}")
                if w.shape[0] != n:
                    raise ValueError(f"weights {v} size mismatch")
                if np.any(w < 0):
                    raise ValueError(f"weights {v} has negative entries")
                ws.append(w)
            self.weights = ws

    @property
    def n_views(self) -> int:
        return len(self.deltas)

    @property
    def n_points(self) -> int:
        return self.deltas[0].shape[0]


@dataclass
class GramState:
    """Symmetric PSD matrix together with its induced squared distances."""

    b: np.ndarray

    def __post_init__(self):
        self.b = _check_square_symmetric(self.b, "B", atol=1e-10)
        w = np.linalg.eigvalsh(self.b)
        top = max(w[-1], 0.0)
        if w[0] < -_EIG_FLOOR * max(top, 1.0):
            raise ValueError(f"B is not PSD: min eigenvalue {w[0]:.3e}")

    @property
    def d(self) -> np.ndarray:
        return b_to_d(self.b)


@dataclass
class EmbedConfig:
    """Settings for the iterative embedding solvers.

    ``sigma=None`` selects the median of all pooled off-diagonal
    dissimilarities at fit time.  ``schedule=None`` resolves to "fixed" for
    the correntropy loss and "inverse-sqrt" for L1.
    """

    target_dim: int = 2
    sigma: float = None
    alpha: float = 2.0
    step: float = 0.1
    schedule: str = None
    max_iter: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.target_dim < 1:
            raise ValueError("target_dim must be >= 1")
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        if not self.step > 0:
            raise ValueError("step must be > 0")
        if self.schedule not in (None, "fixed", "inverse-sqrt"):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class EmbeddingResult:
    """Final configuration of an embedding run.

    ``coords`` is the full ``N x N`` configuration ``U * sqrt(clipped
    eigenvalues)`` with columns ordered by descending eigenvalue;
    ``coords[:, :target_dim]`` is the working low-dimensional configuration.
    """

    coords: np.ndarray
    eigenvalues: np.ndarray
    gram: np.ndarray
    target_dim: int
    trace: SolverTrace = field(default_factory=SolverTrace)

    @property
    def configuration(self) -> np.ndarray:
        return self.coords[:, : self.target_dim]


def b_to_d(b) -> np.ndarray:
    """Squared-distance matrix induced by a Gram matrix.

    ``D_ij = B_ii + B_jj - B_ij - B_ji``; symmetric with a zero diagonal.
    """
    b = _check_square_symmetric(b, "B", atol=1e-10)
    diag = np.diag(b)
    d = diag[:, None] + diag[None, :] - b - b.T
    np.fill_diagonal(d, 0.0)
    return d


def double_center(delta) -> np.ndarray:
    """-1/2 * H @ delta @ H with H the centering matrix; row/col sums vanish."""
    delta = _check_square_symmetric(delta, "delta", atol=1e-10)
    row = delta.mean(axis=1, keepdims=True)
    col = delta.mean(axis=0, keepdims=True)
    grand = delta.mean()
    return -0.5 * (delta - row - col + grand)


def psd_project(b) -> np.ndarray:
    """Frobenius-nearest PSD matrix: eigendecompose and clip negatives."""
    b = _check_square_symmetric(b, "B", atol=1e-10)
    w, v = np.linalg.eigh(b)
    w = np.maximum(w, 0.0)
    out = (v * w) @ v.T
    return (out + out.T) / 2.0


def _sorted_eigh(b):
    w, v = np.linalg.eigh(b)
    order = np.argsort(-w, kind="stable")  # descending, ties by original index
    return w[order], v[:, order]


def _configuration_from_gram(b, target_dim, trace):
    w, v = _sorted_eigh(b)
    wpos = np.maximum(w, 0.0)
    coords = v * np.sqrt(wpos)
    gram = (v * wpos) @ v.T
    gram = (gram + gram.T) / 2.0
    return EmbeddingResult(
        coords=coords,
        eigenvalues=w,
        gram=gram,
        target_dim=target_dim,
        trace=trace,
    )


def cmds(delta, target_dim: int) -> EmbeddingResult:
    """Classical MDS: double-center, eigendecompose, clip, read coordinates.

    Embedding an exact squared Euclidean distance matrix reproduces it.
    """
    delta = np.asarray(delta, dtype=float)
    if not 1 <= target_dim <= delta.shape[0]:
        raise ValueError(f"target_dim {target_dim} out of range")
    b0 = double_center(delta)
    trace = SolverTrace()
    trace.finish(True, "closed form")
    return _configuration_from_gram(b0, target_dim, trace)


def median_kernel_size(views: DissimilarityViews) -> float:
    """Median of the pooled off-diagonal entries of all views."""
    n = views.n_points
    mask = ~np.eye(n, dtype=bool)
    pooled = np.concatenate([m[mask] for m in views.deltas])
    med = float(np.median(pooled))
    if med <= 0:
        raise ValueError("median off-diagonal dissimilarity is not positive")
    return med


def mvree_subgradient(views: DissimilarityViews, d) -> np.ndarray:
    """Subgradient of the multi-view L1 cost with respect to the Gram matrix.

    Off-diagonal: ``-sum_v W_ij * sign(D_ij - delta_ij)``; diagonal:
    ``sum_v sum_k W_ik * sign(D_ik - delta_ik)``.  ``sign(0)`` is 0, a valid
    subgradient choice at ties.
    """
    d = np.asarray(d, dtype=float)
    s = np.zeros_like(d)
    for w, delta in zip(views.weights, views.deltas):
        s += w * np.sign(d - delta)
    g = -s
    np.fill_diagonal(g, s.sum(axis=1))
    return g


def _kernel_and_slope(err, sigma, alpha):
    # kernel exp(-lam |e|^alpha) with lam = 1/(2 sigma^alpha), and the
    # derivative of the kernel w.r.t. D (err = delta - D):
    #   d/dD exp(-lam|e|^alpha) = lam*alpha*|e|^(alpha-1)*sign(e)*kernel.
    lam = 1.0 / (2.0 * sigma**alpha)
    abs_e = np.abs(err)
    if alpha == 2.0:
        kern = np.exp(-lam * abs_e * abs_e)
        slope = (err / (sigma * sigma)) * kern
        return kern, slope
    pow_a = np.zeros_like(abs_e)
    pow_am1 = np.zeros_like(abs_e)
    nz = abs_e > 0
    pow_a[nz] = np.exp(alpha * np.log(abs_e[nz]))
    pow_am1[nz] = np.exp((alpha - 1.0) * np.log(abs_e[nz]))
    kern = np.exp(-lam * pow_a)
    slope = lam * alpha * pow_am1 * np.sign(err) * kern
    return kern, slope


def cmvree_gradient(views: DissimilarityViews, d, sigma: float, alpha: float = 2.0):
    """Gradient of the correntropy score with respect to the Gram matrix.

    For ``alpha = 2`` the off-diagonal entry is
    ``sum_v W_ij * exp(-(delta_ij - D_ij)^2 / 2 sigma^2) * (D_ij - delta_ij) / sigma^2``
    and the diagonal entry is the row sum with the opposite error sign; a
    general shape exponent replaces the Gaussian kernel by
    ``exp(-|e|^alpha / (2 sigma^alpha))`` with the matching chain rule.
    """
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    d = np.asarray(d, dtype=float)
    t = np.zeros_like(d)
    for w, delta in zip(views.weights, views.deltas):
        _, slope = _kernel_and_slope(delta - d, sigma, alpha)
        t += w * slope
    g = -t
    np.fill_diagonal(g, t.sum(axis=1))
    return g


def f0_objective(views: DissimilarityViews, d) -> float:
    """Total weighted L1 discrepancy, summed over the full matrix."""
    d = np.asarray(d, dtype=float)
    return float(
        sum(np.sum(w * np.abs(delta - d)) for w, delta in zip(views.weights, views.deltas))
    )


def f_objective(views: DissimilarityViews, d, sigma: float, alpha: float = 2.0) -> float:
    """Total weighted correntropy score, summed over the full matrix.

    Bounded above by the total weight mass sum_v sum_ij W_ij.
    """
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    d = np.asarray(d, dtype=float)
    total = 0.0
    for w, delta in zip(views.weights, views.deltas):
        kern, _ = _kernel_and_slope(delta - d, sigma, alpha)
        total += np.sum(w * kern)
    return float(total)


def ree_fit(
    views: DissimilarityViews,
    cfg: EmbedConfig,
    loss: str = "correntropy",
    callback=None,
) -> EmbeddingResult:
    """Iterative robust Euclidean embedding of one or more views.

    ``loss="l1"`` takes subgradient descent steps on the L1 cost;
    ``loss="correntropy"`` takes gradient ascent steps on the bounded
    correntropy score.  Every iteration ends with a projection onto the PSD
    cone, and the loss value at the new iterate is recorded in the trace.
    ``callback(iteration, B, objective)``, when given, observes each
    post-projection iterate.

    A single-view L1 run is the plain robust-embedding baseline; the warm
    start is the PSD projection of the double-centered view average.
    """
    if loss not in ("correntropy", "l1"):
        raise ValueError(f"unknown loss {loss!r}")
    n = views.n_points
    if not 1 <= cfg.target_dim <= n:
        raise ValueError(f"target_dim {cfg.target_dim} out of range for N={n}")
    sigma = cfg.sigma
    if loss == "correntropy" and sigma is None:
        sigma = median_kernel_size(views)
    schedule = cfg.schedule
    if schedule is None:
        schedule = "fixed" if loss == "correntropy" else "inverse-sqrt"

    mean_delta = sum(views.deltas) / views.n_views
    b = psd_project(double_center(mean_delta))
    trace = SolverTrace()
    for it in range(1, cfg.max_iter + 1):
        eta = cfg.step if schedule == "fixed" else cfg.step / np.sqrt(it)
        d = b_to_d(b)
        if loss == "correntropy":
            b = b + eta * cmvree_gradient(views, d, sigma, cfg.alpha)
        else:
            b = b - eta * mvree_subgradient(views, d)
        b = psd_project(b)
        d = b_to_d(b)
        obj = (
            f_objective(views, d, sigma, cfg.alpha)
            if loss == "correntropy"
            else f0_objective(views, d)
        )
        if not np.isfinite(obj):
            raise NumericalError(f"ree_fit({loss}): non-finite objective at iter {it}")
        trace.record(obj)
        if callback is not None:
            callback(it, b, obj)
    trace.finish(False, "max_iter reached")
    return _configuration_from_gram(b, cfg.target_dim, trace)


def extract_configuration(result: EmbeddingResult, k: int) -> np.ndarray:
    """First k coordinate columns (the k dominant eigendirections)."""
    n = result.coords.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range for N={n}")
    return result.coords[:, :k]


def hadamard_combine(delta_a, delta_b) -> np.ndarray:
    """Entrywise geometric mean sqrt(delta_a * delta_b) of two views."""
    a = np.asarray(delta_a, dtype=float)
    b = np.asarray(delta_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return np.sqrt(a * b)
