"""Proxima-Orion q-Gaussian (PO-QG) oversampling.

For every minority anchor the ``k`` nearest minority neighbours are weighted
by their distance to the anchor's nearest majority row relative to the
anchor's own distance, damped by that majority row's mean distance to the
majority class raised to ``alpha``.  Two distinct neighbours (Proxima and
Orion) are drawn from the normalised weights by inverse-CDF sampling on the
cumulative weights, and the synthetic row is their combination weighted by
normalised q-Gaussian kernels of their distances to the anchor.
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, replace

import numpy as np

from .base import BaseResampler, ConfigError, Resampled, SyntheticBatch
from .data import InsufficientSamplesError, stats
from .neighbors import distances_to, knn_within, majority_density, nearest_majority

__all__ = [
    "PoqgConfig",
    "WeightTable",
    "QGaussianWeights",
    "DEFAULT_GRID",
    "relative_weights",
    "normalize_weights",
    "cumulative_weights",
    "weight_table",
    "select_proxima_orion",
    "q_gaussian_weight",
    "normalize_q_weights",
    "generate_synthetic",
    "oversample",
    "POQG",
]

DEFAULT_GRID = {
    "k": (5, 7, 10),
    "alpha": (0.3, 0.5, 0.7),
    "beta": (0.05, 0.1, 0.2),
    "q": (1.3, 1.5, 1.7),
}


@dataclass(frozen=True)
class PoqgConfig:
    """Hyperparameters of one PO-QG run.

    ``target`` is the number of synthetic rows; ``None`` balances the classes.
    ``anchor_mode`` is ``"random"`` (uniform draw per iteration) or
    ``"round_robin"``.  ``replacement=True`` lets Proxima and Orion coincide.
    """

    k: int = 5
    alpha: float = 0.5
    beta: float = 0.1
    q: float = 1.5
    seed: int | None = 0
    eps_div: float = 1e-9
    target: int | None = None
    anchor_mode: str = "random"
    replacement: bool = False
    density_denominator: str = "majority"

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            raise ConfigError(f"k must be an integer >= 2, got {self.k}")
        if not self.alpha >= 0:
            raise ConfigError(f"alpha must be >= 0, got {self.alpha}")
        if not self.beta > 0:
            raise ConfigError(f"beta must be > 0, got {self.beta}")
        if not np.isfinite(self.q):
            raise ConfigError(f"q must be finite, got {self.q}")
        if not self.eps_div >= 0:
            raise ConfigError(f"eps_div must be >= 0, got {self.eps_div}")
        if self.target is not None and (int(self.target) != self.target or self.target < 0):
            raise ConfigError(f"target must be a nonnegative integer, got {self.target}")
        if self.anchor_mode not in ("random", "round_robin"):
            raise ConfigError(f"unknown anchor_mode {self.anchor_mode!r}")
        if self.density_denominator not in ("majority", "all"):
            raise ConfigError(f"unknown density_denominator {self.density_denominator!r}")


@dataclass(frozen=True, eq=False)
class WeightTable:
    anchor_index: int
    neighbor_indices: np.ndarray
    distances: np.ndarray
    raw_weights: np.ndarray
    normalized_weights: np.ndarray | None = None
    cumulative: np.ndarray | None = None

    def selection_probabilities(self):
        """``S(n) - S(n-1)`` with ``S(0) = 0``."""
        return np.diff(np.r_[0.0, self.cumulative])


@dataclass(frozen=True)
class QGaussianWeights:
    q1: float
    q2: float
    raw1: float
    raw2: float
    fallback: bool = False


def relative_weights(d, anchor, neighbors, ctx, alpha, eps_div=1e-9):
    """Raw neighbour weights for one anchor.

    ``w_n = (|x_n - x_maj| + eps) / (|x_anchor - x_maj| + eps) / (rho + eps)**alpha``
    """
    if len(neighbors) == 0:
        raise InsufficientSamplesError("anchor has no neighbours")
    if ctx.density is None:
        raise ValueError("majority context has no density")
    x_maj = d.features[ctx.nearest_majority_index]
    to_majority = distances_to(d.features[neighbors.neighbor_indices], x_maj)
    ratio = (to_majority + eps_div) / (ctx.distance_to_majority + eps_div)
    raw = ratio / (ctx.density + eps_div) ** alpha
    return WeightTable(int(anchor), neighbors.neighbor_indices, neighbors.distances, raw)


def normalize_weights(t):
    total = t.raw_weights.sum()
    if not (np.isfinite(total) and total > 0):
        raise ValueError(f"raw weights of anchor {t.anchor_index} cannot be normalised")
    return replace(t, normalized_weights=t.raw_weights / total)


def cumulative_weights(t):
    if t.normalized_weights is None:
        raise ValueError("normalise the weights first")
    return replace(t, cumulative=np.cumsum(t.normalized_weights))


def weight_table(d, anchor, cfg, _density_cache=None):
    """Neighbours, majority context and weights of one minority anchor."""
    neighbors = knn_within(d, 1, anchor, cfg.k)
    ctx = nearest_majority(d, anchor)
    j = ctx.nearest_majority_index
    cache = {} if _density_cache is None else _density_cache
    if j not in cache:
        cache[j] = majority_density(d, j, cfg.density_denominator)
    ctx = replace(ctx, density=cache[j])
    t = relative_weights(d, anchor, neighbors, ctx, cfg.alpha, cfg.eps_div)
    return cumulative_weights(normalize_weights(t))


def _draw(cumulative, weights, u):
    pos = int(np.searchsorted(cumulative, u * cumulative[-1], side="right"))
    if pos >= len(weights) or weights[pos] <= 0:
        # rounding at the top end: fall back to the last position with mass
        pos = int(np.flatnonzero(weights > 0)[-1])
    return pos


def _select_positions(t, rng, replacement=False):
    w = t.normalized_weights
    if w.size < 2:
        raise InsufficientSamplesError("two neighbours are needed to pick Proxima and Orion")
    first = _draw(t.cumulative, w, rng.random())
    if replacement:
        return first, _draw(t.cumulative, w, rng.random())
    rest = w.copy()
    rest[first] = 0.0
    if rest.sum() <= 0:
        others = np.delete(np.arange(w.size), first)
        return first, int(others[rng.integers(others.size)])
    return first, _draw(np.cumsum(rest), rest, rng.random())


def select_proxima_orion(t, rng, replacement=False):
    """Draw (Proxima, Orion) row ids with probabilities ``S(n) - S(n-1)``.

    Orion is drawn from the remaining neighbours, renormalised, unless
    ``replacement`` is true.
    """
    a, b = _select_positions(t, rng, replacement)
    return int(t.neighbor_indices[a]), int(t.neighbor_indices[b])


def q_gaussian_weight(distance, beta, q):
    """q-Gaussian kernel of ``distance / beta``.

    ``exp(-z**2 / 2)`` for ``q == 1``; otherwise
    ``[1 - (1 - q) z**2] ** (1 / (1 - q))`` with a negative base clamped to 0.
    """
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    z2 = (np.asarray(distance, dtype=float) / beta) ** 2
    if q == 1:
        out = np.exp(-0.5 * z2)
    else:
        base = np.maximum(1.0 - (1.0 - q) * z2, 0.0)
        with np.errstate(divide="ignore"):
            out = np.where(base > 0, base ** (1.0 / (1.0 - q)), 0.0)
    return float(out) if out.ndim == 0 else out


def normalize_q_weights(raw1, raw2):
    """Kernel weights scaled to sum to one; equal split when both vanish."""
    total = raw1 + raw2
    if total > 0:
        return QGaussianWeights(raw1 / total, raw2 / total, raw1, raw2)
    return QGaussianWeights(0.5, 0.5, raw1, raw2, fallback=True)


def generate_synthetic(anchor, proxima, orion, w):
    anchor, proxima, orion = (np.asarray(p, dtype=float) for p in (anchor, proxima, orion))
    if not anchor.shape == proxima.shape == orion.shape:
        raise ValueError(
            f"dimension mismatch: {anchor.shape}, {proxima.shape}, {orion.shape}"
        )
    return anchor + w.q1 * (proxima - anchor) + w.q2 * (orion - anchor)


def oversample(d, cfg, rng=None):
    """Append PO-QG synthetic minority rows to ``d``.

    Returns the resampled :class:`Dataset` (originals first) and the
    :class:`SyntheticBatch` describing the appended rows.
    """
    st = stats(d)
    if st.n_minority < cfg.k + 1:
        raise InsufficientSamplesError(
            f"k={cfg.k} needs at least {cfg.k + 1} minority rows, found {st.n_minority}"
        )
    if st.n_majority < 2:
        raise InsufficientSamplesError(
            f"majority density needs at least 2 majority rows, found {st.n_majority}"
        )
    target = max(st.n_majority - st.n_minority, 0) if cfg.target is None else int(cfg.target)
    rng = np.random.default_rng(cfg.seed) if rng is None else rng

    minority = d.class_indices(1)
    cache = {}
    tables = [weight_table(d, a, cfg, cache) for a in minority]
    X = d.features

    points = np.empty((target, d.n_features))
    anchors = np.empty(target, dtype=np.int64)
    proximas = np.empty(target, dtype=np.int64)
    orions = np.empty(target, dtype=np.int64)
    q1 = np.empty(target)
    q2 = np.empty(target)
    fallbacks = 0
    for i in range(target):
        if cfg.anchor_mode == "random":
            slot = int(rng.integers(minority.size))
        else:
            slot = i % minority.size
        t = tables[slot]
        a, b = _select_positions(t, rng, cfg.replacement)
        w = normalize_q_weights(
            q_gaussian_weight(t.distances[a], cfg.beta, cfg.q),
            q_gaussian_weight(t.distances[b], cfg.beta, cfg.q),
        )
        fallbacks += w.fallback
        p, o = t.neighbor_indices[a], t.neighbor_indices[b]
        points[i] = generate_synthetic(X[t.anchor_index], X[p], X[o], w)
        anchors[i], proximas[i], orions[i] = t.anchor_index, p, o
        q1[i], q2[i] = w.q1, w.q2

    if fallbacks:
        warnings.warn(
            f"{fallbacks} synthetic rows used equal weights because both "
            "q-Gaussian kernels vanished",
            RuntimeWarning,
            stacklevel=2,
        )
    batch = SyntheticBatch.from_records(
        points, anchors, proximas, orions, q1, q2, d.n_features,
        method="poqg", config=asdict(cfg), info={"q_weight_fallbacks": fallbacks},
    )
    resampled = d.with_rows(batch.points, np.ones(target, dtype=np.int64))
    return resampled, batch


class POQG(BaseResampler):
    """Proxima-Orion q-Gaussian oversampler.

    Parameters
    ----------
    k : int, default=5
        Minority neighbours considered per anchor.
    alpha : float, default=0.5
        Exponent of the majority density penalty.
    beta : float, default=0.1
        Scale of the q-Gaussian kernel, in feature units.
    q : float, default=1.5
        Shape of the q-Gaussian kernel; larger values give heavier tails.
    eps_div : float, default=1e-9
        Guard added to distances and density before dividing.
    target : int or None, default=None
        Number of synthetic rows; ``None`` balances the classes.
    anchor_mode : {"random", "round_robin"}, default="random"
    replacement : bool, default=False
        Draw Orion with replacement (Proxima and Orion may coincide).
    density_denominator : {"majority", "all"}, default="majority"
        Divide the summed majority distances by the majority count or by
        the full row count.
    random_state : int or None, default=None

    Attributes
    ----------
    batch_ : SyntheticBatch
        Provenance of the rows generated by the last ``fit_resample``.
    origin_ : ndarray
        Source row of each output row, -1 for synthetic rows.
    """

    method = "poqg"

    def __init__(self, k=5, alpha=0.5, beta=0.1, q=1.5, eps_div=1e-9, target=None,
                 anchor_mode="random", replacement=False,
                 density_denominator="majority", random_state=None):
        self.k = k
        self.alpha = alpha
        self.beta = beta
        self.q = q
        self.eps_div = eps_div
        self.target = target
        self.anchor_mode = anchor_mode
        self.replacement = replacement
        self.density_denominator = density_denominator
        self.random_state = random_state

    def config(self):
        params = self.get_params()
        seed = params.pop("random_state")
        return PoqgConfig(seed=seed, **params)

    def resample(self, d):
        _, batch = oversample(d, self.config())
        return Resampled.from_generation(d, batch)
