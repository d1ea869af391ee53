"""Weighted L_p point-box distances, gap vectors, and clamp projections.

All distances are taken to the *closure* of a box: the infimum over a
half-open box equals the distance to its closure, and attainment inside the
true (possibly open-sided) region is restored by `project_strict`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaError

P_VALUES = (1.0, 2.0, math.inf)


@dataclass(frozen=True)
class NormSpec:
    """p in {1, 2, inf} plus optional positive per-feature weights."""

    p: float = 2.0
    weights: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if float(self.p) not in P_VALUES:
            raise SchemaError(f"unsupported norm order p={self.p}; use 1, 2 or inf")
        object.__setattr__(self, "p", float(self.p))
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.ndim != 1:
                raise SchemaError("weights must be a 1-D vector")
            if not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise SchemaError("weights must be positive and finite")
            object.__setattr__(self, "weights", w)

    def check_dim(self, m: int) -> None:
        if self.weights is not None and self.weights.shape[0] != m:
            raise SchemaError(
                f"weight vector has length {self.weights.shape[0]}, expected {m}"
            )


def _as_vec(x, m_ref=None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise SchemaError("expected a 1-D coordinate vector")
    if m_ref is not None and x.shape[0] != m_ref:
        raise SchemaError(f"dimension mismatch: got {x.shape[0]}, expected {m_ref}")
    return x


def gap_vector(x, lo, hi) -> np.ndarray:
    """Componentwise nonnegative gap max(0, lo-x, x-hi) to the box closure."""
    lo = _as_vec(lo)
    hi = _as_vec(hi, lo.shape[0])
    x = _as_vec(x, lo.shape[0])
    return np.maximum(0.0, np.maximum(lo - x, x - hi))


def _norm_of_gaps(g: np.ndarray, norm: NormSpec) -> np.ndarray | float:
    """Weighted p-norm of a gap vector (last axis is the coordinate axis)."""
    if norm.weights is not None:
        g = g * norm.weights
    if norm.p == 1.0:
        return g.sum(axis=-1)
    if norm.p == 2.0:
        return np.sqrt((g * g).sum(axis=-1))
    return g.max(axis=-1)


def distance(x, lo, hi, norm: NormSpec = NormSpec()) -> float:
    """Weighted L_p distance from x to the closure of box [lo, hi]."""
    g = gap_vector(x, lo, hi)
    norm.check_dim(g.shape[0])
    return float(_norm_of_gaps(g, norm))


def batch_distance(x: np.ndarray, los: np.ndarray, his: np.ndarray,
                   norm: NormSpec) -> np.ndarray:
    """Distances from one point to many boxes; los/his are (n, m) arrays."""
    g = np.maximum(0.0, np.maximum(los - x, x - his))
    norm.check_dim(g.shape[-1])
    return np.atleast_1d(_norm_of_gaps(g, norm))


def project(x, lo, hi) -> np.ndarray:
    """Coordinate-wise clamp of x into [lo, hi]; optimal for every weighted L_p."""
    lo = _as_vec(lo)
    hi = _as_vec(hi, lo.shape[0])
    x = _as_vec(x, lo.shape[0])
    return np.clip(x, lo, hi)


def project_strict(x, lo, hi, lo_open, hi_open, eps) -> np.ndarray:
    """Clamp, then nudge coordinates sitting on an open side into the interior.

    `eps` is a scalar or per-coordinate vector; it must be smaller than every
    interval width so the nudged point stays inside the box.
    """
    lo = _as_vec(lo)
    hi = _as_vec(hi, lo.shape[0])
    x = _as_vec(x, lo.shape[0])
    eps = np.broadcast_to(np.asarray(eps, dtype=float), lo.shape)
    if np.any(eps <= 0) or np.any(eps >= hi - lo):
        raise SchemaError("eps must be positive and smaller than every interval width")
    p = np.clip(x, lo, hi)
    lo_open = np.asarray(lo_open, dtype=bool)
    hi_open = np.asarray(hi_open, dtype=bool)
    on_open_lo = lo_open & (p <= lo)
    on_open_hi = hi_open & (p >= hi)
    p = np.where(on_open_lo, lo + eps, p)
    p = np.where(on_open_hi, hi - eps, p)
    return p
