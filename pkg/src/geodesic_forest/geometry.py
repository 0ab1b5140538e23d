"""Hyperboloid-model geometry: distances, disk conversions, split planes.

Points live on the upper sheet of the two-sheeted hyperboloid

    <x, x>_L = -1/K,   x_0 > 0,

embedded in (D+1)-dimensional Minkowski space with signature
(-, +, ..., +). Index 0 is the timelike coordinate, K > 0 is the
curvature parameter (the space has constant curvature -K).

All functions are pure and accept batched arrays; the trailing axis is
the ambient coordinate axis. Scalar inputs give scalar outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Manifold",
    "OffManifoldError",
    "minkowski_inner",
    "origin",
    "check_points",
    "hyperbolic_distance",
    "project_to_sheet",
    "to_poincare",
    "from_poincare",
    "to_klein",
    "from_klein",
    "geodesic_vertex_scale",
    "point_angle",
    "point_angles",
    "midpoint_angle",
    "exp_map_origin",
    "parallel_transport_from_origin",
    "exp_map",
    "geodesic_point",
]

# Lower limit on the arccosh argument before we call the inputs invalid
# rather than rounding back to 1.
_DISTANCE_ARG_SLACK = 1e-6

# Constraint residual |K <x,x>_L + 1| allowed on inputs (loose) and on
# values we construct ourselves (strict).
_ON_MANIFOLD_TOL = 1e-6
_ON_MANIFOLD_TOL_STRICT = 1e-9


class OffManifoldError(ValueError):
    """Input points do not satisfy the hyperboloid constraint."""


@dataclass(frozen=True)
class Manifold:
    """Geometry descriptor shared by datasets and models.

    kind is "hyperboloid" or "euclidean". For the hyperboloid, ``dim``
    is the manifold dimension D and ambient vectors have D+1 entries;
    for euclidean data, ``dim`` is simply the feature count and
    curvature is ignored (stored as 0.0).
    """

    kind: str
    dim: int
    curvature: float = 1.0

    def __post_init__(self):
        if self.kind not in ("hyperboloid", "euclidean"):
            raise ValueError(f"unknown manifold kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.kind == "hyperboloid" and not self.curvature > 0:
            raise ValueError(f"curvature must be > 0, got {self.curvature}")

    @classmethod
    def hyperboloid(cls, dim: int, curvature: float = 1.0) -> "Manifold":
        return cls("hyperboloid", dim, float(curvature))

    @classmethod
    def euclidean(cls, dim: int) -> "Manifold":
        return cls("euclidean", dim, 0.0)

    @property
    def ambient_dim(self) -> int:
        """Number of coordinates per point."""
        return self.dim + 1 if self.kind == "hyperboloid" else self.dim

    def origin_point(self) -> np.ndarray:
        if self.kind != "hyperboloid":
            raise ValueError("origin is only defined for hyperboloid geometry")
        return origin(self.dim, self.curvature)


def minkowski_inner(u, v):
    """Minkowski inner product along the last axis.

    <u, v>_L = -u_0 v_0 + sum_i u_i v_i. Broadcasts like np.sum of an
    elementwise product.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    prod = u * v
    return prod[..., 1:].sum(axis=-1) - prod[..., 0]


def origin(dim: int, curvature: float = 1.0) -> np.ndarray:
    """Apex of the upper sheet: (1/sqrt(K), 0, ..., 0)."""
    o = np.zeros(dim + 1, dtype=np.float64)
    o[0] = 1.0 / np.sqrt(curvature)
    return o


def check_points(x, curvature: float = 1.0, *, strict: bool = False):
    """Validate hyperboloid membership; returns the input as float64.

    Raises OffManifoldError listing the first offending flat indices.
    strict=True tightens the residual tolerance from 1e-6 to 1e-9 (for
    values produced by our own constructions rather than loaded files).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] < 2:
        raise OffManifoldError(
            f"ambient points need at least 2 coordinates, got shape {x.shape}"
        )
    if x.size == 0:
        return x
    tol = _ON_MANIFOLD_TOL_STRICT if strict else _ON_MANIFOLD_TOL
    residual = np.abs(curvature * minkowski_inner(x, x) + 1.0)
    # The constraint is a difference of O(x0^2) terms, so rounding noise
    # scales with the squared coordinates; tolerate relative to that.
    scale = 1.0 + curvature * np.sum(x * x, axis=-1)
    bad = (residual > tol * scale) | (x[..., 0] <= 0)
    if np.any(bad):
        idx = np.flatnonzero(np.atleast_1d(bad))
        worst = float(np.max(np.atleast_1d(residual)))
        raise OffManifoldError(
            f"{idx.size} point(s) off the hyperboloid (K={curvature}); "
            f"first indices {idx[:5].tolist()}, worst residual {worst:.3e}"
        )
    return x


def project_to_sheet(x, curvature: float = 1.0):
    """Recompute x_0 from the spacelike part: sqrt(1/K + |x_s|^2).

    Collapses accumulated rounding (compositions of transport and exp
    maps drift by ~1e-9 at distant points) back to ~1e-16 residuals
    without moving the spacelike coordinates.
    """
    x = np.asarray(x, dtype=np.float64).copy()
    sq = np.sum(x[..., 1:] ** 2, axis=-1)
    x[..., 0] = np.sqrt(1.0 / curvature + sq)
    return x


def hyperbolic_distance(x, y, curvature: float = 1.0, *, validate: bool = True):
    """Geodesic distance arccosh(-K <x,y>_L) / sqrt(K).

    The arccosh argument is >= 1 for any pair on the manifold; rounding
    can push it slightly below, so values in [1 - 1e-6, 1) are clamped
    to 1. Anything lower means the inputs were bad and raises.
    """
    if validate:
        x = check_points(x, curvature)
        y = check_points(y, curvature)
    arg = -curvature * minkowski_inner(x, y)
    if np.any(arg < 1.0 - _DISTANCE_ARG_SLACK):
        raise OffManifoldError(
            f"distance argument {float(np.min(arg)):.6f} below 1; "
            "inputs are not both on the upper sheet"
        )
    return np.arccosh(np.maximum(arg, 1.0)) / np.sqrt(curvature)


# ---------------------------------------------------------------------------
# Disk models

def to_poincare(x, curvature: float = 1.0, *, validate: bool = True):
    """Project onto the Poincare disk: p_i = x_i / (1/sqrt(K) + x_0)."""
    if validate:
        x = check_points(x, curvature)
    else:
        x = np.asarray(x, dtype=np.float64)
    radius = 1.0 / np.sqrt(curvature)
    return x[..., 1:] / (radius + x[..., :1])


def from_poincare(p, curvature: float = 1.0):
    """Lift a Poincare-disk point back to the hyperboloid.

    x_0 = (1/sqrt(K)) (1 + |p|^2) / (1 - |p|^2)
    x_i = (1/sqrt(K)) 2 p_i / (1 - |p|^2)
    """
    p = np.asarray(p, dtype=np.float64)
    sq = np.sum(p * p, axis=-1, keepdims=True)
    if np.any(sq >= (1.0 - 1e-12) ** 2):
        raise ValueError("Poincare point norm >= 1 - 1e-12; not inside the disk")
    radius = 1.0 / np.sqrt(curvature)
    denom = 1.0 - sq
    x0 = radius * (1.0 + sq) / denom
    xs = radius * 2.0 * p / denom
    return np.concatenate([x0, xs], axis=-1)


def to_klein(x, curvature: float = 1.0, *, validate: bool = True):
    """Project onto the Klein disk: k_i = x_i / x_0 (gnomonic)."""
    if validate:
        x = check_points(x, curvature)
    else:
        x = np.asarray(x, dtype=np.float64)
    return x[..., 1:] / x[..., :1]


def from_klein(k, curvature: float = 1.0):
    """Lift a Klein-disk point: x_0 = 1 / (sqrt(K) sqrt(1 - |k|^2))."""
    k = np.asarray(k, dtype=np.float64)
    sq = np.sum(k * k, axis=-1, keepdims=True)
    if np.any(sq >= 1.0):
        raise ValueError("Klein point norm >= 1; not inside the disk")
    x0 = 1.0 / (np.sqrt(curvature) * np.sqrt(1.0 - sq))
    return np.concatenate([x0, x0 * k], axis=-1)


# ---------------------------------------------------------------------------
# Split planes

def geodesic_vertex_scale(theta, curvature: float = 1.0):
    """Scale factor putting (sin t, cos t) onto the hyperboloid.

    The plane x_0 cos t = x_d sin t meets the upper sheet only for
    t in (pi/4, 3pi/4); the meeting point closest to the apex is
    scale * (sin t, cos t) with scale = sqrt(-1/cos 2t) / sqrt(K).
    """
    theta = np.asarray(theta, dtype=np.float64)
    if np.any(theta <= np.pi / 4) or np.any(theta >= 3 * np.pi / 4):
        raise ValueError("angle outside (pi/4, 3pi/4): plane misses the sheet")
    out = np.sqrt(-1.0 / np.cos(2.0 * theta)) / np.sqrt(curvature)
    return out if out.ndim else float(out)


def point_angle(x, d: int):
    """Angle of the unique split plane through x about spacelike axis d.

    atan2(x_0, x_d), always in (pi/4, 3pi/4) on the upper sheet; x_d = 0
    gives exactly pi/2. d ranges over 1..D (0 is the timelike axis).
    """
    x = np.asarray(x, dtype=np.float64)
    if not 1 <= d <= x.shape[-1] - 1:
        raise ValueError(f"split axis {d} out of range 1..{x.shape[-1] - 1}")
    out = np.arctan2(x[..., 0], x[..., d])
    return out if out.ndim else float(out)


def point_angles(x):
    """All per-axis plane angles at once: shape (..., D)."""
    x = np.asarray(x, dtype=np.float64)
    return np.arctan2(x[..., :1], x[..., 1:])


def midpoint_angle(theta_a, theta_b):
    """Angle of the plane hyperbolically equidistant from two planes.

    For plane angles in (pi/4, 3pi/4), the equidistant angle t solves

        cot^2 t - 2 V cot t + 1 = 0,   V = cos(tb - ta) / sin(ta + tb),

    and the root lying between the inputs is the smaller-magnitude one,
    computed cancellation-free as sign(V) / (|V| + sqrt(V^2 - 1)).
    Equal inputs return themselves; ta + tb = pi returns pi/2. The
    result does not depend on curvature.
    """
    ta = np.asarray(theta_a, dtype=np.float64)
    tb = np.asarray(theta_b, dtype=np.float64)
    scalar = ta.ndim == 0 and tb.ndim == 0
    ta, tb = np.broadcast_arrays(ta, tb)
    if (
        np.any(ta <= np.pi / 4)
        or np.any(ta >= 3 * np.pi / 4)
        or np.any(tb <= np.pi / 4)
        or np.any(tb >= 3 * np.pi / 4)
    ):
        raise ValueError("plane angles must lie in (pi/4, 3pi/4)")
    lo = np.minimum(ta, tb)
    hi = np.maximum(ta, tb)

    s = np.sin(lo + hi)
    # Guard the symmetric case sin(lo+hi) ~ 0 against division blowup;
    # those lanes are overwritten with pi/2 below.
    symmetric = lo + hi == np.pi
    safe_s = np.where(symmetric, 1.0, s)
    v = np.cos(hi - lo) / safe_s
    disc = v * v - 1.0
    # Symmetric lanes computed v with the placeholder divisor, so their
    # disc is meaningless; they resolve to pi/2 below regardless.
    disc = np.where(symmetric, 0.0, disc)
    # Analytically disc = cos(2 lo) cos(2 hi) / sin^2(lo+hi) >= 0; allow
    # rounding to dip to -1e-12 and treat anything worse as caller error.
    if np.any(disc < -1e-12):
        raise ValueError("midpoint discriminant went negative; bad inputs")
    disc = np.maximum(disc, 0.0)
    root = np.sign(v) / (np.abs(v) + np.sqrt(disc))
    mid = np.arctan2(1.0, root)

    mid = np.where(symmetric, np.pi / 2, mid)
    mid = np.where(lo == hi, lo, mid)
    # The root choice already lands inside [lo, hi]; the clip only
    # swallows final-ulp overshoot so downstream interval tests hold.
    mid = np.clip(mid, lo, hi)
    return float(mid) if scalar else mid


# ---------------------------------------------------------------------------
# Tangent-space maps (sampling support)

def exp_map_origin(v, curvature: float = 1.0):
    """Exponential map at the apex for tangents with zero timelike part.

    exp_o(v) = cosh(r) o + sinh(r) v / (sqrt(K) |v|),  r = sqrt(K) |v|,
    with |v| the Euclidean norm. v = 0 maps to the apex itself.
    """
    v = np.asarray(v, dtype=np.float64)
    if np.any(v[..., 0] != 0.0):
        raise ValueError("tangent at origin must have zero timelike component")
    rt_k = np.sqrt(curvature)
    nrm = np.linalg.norm(v, axis=-1, keepdims=True)
    safe = np.where(nrm == 0.0, 1.0, nrm)
    r = rt_k * nrm
    o = origin(v.shape[-1] - 1, curvature)
    return np.cosh(r) * o + (np.sinh(r) / (rt_k * safe)) * v


def parallel_transport_from_origin(v, mu, curvature: float = 1.0):
    """Transport a tangent at the apex to the tangent space at mu.

    v' = v + <mu, v>_L / (1/K - <o, mu>_L) * (o + mu)

    Preserves the Minkowski norm and lands orthogonal to mu; both
    identities are asserted because the formula is easy to get subtly
    wrong and cheap to check.
    """
    v = np.asarray(v, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    o = origin(mu.shape[-1] - 1, curvature)
    coef = minkowski_inner(mu, v) / (1.0 / curvature - minkowski_inner(o, mu))
    out = v + coef[..., None] * (o + mu)

    scale = 1.0 + np.abs(minkowski_inner(out, out)) + np.abs(
        minkowski_inner(mu, mu)
    )
    assert np.all(np.abs(minkowski_inner(out, mu)) <= 1e-9 * scale), (
        "transport lost tangency"
    )
    assert np.all(
        np.abs(minkowski_inner(out, out) - minkowski_inner(v, v))
        <= 1e-9 * scale
    ), "transport changed the tangent norm"
    return out


def exp_map(mu, u, curvature: float = 1.0):
    """Exponential map at an arbitrary base point.

    exp_mu(u) = cosh(l) mu + sinh(l) u / (sqrt(K) |u|_L),
    l = sqrt(K) |u|_L with |u|_L = sqrt(<u,u>_L). Requires <u, mu>_L = 0.
    """
    mu = np.asarray(mu, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    scale = 1.0 + np.abs(minkowski_inner(u, u)) + np.abs(minkowski_inner(mu, mu))
    if np.any(np.abs(minkowski_inner(u, mu)) > 1e-6 * scale):
        raise ValueError("direction is not tangent to the manifold at mu")
    sq = minkowski_inner(u, u)[..., None]
    # Tangents at points of the upper sheet are spacelike, so sq >= 0 up
    # to rounding.
    nrm = np.sqrt(np.maximum(sq, 0.0))
    safe = np.where(nrm == 0.0, 1.0, nrm)
    rt_k = np.sqrt(curvature)
    lam = rt_k * nrm
    return np.cosh(lam) * mu + (np.sinh(lam) / (rt_k * safe)) * u


def geodesic_point(theta, d: int, t_params, dim: int, curvature: float = 1.0):
    """Point on the split-plane geodesic submanifold at parameters t.

    The plane about axis d at angle theta meets the hyperboloid in a
    (D-1)-dimensional geodesic submanifold, parameterized by folding one
    hyperbolic rotation per remaining spacelike axis into the vertex
    point:

        v  <- scale(theta) * (sin theta at axis 0, cos theta at axis d)
        v  <- cosh(t) v + sinh(t)/sqrt(K) e_axis   for each other axis

    Axes are folded in ascending order, skipping d. t_params has shape
    (..., D-1); theta broadcasts against its leading shape. The result
    lies on the manifold and satisfies x_0 cos theta = x_d sin theta.
    """
    if not 1 <= d <= dim:
        raise ValueError(f"split axis {d} out of range 1..{dim}")
    theta = np.asarray(theta, dtype=np.float64)
    t_params = np.asarray(t_params, dtype=np.float64)
    if t_params.shape[-1] != dim - 1:
        raise ValueError(
            f"need {dim - 1} fold parameters for D={dim}, "
            f"got {t_params.shape[-1]}"
        )
    scale = geodesic_vertex_scale(theta, curvature)
    shape = np.broadcast_shapes(theta.shape, t_params.shape[:-1])
    out = np.zeros(shape + (dim + 1,), dtype=np.float64)
    out[..., 0] = scale * np.sin(theta)
    out[..., d] = scale * np.cos(theta)
    rt_k = np.sqrt(curvature)
    axes = [a for a in range(1, dim + 1) if a != d]
    for j, axis in enumerate(axes):
        t = t_params[..., j]
        out = out * np.cosh(t)[..., None]
        out[..., axis] = np.sinh(t) / rt_k
    return out
