"""Synthetic wrapped-Gaussian mixtures on the hyperboloid, plus CSV I/O.

A mixture is drawn entirely from named sub-streams of one seed (see
rng.py), so datasets are bit-reproducible regardless of worker count.
Files are plain CSV with header ``label,x0,x1,...,xD``; a ``.csv.gz``
suffix reads and writes gzip-compressed text transparently.
"""

from __future__ import annotations

import csv
import gzip
import io
from dataclasses import dataclass

import numpy as np

from . import rng
from .geometry import (
    Manifold,
    OffManifoldError,
    check_points,
    exp_map,
    exp_map_origin,
    from_klein,
    from_poincare,
    parallel_transport_from_origin,
    project_to_sheet,
)

__all__ = [
    "Dataset",
    "GaussianMixtureSpec",
    "sample_gaussian_mixture",
    "save_dataset",
    "load_dataset",
]

COORD_KINDS = ("hyperboloid", "poincare", "klein")


@dataclass
class Dataset:
    """Labeled point set tied to its geometry.

    labels are contiguous ids 0..C-1 whenever ``classes`` is set;
    ``classes[labels]`` recovers the raw label column. For targets that
    are not integers (regression files) ``classes`` is None and labels
    hold the raw values.
    """

    points: np.ndarray
    labels: np.ndarray
    manifold: Manifold
    classes: np.ndarray | None = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2:
            raise ValueError("points must be a 2-d array")
        if len(self.points) != len(self.labels):
            raise ValueError("points and labels length mismatch")

    @property
    def n_samples(self) -> int:
        return len(self.points)

    @property
    def n_classes(self) -> int:
        if self.classes is None:
            raise ValueError("dataset has no class vocabulary")
        return len(self.classes)

    def raw_labels(self) -> np.ndarray:
        return self.labels if self.classes is None else self.classes[self.labels]

    def subset(self, index) -> "Dataset":
        return Dataset(
            self.points[index], self.labels[index], self.manifold, self.classes
        )


@dataclass(frozen=True)
class GaussianMixtureSpec:
    """Reproducible mixture description; all parameters derive from seed."""

    n_classes: int
    dim: int
    curvature: float = 1.0
    noise_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_classes < 2:
            raise ValueError("need at least 2 classes")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if not self.curvature > 0:
            raise ValueError("curvature must be > 0")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be >= 0")

    def class_probabilities(self) -> np.ndarray:
        g = rng.stream(self.seed, rng.TAG_MIXTURE_PROBS)
        probs = g.uniform(0.0, 1.0, self.n_classes)
        return probs / probs.sum()

    def class_mean(self, k: int) -> np.ndarray:
        g = rng.stream(self.seed, rng.TAG_CLASS_MEAN, k)
        tangent = np.zeros(self.dim + 1)
        tangent[1:] = g.standard_normal(self.dim)
        return project_to_sheet(exp_map_origin(tangent, self.curvature), self.curvature)

    def class_noise_factor(self, k: int) -> np.ndarray:
        # Tangent noise v = factor @ z, z ~ N(0, I), realizes the class
        # covariance a * C C^T / D without ever forming it.
        g = rng.stream(self.seed, rng.TAG_CLASS_COV, k)
        c = g.standard_normal((self.dim, self.dim))
        return np.sqrt(self.noise_scale / self.dim) * c


def sample_gaussian_mixture(spec: GaussianMixtureSpec, n_samples: int) -> Dataset:
    """Draw a labeled wrapped-Gaussian mixture of size n_samples.

    Per sample i the stream (seed, TAG_SAMPLE, i) supplies one uniform
    (class pick against the cumulative probabilities) and D standard
    normals (tangent noise). Noise is shaped by the class factor, lifted
    with a zero timelike coordinate, transported from the apex to the
    class mean, and exponential-mapped onto the manifold.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    d = spec.dim
    cum = np.cumsum(spec.class_probabilities())
    labels = np.empty(n_samples, dtype=np.int64)
    z = np.empty((n_samples, d), dtype=np.float64)
    for i in range(n_samples):
        g = rng.stream(spec.seed, rng.TAG_SAMPLE, i)
        u = g.uniform()
        labels[i] = min(
            int(np.searchsorted(cum, u, side="right")), spec.n_classes - 1
        )
        z[i] = g.standard_normal(d)

    points = np.empty((n_samples, d + 1), dtype=np.float64)
    for k in range(spec.n_classes):
        idx = np.flatnonzero(labels == k)
        mu = spec.class_mean(k)
        if idx.size == 0:
            continue
        v = np.zeros((idx.size, d + 1), dtype=np.float64)
        v[:, 1:] = z[idx] @ spec.class_noise_factor(k).T
        u = parallel_transport_from_origin(v, mu, spec.curvature)
        points[idx] = project_to_sheet(exp_map(mu, u, spec.curvature), spec.curvature)

    check_points(points, spec.curvature, strict=True)
    manifold = Manifold.hyperboloid(d, spec.curvature)
    return Dataset(points, labels, manifold, classes=np.arange(spec.n_classes))


# ---------------------------------------------------------------------------
# CSV interchange

def _open_text(path, mode: str):
    path = str(path)
    if path.endswith(".gz"):
        return io.TextIOWrapper(gzip.open(path, mode + "b"), encoding="utf-8", newline="")
    return open(path, mode, encoding="utf-8", newline="")


def save_dataset(dataset: Dataset, path) -> None:
    """Write ``label,x0,...,xD`` rows; 17 significant digits round-trip."""
    raw = dataset.raw_labels()
    integral = np.issubdtype(raw.dtype, np.integer)
    with _open_text(path, "w") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["label"] + [f"x{i}" for i in range(dataset.points.shape[1])]
        )
        for label, row in zip(raw, dataset.points):
            lab = str(int(label)) if integral else format(float(label), ".17g")
            writer.writerow([lab] + [format(v, ".17g") for v in row])


def load_dataset(
    path,
    *,
    geometry: str = "hyperboloid",
    curvature: float = 1.0,
    coords: str = "hyperboloid",
) -> Dataset:
    """Read a labeled CSV and validate it against the chosen geometry.

    coords names the coordinate system of the file (hyperboloid,
    poincare, or klein); disk coordinates are lifted to the hyperboloid
    on load. Parse and geometry failures report the offending data row,
    counted from 1 (the header is row 0).
    """
    if coords not in COORD_KINDS:
        raise ValueError(f"coords must be one of {COORD_KINDS}, got {coords!r}")
    with _open_text(path, "r") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if not header or header[0].strip() != "label":
            raise ValueError(f"{path}: first column must be 'label'")
        width = len(header) - 1
        if width < 1:
            raise ValueError(f"{path}: no coordinate columns")
        raw_labels = []
        rows = []
        for i, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != width + 1:
                raise ValueError(
                    f"{path}: row {i} has {len(row)} fields, expected {width + 1}"
                )
            try:
                raw_labels.append(float(row[0]))
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise ValueError(f"{path}: row {i}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    points = np.asarray(rows, dtype=np.float64)
    raw = np.asarray(raw_labels)

    if geometry not in ("hyperboloid", "euclidean"):
        raise ValueError(f"geometry must be hyperboloid or euclidean, got {geometry!r}")
    if coords == "poincare":
        nrm = np.linalg.norm(points, axis=1)
        bad = np.flatnonzero(nrm >= 1.0 - 1e-12)
        if bad.size:
            raise ValueError(
                f"{path}: row {bad[0] + 1}: Poincare norm {nrm[bad[0]]:.6g} "
                "is not inside the unit disk"
            )
        points = from_poincare(points, curvature)
    elif coords == "klein":
        nrm = np.linalg.norm(points, axis=1)
        bad = np.flatnonzero(nrm >= 1.0)
        if bad.size:
            raise ValueError(
                f"{path}: row {bad[0] + 1}: Klein norm {nrm[bad[0]]:.6g} "
                "is not inside the unit disk"
            )
        points = from_klein(points, curvature)

    if geometry == "hyperboloid":
        try:
            check_points(points, curvature)
        except OffManifoldError:
            # rescan row by row so the error names the data row
            for i, point in enumerate(points, start=1):
                try:
                    check_points(point, curvature)
                except OffManifoldError as exc:
                    raise OffManifoldError(f"{path}: row {i}: {exc}") from None
            raise
        manifold = Manifold.hyperboloid(points.shape[1] - 1, curvature)
    else:
        manifold = Manifold.euclidean(points.shape[1])

    if np.all(raw == np.round(raw)):
        classes, labels = np.unique(raw.astype(np.int64), return_inverse=True)
        return Dataset(points, labels.astype(np.int64), manifold, classes)
    return Dataset(points, raw, manifold, classes=None)
