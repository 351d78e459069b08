"""Dataset construction: synthetic generators, delimited-text loaders,
standardization, and decision-boundary grid export."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .tessellation import DiscriminantBank, predict

__all__ = [
    "Dataset",
    "ScalerParams",
    "make_moons",
    "make_circles",
    "make_gaussian_blobs",
    "load_csv",
    "load_svmlight",
    "standardize_fit",
    "standardize_apply",
    "decision_grid",
    "write_grid_csv",
    "write_dataset_csv",
    "BENCHMARK_DATASETS",
    "load_benchmark_dataset",
]


@dataclass
class Dataset:
    """Dense feature matrix with contiguous integer class labels.

    label_names, when present, maps each class id back to the original
    label token of the source file (position = id).
    """

    X: np.ndarray
    y: np.ndarray
    n_classes: int
    name: str = ""
    label_names: tuple[str, ...] | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2 or self.X.shape[0] == 0:
            raise ValueError("X must be a nonempty 2-D matrix")
        if self.y.shape != (self.X.shape[0],):
            raise ValueError("y must have one label per row of X")
        if not np.isfinite(self.X).all():
            raise ValueError("non-finite feature in X")
        if self.n_classes < 1:
            raise ValueError("n_classes must be positive")
        if self.y.min() < 0 or self.y.max() >= self.n_classes:
            raise ValueError(f"labels must lie in [0, {self.n_classes})")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


@dataclass
class ScalerParams:
    """Per-feature affine transform: x -> (x - mean) / scale."""

    mean: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.scale = np.asarray(self.scale, dtype=np.float64)
        if (self.scale <= 0).any():
            raise ValueError("scale entries must be strictly positive")


def make_moons(n: int, noise: float, seed: int) -> Dataset:
    """Two interleaving half-circles: class 0 at (cos t, sin t) and
    class 1 at (1 - cos t, 0.5 - sin t), t evenly spaced over [0, pi]
    inclusive, with isotropic Gaussian noise added per coordinate."""
    if n < 2 or n % 2 != 0:
        raise ValueError(f"n must be an even integer >= 2, got {n}")
    if noise < 0:
        raise ValueError(f"noise must be nonnegative, got {noise}")
    half = n // 2
    t = np.linspace(0.0, np.pi, half)
    X = np.concatenate(
        [
            np.column_stack([np.cos(t), np.sin(t)]),
            np.column_stack([1.0 - np.cos(t), 0.5 - np.sin(t)]),
        ]
    )
    y = np.repeat([0, 1], half)
    rng = np.random.default_rng(seed)
    X = X + rng.normal(0.0, noise, X.shape)
    return Dataset(X=X, y=y, n_classes=2, name=f"moons(n={n},noise={noise},seed={seed})")


def make_circles(n: int, factor: float, noise: float, seed: int) -> Dataset:
    """Concentric circles: class 0 on the unit circle, class 1 on a
    circle of radius factor, angles evenly spaced over [0, 2*pi)."""
    if n < 2 or n % 2 != 0:
        raise ValueError(f"n must be an even integer >= 2, got {n}")
    if not 0.0 < factor < 1.0:
        raise ValueError(f"factor must be in (0, 1), got {factor}")
    if noise < 0:
        raise ValueError(f"noise must be nonnegative, got {noise}")
    half = n // 2
    angles = np.linspace(0.0, 2.0 * np.pi, half, endpoint=False)
    ring = np.column_stack([np.cos(angles), np.sin(angles)])
    X = np.concatenate([ring, factor * ring])
    y = np.repeat([0, 1], half)
    rng = np.random.default_rng(seed)
    X = X + rng.normal(0.0, noise, X.shape)
    return Dataset(
        X=X, y=y, n_classes=2, name=f"circles(n={n},factor={factor},noise={noise},seed={seed})"
    )


def make_gaussian_blobs(n_per_class: int, centers, sigma: float, seed: int) -> Dataset:
    """n_per_class samples per class from an isotropic Gaussian at each
    row of centers."""
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[0] < 1:
        raise ValueError("centers must be a nonempty 2-D matrix")
    if not np.isfinite(centers).all():
        raise ValueError("non-finite value in centers")
    if n_per_class < 1:
        raise ValueError(f"n_per_class must be >= 1, got {n_per_class}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    n_classes, d = centers.shape
    rng = np.random.default_rng(seed)
    X = np.concatenate(
        [centers[c] + rng.normal(0.0, sigma, (n_per_class, d)) for c in range(n_classes)]
    )
    y = np.repeat(np.arange(n_classes), n_per_class)
    return Dataset(
        X=X,
        y=y,
        n_classes=n_classes,
        name=f"blobs(n_per_class={n_per_class},classes={n_classes},sigma={sigma},seed={seed})",
    )


def _label_ids(tokens: list[str], label_map: dict[str, int] | None, where: str):
    """Map raw label tokens to contiguous ids.

    Without a map, distinct tokens sort ascending (numerically when
    every token parses as a number, else lexicographically) and ids
    follow that order. With a map, unknown tokens are an error.
    """
    if label_map is None:
        distinct = sorted(set(tokens))
        try:
            distinct.sort(key=float)
        except ValueError:
            pass
        label_map = {tok: i for i, tok in enumerate(distinct)}
    names = [None] * (max(label_map.values()) + 1)
    for tok, i in label_map.items():
        names[i] = tok
    if any(n is None for n in names):
        raise ValueError("label_map ids must be contiguous from 0")
    ids = np.empty(len(tokens), dtype=np.int64)
    for i, tok in enumerate(tokens):
        if tok not in label_map:
            raise ValueError(f"{where}: unknown label {tok!r}")
        ids[i] = label_map[tok]
    return ids, tuple(str(t) for t in names)


def load_csv(
    path,
    label_column,
    has_header: bool = False,
    label_map: dict[str, int] | None = None,
) -> Dataset:
    """Load a delimited text file into a Dataset.

    label_column is a 0-based column index (negative counts from the
    end) or, when has_header is set, a column name. All other columns
    become features in file order. Labels
    map to contiguous ids (see _label_ids); the id -> original-token
    mapping lands in label_names and in the name metadata.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)

    line = 1
    header = None
    if has_header:
        if not rows:
            raise ValueError(f"{path.name}: empty file")
        header = rows[0]
        rows = rows[1:]
        line = 2
    if not rows:
        raise ValueError(f"{path.name}: no data rows")

    n_cols = len(rows[0])
    if isinstance(label_column, str):
        if header is None:
            raise ValueError("label column given by name requires has_header=True")
        if label_column not in header:
            raise ValueError(f"{path.name}: no column named {label_column!r}")
        label_idx = header.index(label_column)
    else:
        label_idx = int(label_column)
        if label_idx < 0:
            label_idx += n_cols
        if not 0 <= label_idx < n_cols:
            raise ValueError(
                f"{path.name}: label column {label_column} outside 0..{n_cols - 1}"
            )

    feature_idx = [j for j in range(n_cols) if j != label_idx]
    X = np.empty((len(rows), len(feature_idx)), dtype=np.float64)
    tokens = []
    for i, row in enumerate(rows):
        if len(row) != n_cols:
            raise ValueError(
                f"{path.name} line {line + i}: ragged row with {len(row)} columns, expected {n_cols}"
            )
        for out_j, j in enumerate(feature_idx):
            try:
                X[i, out_j] = float(row[j])
            except ValueError:
                raise ValueError(
                    f"{path.name} line {line + i}, column {j}: "
                    f"could not parse {row[j]!r} as a number"
                ) from None
        tokens.append(row[label_idx].strip())

    y, names = _label_ids(tokens, label_map, path.name)
    return Dataset(
        X=X,
        y=y,
        n_classes=len(names),
        name=f"{path.name}|labels={','.join(names)}",
        label_names=names,
    )


def load_svmlight(path, n_features: int, label_map: dict[str, int] | None = None) -> Dataset:
    """Load a "label idx:val ..." file with 1-based feature indices into
    a dense Dataset; absent indices are zero. Comment lines (leading
    '#') and blank lines are skipped."""
    path = Path(path)
    if n_features < 1:
        raise ValueError(f"n_features must be >= 1, got {n_features}")
    rows = []
    tokens = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            tokens.append(parts[0])
            row = np.zeros(n_features, dtype=np.float64)
            for tok in parts[1:]:
                idx_s, sep, val_s = tok.partition(":")
                if not sep:
                    raise ValueError(f"{path.name} line {lineno}: malformed token {tok!r}")
                try:
                    idx = int(idx_s)
                except ValueError:
                    raise ValueError(
                        f"{path.name} line {lineno}: malformed token {tok!r}"
                    ) from None
                if not 1 <= idx <= n_features:
                    raise ValueError(
                        f"{path.name} line {lineno}: feature index {idx} outside [1, {n_features}]"
                    )
                try:
                    row[idx - 1] = float(val_s)
                except ValueError:
                    raise ValueError(
                        f"{path.name} line {lineno}: could not parse value in token {tok!r}"
                    ) from None
            rows.append(row)
    if not rows:
        raise ValueError(f"{path.name}: no data rows")

    y, names = _label_ids(tokens, label_map, path.name)
    return Dataset(
        X=np.vstack(rows),
        y=y,
        n_classes=len(names),
        name=f"{path.name}|labels={','.join(names)}",
        label_names=names,
    )


def standardize_fit(train: Dataset) -> ScalerParams:
    """Per-feature mean and standard deviation of the training data;
    zero-variance features get scale 1 (centered only)."""
    mean = train.X.mean(axis=0)
    std = train.X.std(axis=0)
    return ScalerParams(mean=mean, scale=np.where(std > 0, std, 1.0))


def standardize_apply(params: ScalerParams, ds: Dataset) -> Dataset:
    if params.mean.shape[0] != ds.d:
        raise ValueError(
            f"dimension mismatch: scaler has {params.mean.shape[0]} features, data has {ds.d}"
        )
    return Dataset(
        X=(ds.X - params.mean) / params.scale,
        y=ds.y,
        n_classes=ds.n_classes,
        name=ds.name,
        label_names=ds.label_names,
    )


def decision_grid(bank: DiscriminantBank, x_range, y_range, resolution: int):
    """Classify every point of an inclusive resolution x resolution grid.

    Returns (xy, labels): xy is (resolution**2, 2) in row-major order
    with x as the outer axis, labels the predicted class per row.
    """
    if bank.weights.shape[1] != 2:
        raise ValueError("grid export requires 2-D models")
    (x_lo, x_hi), (y_lo, y_hi) = x_range, y_range
    if not (x_lo < x_hi and y_lo < y_hi):
        raise ValueError("ranges must satisfy lo < hi on both axes")
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {resolution}")
    xs = np.linspace(x_lo, x_hi, resolution)
    ys = np.linspace(y_lo, y_hi, resolution)
    xy = np.column_stack([np.repeat(xs, resolution), np.tile(ys, resolution)])
    return xy, predict(bank, xy)


def write_grid_csv(out, xy: np.ndarray, labels: np.ndarray) -> None:
    """Write grid rows as CSV with header "x,y,label"."""
    close = False
    if isinstance(out, (str, Path)):
        out = open(out, "w", newline="")
        close = True
    try:
        out.write("x,y,label\n")
        for (x, y), lab in zip(xy, labels):
            out.write(f"{float(x)!r},{float(y)!r},{int(lab)}\n")
    finally:
        if close:
            out.close()


def write_dataset_csv(out, ds: Dataset, header: bool = True) -> None:
    """Write a dataset as CSV: feature columns x0..x{d-1}, then the
    integer class id in a final "label" column. Floats use their
    shortest round-trip form, so identical datasets give identical
    bytes."""
    close = False
    if isinstance(out, (str, Path)):
        out = open(out, "w", newline="")
        close = True
    try:
        if header:
            out.write(",".join([f"x{j}" for j in range(ds.d)] + ["label"]) + "\n")
        for row, lab in zip(ds.X, ds.y):
            out.write(",".join(repr(float(v)) for v in row) + f",{int(lab)}\n")
    finally:
        if close:
            out.close()


# On-disk layout written by the fetch step; loaders only touch local files.
BENCHMARK_DATASETS = {
    "optdigits": {"format": "csv", "label_column": 64, "train": "train.csv", "test": "test.csv"},
    "usps": {"format": "svmlight", "n_features": 256, "train": "train.svm", "test": "test.svm"},
    "satimage": {"format": "csv", "label_column": 36, "train": "train.csv", "test": "test.csv"},
    "letter": {"format": "csv", "label_column": 0, "train": "train.csv", "test": "test.csv"},
    "isolet": {"format": "csv", "label_column": 617, "train": "train.csv", "test": "test.csv"},
}


def load_benchmark_dataset(name: str, data_dir) -> tuple[Dataset, Dataset]:
    """Load the train/test pair of a fetched real-world dataset.

    The test file reuses the training file's label mapping so class ids
    agree across the split even if the test file misses a class.
    """
    if name not in BENCHMARK_DATASETS:
        raise ValueError(
            f"unknown dataset {name!r}; expected one of {sorted(BENCHMARK_DATASETS)}"
        )
    info = BENCHMARK_DATASETS[name]
    base = Path(data_dir) / name
    train_path, test_path = base / info["train"], base / info["test"]
    for p in (train_path, test_path):
        if not p.exists():
            raise FileNotFoundError(
                f"{p} not found; run the fetch command to download {name!r} first"
            )
    if info["format"] == "csv":
        train = load_csv(train_path, label_column=info["label_column"])
        shared = {tok: i for i, tok in enumerate(train.label_names)}
        test = load_csv(test_path, label_column=info["label_column"], label_map=shared)
    else:
        train = load_svmlight(train_path, n_features=info["n_features"])
        shared = {tok: i for i, tok in enumerate(train.label_names)}
        test = load_svmlight(test_path, n_features=info["n_features"], label_map=shared)
    train.name = f"{name}/train"
    test.name = f"{name}/test"
    return train, test
