"""Piecewise-linear classification with labeled Voronoi generator points.

Per-class k-means turns each class into a handful of cluster means;
those means become labeled generator points of a Voronoi tessellation,
a correction stage relabels or prunes them against the training data,
and inference is an argmax over precomputed linear discriminants."""

from .bench import (
    BenchCell,
    BenchConfig,
    BenchReport,
    KnnModel,
    TimingStat,
    emit_report,
    knn_fit,
    knn_predict,
    run_benchmark,
    synthetic_benchmark_data,
    time_op,
)
from .clustering import KMeansConfig, KMeansResult, fit_kmeans, kmeans_pp_init, lloyd
from .datasets import (
    Dataset,
    ScalerParams,
    decision_grid,
    load_benchmark_dataset,
    load_csv,
    load_svmlight,
    make_circles,
    make_gaussian_blobs,
    make_moons,
    standardize_apply,
    standardize_fit,
    write_dataset_csv,
    write_grid_csv,
)
from .fetch import fetch_datasets, verify_checksums
from .tessellation import (
    DiscriminantBank,
    Generator,
    MalformedModelError,
    Model,
    ModelFormatError,
    ModelVersionError,
    NonFiniteModelError,
    assemble,
    correct,
    evaluate,
    fit,
    load_model,
    predict,
    predict_oracle,
    save_model,
    to_discriminants,
)

__version__ = "0.1.0"
