"""Ridge classifiers over precomputed Gram or feature matrices.

One-vs-rest ridge regression on centered one-hot targets. Kernel mode
solves (K + lambda I) alpha = Y - mean(Y) against the training Gram; feature
mode solves (F^T F + lambda I) W = F^T (Y - mean(Y)). Class scores are
mat @ coef + class_means and predictions take the argmax, so the lambda -> inf
limit degrades to the majority class. grid_cv slices a single precomputed
matrix per stratified fold (nothing is recomputed per candidate).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, StratificationError
from .rng import SeedStream
from .utils import run_tasks

__all__ = ["RidgeModel", "fit_ridge", "grid_cv", "stratified_folds"]

MODES = ("kernel", "feature")


@dataclass
class RidgeModel:
    """Fitted one-vs-rest ridge classifier.

    coef has one column per class: dual coefficients alpha (N, C) in kernel
    mode, weights W (F, C) in feature mode. intercept holds the class-mean
    baseline. train_ref keeps the training matrix the model was fitted on.
    """

    mode: str
    classes: np.ndarray
    coef: np.ndarray
    intercept: np.ndarray
    lam: float
    train_ref: np.ndarray

    def scores(self, mat: np.ndarray) -> np.ndarray:
        """Class scores for rows of mat: the cross-Gram K(test, train) in
        kernel mode, the feature matrix in feature mode."""
        mat = np.asarray(mat, dtype=np.float64)
        return mat @ self.coef + self.intercept

    def predict(self, mat: np.ndarray) -> np.ndarray:
        return self.classes[np.argmax(self.scores(mat), axis=1)]


def _one_hot(labels) -> tuple:
    labels = np.asarray(labels)
    classes, inverse = np.unique(labels, return_inverse=True)
    if classes.size < 2:
        raise ValueError(f"need at least 2 classes, got {classes.size}")
    Y = np.zeros((labels.shape[0], classes.size))
    Y[np.arange(labels.shape[0]), inverse] = 1.0
    return classes, inverse, Y


def fit_ridge(mat, labels, lam: float, mode: str = "kernel") -> RidgeModel:
    """Fit a ridge classifier on a precomputed Gram (kernel mode, square
    symmetric) or feature matrix (feature mode, N x F)."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if not (np.isreal(lam) and lam >= 0):
        raise ValueError(f"lambda must be a real number >= 0, got {lam}")
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {mat.shape}")
    labels = np.asarray(labels)
    if labels.shape[0] != mat.shape[0]:
        raise ValueError(
            f"labels length {labels.shape[0]} does not match matrix rows {mat.shape[0]}")
    if mode == "kernel" and mat.shape[0] != mat.shape[1]:
        raise ValueError(f"kernel mode needs a square Gram matrix, got shape {mat.shape}")
    classes, _, Y = _one_hot(labels)
    intercept = Y.mean(axis=0)
    Yc = Y - intercept
    if mode == "kernel":
        system = mat + lam * np.eye(mat.shape[0])
        rhs = Yc
    else:
        system = mat.T @ mat + lam * np.eye(mat.shape[1])
        rhs = mat.T @ Yc
    try:
        coef = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericError(
            f"ridge system is singular ({exc}); use a regularization lambda > 0") from exc
    return RidgeModel(mode, classes, coef, intercept, float(lam), mat)


def stratified_folds(labels, n_folds: int, seed) -> np.ndarray:
    """Deterministic stratified fold assignment (one fold id per row).

    Each class is shuffled by a seeded permutation and dealt round-robin, so
    every fold holds every class; a class with fewer members than folds
    raises StratificationError.
    """
    if n_folds < 2:
        raise ValueError(f"n_folds must be >= 2, got {n_folds}")
    labels = np.asarray(labels)
    stream = seed if isinstance(seed, SeedStream) else SeedStream(seed)
    rng = stream.child("cv_folds").generator()
    folds = np.empty(labels.shape[0], dtype=np.int64)
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if idx.size < n_folds:
            name = cls.item() if isinstance(cls, np.generic) else cls
            raise StratificationError(
                f"class {name!r} has {idx.size} member(s); stratified {n_folds}-fold "
                f"cross-validation needs at least {n_folds} per class")
        perm = rng.permutation(idx)
        folds[perm] = np.arange(idx.size) % n_folds
    return folds


def grid_cv(lambdas, n_folds: int, mat, labels, seed, mode: str = "kernel",
            n_threads: int = 1) -> tuple:
    """Grid search over lambdas by stratified cross-validation accuracy.

    Returns (best_lambda, fold_accuracies) where fold_accuracies are the
    per-fold validation accuracies of the winner. Ties in mean accuracy go
    to the larger lambda. The precomputed mat is sliced per fold, never
    recomputed.
    """
    lambdas = [float(l) for l in lambdas]
    if not lambdas:
        raise ValueError("need at least one candidate lambda")
    mat = np.asarray(mat, dtype=np.float64)
    labels = np.asarray(labels)
    folds = stratified_folds(labels, n_folds, seed)
    accs = np.zeros((len(lambdas), n_folds))
    tasks = [(li, f) for li in range(len(lambdas)) for f in range(n_folds)]

    def work(task):
        li, f = task
        va = folds == f
        tr = ~va
        if mode == "kernel":
            train_mat = mat[np.ix_(tr, tr)]
            val_mat = mat[np.ix_(va, tr)]
        else:
            train_mat = mat[tr]
            val_mat = mat[va]
        model = fit_ridge(train_mat, labels[tr], lambdas[li], mode=mode)
        pred = model.predict(val_mat)
        accs[li, f] = float(np.mean(pred == labels[va]))

    run_tasks(work, tasks, n_threads)
    means = accs.mean(axis=1)
    best = 0
    for i in range(1, len(lambdas)):
        if means[i] > means[best] or (means[i] == means[best] and lambdas[i] > lambdas[best]):
            best = i
    return lambdas[best], accs[best].copy()
