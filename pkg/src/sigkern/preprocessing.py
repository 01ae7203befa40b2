"""Sequence tabulation and augmentation.

Tabulation turns a ragged set of sequences (possibly with missing entries)
into a uniform-length batch: missing values are filled channel-wise by
linear interpolation on the integer index grid, then every sequence is
resampled to the common length with the piecewise-linear interpolant

    f(t) = x_i + (L-1) * (t - i/(L-1)) * (x_{i+1} - x_i),  t in [i/(L-1), (i+1)/(L-1)]

evaluated at t = j/(L~-1). Grid points that land exactly on a source index
are copied bitwise, so resampling a batch to its own length is a no-op.

Augmentation applies, in this order: global max-abs normalization,
lead-lag ((x_i) -> (x_{i+1}, x_i), length L-1, width 2d), a prepended time
channel max_time * i/(L-1), a prepended zero basepoint step, and a final
optional down-sampling to max_len via the tabulator formula.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sequences import RaggedSequenceSet, SequenceBatch

__all__ = [
    "AugmentorOptions",
    "SequenceAugmentor",
    "tabulate",
    "augment",
]


@dataclass(frozen=True)
class AugmentorOptions:
    """Which augmentation steps to run; see augment() for the fixed order."""

    normalize: bool = False
    lead_lag: bool = False
    add_time: bool = False
    basepoint: bool = False
    max_time: float = 1.0
    max_len: int | None = None

    def __post_init__(self):
        if not (np.isfinite(self.max_time) and self.max_time > 0):
            raise ValueError(f"max_time must be a positive real, got {self.max_time}")
        if self.max_len is not None and not (
                isinstance(self.max_len, (int, np.integer)) and self.max_len >= 1):
            raise ValueError(f"max_len must be a positive integer or None, got {self.max_len}")


def _resample(x: np.ndarray, target_len: int) -> np.ndarray:
    """Resample one (L, d) array to (target_len, d) with the linear interpolant.

    Grid points falling exactly on a source index reproduce that point
    bitwise; in particular target_len == L returns a plain copy.
    """
    L = x.shape[0]
    if target_len == L:
        return x.copy()
    if target_len == 1 or L == 1:
        return np.repeat(x[:1], target_len, axis=0)
    u = np.arange(target_len) * (L - 1) / (target_len - 1)
    idx = np.minimum(np.floor(u).astype(np.int64), L - 2)
    frac = u - idx
    out = x[idx] + frac[:, None] * (x[idx + 1] - x[idx])
    exact = frac == 0.0
    if exact.any():
        out[exact] = x[idx[exact]]
    return out


def _fill_missing(x: np.ndarray, seq_id: int) -> np.ndarray:
    """Replace NaNs channel-wise by linear interpolation on the index grid.

    Positions outside the observed range take the nearest observed value.
    """
    if not np.isnan(x).any():
        return x
    x = x.copy()
    grid = np.arange(x.shape[0], dtype=np.float64)
    for c in range(x.shape[1]):
        col = x[:, c]
        observed = ~np.isnan(col)
        n_obs = int(observed.sum())
        if n_obs < 2:
            raise ValueError(
                f"sequence {seq_id}: channel {c} has {n_obs} observed value(s); "
                f"tabulation needs at least 2 per channel")
        if n_obs < col.size:
            x[:, c] = np.interp(grid, grid[observed], col[observed])
    return x


def tabulate(seqs, max_len: int | None = None) -> SequenceBatch:
    """Uniform-length batch from ragged sequences with missing-value handling.

    seqs: RaggedSequenceSet or a list of (L_i, d) arrays (NaN marks missing).
    The common length is min(max observed length, max_len) when max_len is
    given. Each channel of each sequence must have at least 2 observed
    values.
    """
    if isinstance(seqs, RaggedSequenceSet):
        arrays = seqs.sequences
        ids = np.asarray(seqs.ids, dtype=np.int64)
    else:
        arrays = [np.asarray(s, dtype=np.float64) for s in seqs]
        ids = np.arange(len(arrays), dtype=np.int64)
    if not arrays:
        raise ValueError("tabulate needs at least one sequence")
    dims = {a.shape[1] for a in arrays}
    if len(dims) != 1:
        raise ValueError(f"sequences disagree on channel count: {sorted(dims)}")
    target = max(a.shape[0] for a in arrays)
    if max_len is not None:
        if max_len < 1:
            raise ValueError(f"max_len must be positive, got {max_len}")
        target = min(target, int(max_len))
    filled = [_fill_missing(a, int(i)) for a, i in zip(arrays, ids)]
    for a, i in zip(filled, ids):
        if a.shape[0] < 2 and a.shape[1] > 0:
            raise ValueError(
                f"sequence {int(i)}: channel 0 has {a.shape[0]} observed value(s); "
                f"tabulation needs at least 2 per channel")
    data = np.stack([_resample(a, target) for a in filled])
    return SequenceBatch(data, ids)


def _apply_augment(data: np.ndarray, opts: AugmentorOptions, scale: float | None) -> np.ndarray:
    if opts.normalize and scale is not None and scale > 0.0:
        data = data / scale
    if opts.lead_lag:
        if data.shape[1] < 2:
            raise ValueError("lead_lag requires sequences of length >= 2")
        data = np.concatenate([data[:, 1:, :], data[:, :-1, :]], axis=2)
    if opts.add_time:
        N, L, _ = data.shape
        if L > 1:
            t = opts.max_time * np.arange(L) / (L - 1)
        else:
            t = np.zeros(1)
        tchan = np.broadcast_to(t[None, :, None], (N, L, 1))
        data = np.concatenate([tchan, data], axis=2)
    if opts.basepoint:
        N, L, d = data.shape
        data = np.concatenate([np.zeros((N, 1, d)), data], axis=1)
    if opts.max_len is not None and data.shape[1] > opts.max_len:
        data = np.stack([_resample(seq, opts.max_len) for seq in data])
    return data


def augment(batch, opts: AugmentorOptions) -> SequenceBatch:
    """Apply the selected augmentation steps to a batch (pure; the
    normalization statistic is the batch's own max absolute value)."""
    if not isinstance(batch, SequenceBatch):
        batch = SequenceBatch(np.asarray(batch, dtype=np.float64))
    scale = float(np.max(np.abs(batch.data))) if (opts.normalize and batch.data.size) else None
    return SequenceBatch(_apply_augment(batch.data, opts, scale), batch.ids.copy())


class SequenceAugmentor:
    """fit/transform wrapper around augment() that freezes the normalization
    statistic on the training batch."""

    def __init__(self, options: AugmentorOptions):
        self.options = options
        self.scale_: float | None = None
        self._fitted = False

    def fit(self, batch) -> "SequenceAugmentor":
        if not isinstance(batch, SequenceBatch):
            batch = SequenceBatch(np.asarray(batch, dtype=np.float64))
        if self.options.normalize:
            self.scale_ = float(np.max(np.abs(batch.data))) if batch.data.size else 0.0
        self._fitted = True
        return self

    def transform(self, batch) -> SequenceBatch:
        if not self._fitted:
            raise RuntimeError("SequenceAugmentor.transform called before fit")
        if not isinstance(batch, SequenceBatch):
            batch = SequenceBatch(np.asarray(batch, dtype=np.float64))
        return SequenceBatch(_apply_augment(batch.data, self.options, self.scale_),
                             batch.ids.copy())

    def fit_transform(self, batch) -> SequenceBatch:
        return self.fit(batch).transform(batch)
