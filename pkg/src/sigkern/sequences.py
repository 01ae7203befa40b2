"""Sequence containers, synthetic data and CSV wire formats.

A sequence is an ordered list of points in ``R^d``. Uniform collections live
in a :class:`SequenceBatch` (one ``(N, L, d)`` array); collections with
varying lengths or missing values live in a :class:`RaggedSequenceSet` and
are made uniform with :func:`sigkern.preprocessing.tabulate`.

Sequence CSV wire format: header ``seq_id,step,c0,...,c{d-1}``, one row per
observed step, rows sorted by ``(seq_id, step)``, empty cells denoting
missing values. Matrix CSV is headerless comma-separated rows with floats
printed as shortest round-trip decimals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError
from .rng import SeedStream

__all__ = [
    "SequenceBatch",
    "RaggedSequenceSet",
    "gen_brownian",
    "load_sequences_csv",
    "write_sequences_csv",
    "write_matrix_csv",
]


@dataclass
class SequenceBatch:
    """N sequences of equal length L with d channels, as one (N, L, d) array."""

    data: np.ndarray
    ids: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 3:
            raise ValueError(f"batch data must be (N, L, d), got shape {self.data.shape}")
        if self.ids is None:
            self.ids = np.arange(self.data.shape[0], dtype=np.int64)
        else:
            self.ids = np.asarray(self.ids, dtype=np.int64)
            if self.ids.shape != (self.data.shape[0],):
                raise ValueError("ids must have one entry per sequence")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def length(self) -> int:
        return self.data.shape[1]

    @property
    def dim(self) -> int:
        return self.data.shape[2]

    def points(self) -> np.ndarray:
        """All points stacked, shape (N*L, d)."""
        return self.data.reshape(-1, self.data.shape[2])


@dataclass
class RaggedSequenceSet:
    """Sequences of possibly different lengths; NaN marks missing values."""

    sequences: list
    ids: list = None  # type: ignore[assignment]

    def __post_init__(self):
        self.sequences = [np.asarray(s, dtype=np.float64) for s in self.sequences]
        for s in self.sequences:
            if s.ndim != 2:
                raise ValueError(f"each sequence must be (L_i, d), got shape {s.shape}")
        dims = {s.shape[1] for s in self.sequences}
        if len(dims) > 1:
            raise ValueError(f"sequences disagree on channel count: {sorted(dims)}")
        if self.ids is None:
            self.ids = list(range(len(self.sequences)))
        elif len(self.ids) != len(self.sequences):
            raise ValueError("ids must have one entry per sequence")

    @property
    def n(self) -> int:
        return len(self.sequences)

    @property
    def dim(self) -> int:
        return self.sequences[0].shape[1] if self.sequences else 0

    def to_batch(self) -> SequenceBatch:
        """Stack into a SequenceBatch; lengths must already agree and no NaN."""
        if not self.sequences:
            raise ValueError("empty sequence set")
        lengths = {s.shape[0] for s in self.sequences}
        if len(lengths) > 1:
            raise ValueError(f"sequences have unequal lengths {sorted(lengths)}; tabulate first")
        data = np.stack(self.sequences)
        if np.isnan(data).any():
            raise ValueError("sequences contain missing values; tabulate first")
        return SequenceBatch(data, np.asarray(self.ids, dtype=np.int64))


def gen_brownian(n: int, length: int, dim: int, seed: SeedStream,
                 drift=None) -> SequenceBatch:
    """Sample n standard Brownian-walk sequences of `length` points in R^d.

    Every sequence starts at the origin; increments are i.i.d. Gaussian with
    variance 1/(length-1) per channel, so the endpoint has unit variance per
    channel. `drift`, if given, is added to every increment's mean (scalar or
    length-d vector, per step). Each sequence draws from its own child
    stream, so the batch is reproducible sequence by sequence.
    """
    if n < 1:
        raise ValueError(f"need n >= 1 sequences, got {n}")
    if length < 2:
        raise ValueError(f"need length >= 2 points, got {length}")
    if dim < 1:
        raise ValueError(f"need dim >= 1 channels, got {dim}")
    if drift is None:
        drift_vec = np.zeros(dim)
    else:
        drift_vec = np.broadcast_to(np.asarray(drift, dtype=np.float64), (dim,))
    scale = math.sqrt(1.0 / (length - 1))
    data = np.empty((n, length, dim))
    data[:, 0, :] = 0.0
    for i in range(n):
        rng = seed.child(f"seq{i}").generator()
        steps = rng.standard_normal((length - 1, dim)) * scale + drift_vec
        np.cumsum(steps, axis=0, out=data[i, 1:, :])
    return SequenceBatch(data)


def _format_value(v: float) -> str:
    f = float(v)
    if math.isfinite(f) and f == int(f) and abs(f) < 1e16:
        return str(int(f))
    return repr(f)


def write_matrix_csv(path, matrix: np.ndarray) -> None:
    """Write a 2-D array as headerless CSV with round-trip float formatting."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ValueError(f"matrix must be 2-D, got shape {matrix.shape}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in matrix:
            fh.write(",".join(_format_value(v) for v in row))
            fh.write("\n")


def write_sequences_csv(path, data) -> None:
    """Write a SequenceBatch or RaggedSequenceSet in the sequence wire format."""
    if isinstance(data, SequenceBatch):
        seqs = list(data.data)
        ids = list(data.ids)
    elif isinstance(data, RaggedSequenceSet):
        seqs = data.sequences
        ids = data.ids
    else:
        raise ValueError(f"expected SequenceBatch or RaggedSequenceSet, got {type(data)!r}")
    if not seqs:
        raise ValueError("nothing to write: empty sequence collection")
    d = seqs[0].shape[1]
    header = "seq_id,step," + ",".join(f"c{j}" for j in range(d))
    order = np.argsort(np.asarray(ids), kind="stable")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for idx in order:
            sid = int(ids[idx])
            for step, point in enumerate(seqs[idx]):
                cells = ["" if math.isnan(v) else _format_value(v) for v in point]
                fh.write(f"{sid},{step}," + ",".join(cells) + "\n")


def _parse_int(cell: str, what: str, line: int) -> int:
    try:
        value = int(cell)
    except ValueError:
        raise ParseError(f"{what} must be an integer, got {cell!r}", line=line) from None
    if value < 0:
        raise ParseError(f"{what} must be non-negative, got {value}", line=line)
    return value


def load_sequences_csv(path) -> RaggedSequenceSet:
    """Load a sequence CSV into a RaggedSequenceSet (NaN for missing cells).

    Sequences come back ordered by seq_id; rows within a sequence are ordered
    by step. Malformed rows raise ParseError naming the line number.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty file", line=1)
    header = [h.strip() for h in lines[0].split(",")]
    if len(header) < 3 or header[0] != "seq_id" or header[1] != "step":
        raise ParseError(
            f"header must be 'seq_id,step,c0,...', got {lines[0]!r}", line=1)
    d = len(header) - 2
    rows: dict[int, list] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        cells = raw.split(",")
        if len(cells) != d + 2:
            raise ParseError(
                f"expected {d + 2} fields, got {len(cells)}", line=lineno)
        sid = _parse_int(cells[0].strip(), "seq_id", lineno)
        step = _parse_int(cells[1].strip(), "step", lineno)
        values = np.empty(d)
        for j, cell in enumerate(cells[2:]):
            cell = cell.strip()
            if cell == "":
                values[j] = np.nan
            else:
                try:
                    values[j] = float(cell)
                except ValueError:
                    raise ParseError(
                        f"channel c{j} must be numeric or empty, got {cell!r}",
                        line=lineno) from None
        bucket = rows.setdefault(sid, [])
        bucket.append((step, lineno, values))
    if not rows:
        raise ParseError("file contains a header but no data rows", line=2)
    sequences = []
    ids = []
    for sid in sorted(rows):
        entries = sorted(rows[sid], key=lambda e: e[0])
        steps = [e[0] for e in entries]
        for k in range(1, len(steps)):
            if steps[k] == steps[k - 1]:
                raise ParseError(
                    f"duplicate step {steps[k]} for seq_id {sid}",
                    line=entries[k][1])
        sequences.append(np.stack([e[2] for e in entries]))
        ids.append(sid)
    return RaggedSequenceSet(sequences, ids)
