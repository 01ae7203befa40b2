"""Random low-dimensional projections of vectors and of outer products.

Two families:

* Type 1 (``gaussian``, ``subsampling``, ``verysparse``) projects a vector
  ``x`` linearly; applied to an outer product ``u (x) v`` it operates on the
  flattened product, and the sparse kinds touch only the sampled coordinates
  (``u (x) v`` is never materialized).
* Type 2 (``tensor_sketch``, ``trp``, ``diagonal``) keeps the result of a
  previous projection as the left operand and composes slot by slot, which
  is what the tensorized signature recursions consume. A state fitted with
  ``n_slots = m`` carries m independent slot randomizations: slot 0 backs
  :func:`project`, slots 1..m-1 back :func:`project_outer`.

All states are immutable after :func:`fit_projection`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fftconv import circular_convolve
from .rng import SeedStream

__all__ = [
    "ProjectionSpec",
    "ProjectionState",
    "PROJECTION_KINDS",
    "TYPE1_KINDS",
    "TYPE2_KINDS",
    "fit_projection",
    "project",
    "project_outer",
    "circular_convolve",
]

TYPE1_KINDS = ("gaussian", "subsampling", "verysparse")
TYPE2_KINDS = ("tensor_sketch", "trp", "diagonal")
PROJECTION_KINDS = TYPE1_KINDS + TYPE2_KINDS


@dataclass(frozen=True)
class ProjectionSpec:
    """Projection kind and sizes.

    n_components is the target dimension Q. sparsity picks the nonzero rate
    s(d) of verysparse matrices: "sqrt" -> 1/sqrt(d), "log" -> ln(d)/d.
    internal_size is the block size q of the diagonal kind. n_slots is the
    number of independent composition slots (type 2).
    """

    kind: str
    n_components: int = 100
    sparsity: str = "sqrt"
    internal_size: int = 1
    n_slots: int = 1

    def __post_init__(self):
        if self.kind not in PROJECTION_KINDS:
            raise ValueError(f"unknown projection kind {self.kind!r}; choose from {PROJECTION_KINDS}")
        if not (isinstance(self.n_components, (int, np.integer)) and self.n_components >= 1):
            raise ValueError(f"n_components must be a positive integer, got {self.n_components}")
        if self.sparsity not in ("sqrt", "log"):
            raise ValueError(f"sparsity must be 'sqrt' or 'log', got {self.sparsity!r}")
        if self.internal_size not in (1, 2):
            raise ValueError(f"internal_size must be 1 or 2, got {self.internal_size}")
        if not (isinstance(self.n_slots, (int, np.integer)) and self.n_slots >= 1):
            raise ValueError(f"n_slots must be a positive integer, got {self.n_slots}")
        if self.kind in TYPE1_KINDS and self.n_slots != 1:
            raise ValueError(f"{self.kind} does not compose; n_slots must be 1")


@dataclass
class ProjectionState:
    """Frozen randomness of a fitted projection (one payload per slot)."""

    spec: ProjectionSpec
    dim: int
    out_dim: int
    slots: list


def _sparse_rate(spec: ProjectionSpec, dim: int) -> float:
    if spec.sparsity == "sqrt":
        return 1.0 / math.sqrt(dim)
    return math.log(dim) / dim if dim > 1 else 1.0


def _fit_slot(spec: ProjectionSpec, dim: int, rng: np.random.Generator):
    Q = spec.n_components
    if spec.kind in ("gaussian", "trp"):
        return {"Z": rng.standard_normal((dim, Q))}
    if spec.kind == "subsampling":
        if Q > dim:
            raise ValueError(f"subsampling needs n_components <= dim, got Q={Q} > dim={dim}")
        return {"idx": rng.choice(dim, size=Q, replace=False)}
    if spec.kind == "verysparse":
        rate = _sparse_rate(spec, dim)
        signs = rng.choice(np.array([-1.0, 1.0]), size=(dim, Q))
        mask = rng.random((dim, Q)) < rate
        Z = signs * mask
        rows = np.flatnonzero(mask.any(axis=1))
        return {"rows": rows, "Zsub": Z[rows], "rate": rate}
    if spec.kind == "tensor_sketch":
        h = rng.integers(0, Q, size=dim)
        s = rng.choice(np.array([-1.0, 1.0]), size=dim)
        scatter = np.zeros((dim, Q))
        scatter[np.arange(dim), h] = s
        return {"h": h, "s": s, "scatter": scatter}
    # diagonal: no randomness
    return {}


def fit_projection(spec: ProjectionSpec, dim: int, seed: SeedStream) -> ProjectionState:
    """Sample all slot randomness for inputs of dimension `dim` and freeze it.

    For type-1 outer-product use, fit with dim = d_u * d_v; the state then
    projects either a dim-vector or an outer product with matching factor
    dimensions.
    """
    if not (isinstance(dim, (int, np.integer)) and dim >= 1):
        raise ValueError(f"dim must be a positive integer, got {dim}")
    if spec.kind == "diagonal":
        if dim % spec.internal_size != 0:
            raise ValueError(
                f"diagonal needs dim divisible by internal_size={spec.internal_size}, got {dim}")
        return ProjectionState(spec, int(dim), int(dim), [{} for _ in range(spec.n_slots)])
    slots = [
        _fit_slot(spec, int(dim), seed.child(f"slot{j}").generator())
        for j in range(spec.n_slots)
    ]
    return ProjectionState(spec, int(dim), spec.n_components, slots)


def _apply_type1(state: ProjectionState, x: np.ndarray) -> np.ndarray:
    spec = state.spec
    Q = spec.n_components
    slot = state.slots[0]
    if spec.kind == "gaussian":
        return (x @ slot["Z"]) / math.sqrt(Q)
    if spec.kind == "subsampling":
        return math.sqrt(state.dim / Q) * x[..., slot["idx"]]
    scale = 1.0 / math.sqrt(slot["rate"] * Q)
    return scale * (x[..., slot["rows"]] @ slot["Zsub"])


def project(state: ProjectionState, x) -> np.ndarray:
    """One-argument application psi(x); x has shape (..., dim)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != state.dim:
        raise ValueError(f"dimension mismatch: state fitted for dim={state.dim}, got {x.shape[-1]}")
    spec = state.spec
    if spec.kind in TYPE1_KINDS:
        return _apply_type1(state, x)
    if spec.kind == "trp":
        return (x @ state.slots[0]["Z"]) / math.sqrt(spec.n_components)
    if spec.kind == "tensor_sketch":
        return x @ state.slots[0]["scatter"]
    return x  # diagonal: identity


def _check_slot(state: ProjectionState, slot) -> int:
    spec = state.spec
    if slot is None:
        slot = 0 if spec.kind in TYPE1_KINDS or spec.kind == "diagonal" else 1
    if not 0 <= slot < spec.n_slots:
        raise ValueError(
            f"slot {slot} out of range: state carries {spec.n_slots} slot(s); "
            "fit with a larger n_slots for deeper compositions")
    return slot


def project_outer(state: ProjectionState, u, v, slot=None) -> np.ndarray:
    """Two-argument application psi_hat(u, v) on the outer product u (x) v.

    Type 1 requires d_u * d_v == dim and equals projecting the flattened
    outer product (the sparse kinds only ever touch sampled coordinates).
    Type 2 takes the previous composition result as u and composes with the
    slot's randomness: tensor_sketch circularly convolves u with the sketch
    of v, trp multiplies u elementwise with the slot projection of v, and
    diagonal forms blockwise outer products scaled by sqrt(d).
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    spec = state.spec
    slot = _check_slot(state, slot)
    Q = spec.n_components
    if spec.kind in TYPE1_KINDS:
        du, dv = u.shape[-1], v.shape[-1]
        if du * dv != state.dim:
            raise ValueError(
                f"outer-product dimensions {du}*{dv} != fitted dim {state.dim}")
        payload = state.slots[0]
        if spec.kind == "gaussian":
            flat = (u[..., :, None] * v[..., None, :]).reshape(u.shape[:-1] + (du * dv,))
            return _apply_type1(state, flat)
        if spec.kind == "subsampling":
            idx = payload["idx"]
            vals = u[..., idx // dv] * v[..., idx % dv]
            return math.sqrt(state.dim / Q) * vals
        rows = payload["rows"]
        vals = u[..., rows // dv] * v[..., rows % dv]
        return (1.0 / math.sqrt(payload["rate"] * Q)) * (vals @ payload["Zsub"])
    if spec.kind == "trp":
        if u.shape[-1] != Q:
            raise ValueError(f"left operand must already live in R^{Q}, got {u.shape[-1]}")
        if v.shape[-1] != state.dim:
            raise ValueError(f"right operand must have dim {state.dim}, got {v.shape[-1]}")
        return u * (v @ state.slots[slot]["Z"])
    if spec.kind == "tensor_sketch":
        if u.shape[-1] != Q:
            raise ValueError(f"left operand must already live in R^{Q}, got {u.shape[-1]}")
        if v.shape[-1] != state.dim:
            raise ValueError(f"right operand must have dim {state.dim}, got {v.shape[-1]}")
        return circular_convolve(u, v @ state.slots[slot]["scatter"])
    # diagonal
    q = spec.internal_size
    d = state.dim // q
    if u.shape[-1] % d != 0 or v.shape[-1] % d != 0:
        raise ValueError(
            f"diagonal operands must have dimension divisible by d={d}, "
            f"got {u.shape[-1]} and {v.shape[-1]}")
    qu = u.shape[-1] // d
    qv = v.shape[-1] // d
    ub = u.reshape(u.shape[:-1] + (d, qu))
    vb = v.reshape(v.shape[:-1] + (d, qv))
    out = ub[..., :, None] * vb[..., None, :]
    return math.sqrt(d) * out.reshape(u.shape[:-1] + (d * qu * qv,))


def slot_matvec(state: ProjectionState, x, slot: int) -> np.ndarray:
    """Raw (unscaled) slot application used by the feature recursions.

    trp: Z_slot^T x; tensor_sketch: the slot's count sketch of x. The 1/sqrt(Q)
    of the trp definition is applied once per level by the caller.
    """
    if state.spec.kind == "trp":
        return x @ state.slots[slot]["Z"]
    if state.spec.kind == "tensor_sketch":
        return x @ state.slots[slot]["scatter"]
    raise ValueError(f"slot_matvec applies to trp/tensor_sketch states, not {state.spec.kind}")
