"""Implicit product-kernel feature maps and their contraction with MPO layers.

A product feature map sends an input vector to the outer product of small
per-component vectors, a tensor of ``d^N`` entries that is never stored:
it lives as one vector per site.  Applying an operator train to it absorbs
each site vector into its operator core and merges along the bonds, left to
right, so the only open indexes ever carried are the operator's output
indexes and one bond.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from math import cos, pi, prod, sin
from typing import Callable, Sequence

import numpy as np

from .errors import CapacityError, DimensionError, NumericalError
from .tt import DENSE_CAP_DEFAULT, TensorTrain, TensorTrainOperator

__all__ = [
    "SiteKernel",
    "product_kernel",
    "cosine_kernel",
    "SITE_KERNELS",
    "ProductState",
    "product_feature_map",
    "apply_mpo_to_product",
]


@dataclass(frozen=True)
class SiteKernel:
    """Map from one real input component to a fixed-length feature vector."""

    dim: int
    func: Callable[[float], Sequence[float]]
    name: str = ""

    def __call__(self, x: float) -> np.ndarray:
        vec = np.asarray(self.func(float(x)), dtype=np.float64).reshape(-1)
        if vec.shape != (self.dim,):
            raise DimensionError(
                f"kernel {self.name or self.func!r} returned {vec.shape}, expected ({self.dim},)"
            )
        if not np.all(np.isfinite(vec)):
            raise NumericalError("kernel produced non-finite features")
        return vec


def product_kernel() -> SiteKernel:
    """Features ``(x, 1)``: the global map enumerates every product of components."""
    return SiteKernel(2, lambda x: (x, 1.0), name="product")


def cosine_kernel() -> SiteKernel:
    """Features ``(cos(pi x / 2), sin(pi x / 2))`` for inputs scaled to [0, 1].

    A conventional choice of trigonometric map; the exact form is not
    normative and classifier training on top of it is out of scope.
    """
    return SiteKernel(2, lambda x: (cos(pi * x / 2.0), sin(pi * x / 2.0)), name="cosine")


SITE_KERNELS: dict[str, Callable[[], SiteKernel]] = {
    "product": product_kernel,
    "cosine": cosine_kernel,
}


@dataclass(frozen=True)
class ProductState:
    """One vector per site; densifies to the outer product of the vectors."""

    vectors: tuple[np.ndarray, ...]

    def __post_init__(self):
        vecs = tuple(
            np.ascontiguousarray(v, dtype=np.float64).reshape(-1) for v in self.vectors
        )
        if not vecs:
            raise DimensionError("product state needs at least one site")
        object.__setattr__(self, "vectors", vecs)

    @property
    def n_sites(self) -> int:
        return len(self.vectors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(v.size for v in self.vectors)

    def to_tt(self) -> TensorTrain:
        """The same state as a bond-1 tensor train."""
        return TensorTrain([v.reshape(1, -1, 1) for v in self.vectors])

    def to_dense(self, max_elements: int = DENSE_CAP_DEFAULT) -> np.ndarray:
        total = prod(self.dims)
        if total > max_elements:
            raise CapacityError(
                f"dense feature tensor would have {total} elements (cap {max_elements})"
            )
        return reduce(np.multiply.outer, self.vectors)


def product_feature_map(x: Sequence[float], kernels: Sequence[SiteKernel]) -> ProductState:
    """Evaluate one kernel per input component, keeping the result implicit."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size != len(kernels):
        raise DimensionError(
            f"{x.size} input components but {len(kernels)} site kernels"
        )
    return ProductState(tuple(k(xi) for k, xi in zip(kernels, x)))


def apply_mpo_to_product(
    op: TensorTrainOperator,
    ps: ProductState,
    return_trace: bool = False,
) -> np.ndarray | tuple[np.ndarray, list[int]]:
    """Contract an operator train with a product state, site by site.

    Alternates absorbing a site vector into its operator core with merging
    the new node into the running contraction, strictly left to right.  The
    result has the operator's output indexes; with ``return_trace`` the
    element count of every intermediate is also returned, which stays linear
    in the number of sites for fixed output size and bond dimension.
    """
    if op.in_dims != ps.dims:
        raise DimensionError(
            f"operator inputs {op.in_dims} do not match feature dims {ps.dims}"
        )
    trace: list[int] = []
    acc = None
    for core, vec in zip(op.cores, ps.vectors):
        node = np.tensordot(core, vec, axes=([1], [0]))  # (left, out, right)
        trace.append(node.size)
        if acc is None:
            acc = node.reshape(node.shape[1:])  # drop the unit left bond
        else:
            acc = np.tensordot(acc, node, axes=([acc.ndim - 1], [0]))
        trace.append(acc.size)
    result = np.ascontiguousarray(acc.reshape(op.out_dims))
    return (result, trace) if return_trace else result
