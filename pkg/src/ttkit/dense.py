"""Dense tensors and index bookkeeping.

Tensors are plain ``numpy.ndarray`` objects of float64 in row-major order
(last index fastest).  Everything in this module is a pure function; inputs
are never modified.  These operations are the exact substrate the rest of
the toolkit is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import chain
from math import prod
from typing import Sequence

import numpy as np

from .errors import DimensionError

__all__ = [
    "as_tensor",
    "frobenius_norm",
    "permute",
    "GroupingPlan",
    "group_indexes",
    "ungroup_indexes",
    "split_index",
    "contract_pair",
]


def _contiguous(t: np.ndarray) -> np.ndarray:
    # ascontiguousarray promotes rank 0 to rank 1; keep scalars scalar.
    return t if t.ndim == 0 else np.ascontiguousarray(t)


def as_tensor(values) -> np.ndarray:
    """Coerce ``values`` to a row-major float64 array.

    Rank 0 (a scalar) is allowed; zero-length dimensions are not.
    """
    t = np.asarray(values, dtype=np.float64)
    if any(n < 1 for n in t.shape):
        raise DimensionError(f"every dimension must be >= 1, got shape {t.shape}")
    return _contiguous(t)


def frobenius_norm(t: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(t, dtype=np.float64).ravel()))


def _check_permutation(perm: Sequence[int], n: int) -> tuple[int, ...]:
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(n)):
        raise DimensionError(f"{perm} is not a permutation of {n} axes")
    return perm


def permute(t: np.ndarray, perm: Sequence[int]) -> np.ndarray:
    """Reorder the axes of ``t`` so that output axis ``k`` is input axis ``perm[k]``."""
    t = as_tensor(t)
    perm = _check_permutation(perm, t.ndim)
    return _contiguous(np.transpose(t, perm))


@dataclass(frozen=True)
class GroupingPlan:
    """A bijective merge of tensor indexes.

    ``groups`` lists source index positions; after applying ``permutation``
    the positions of each group are adjacent, and each group is merged into
    one index whose dimension is the product of its members.  The merged
    index enumerates its constituents row-major (first constituent slowest).
    If ``permutation`` is omitted it is derived from the group order.
    """

    source_shape: tuple[int, ...]
    groups: tuple[tuple[int, ...], ...]
    permutation: tuple[int, ...] = field(default=())

    def __post_init__(self):
        shape = tuple(int(n) for n in self.source_shape)
        groups = tuple(tuple(int(p) for p in g) for g in self.groups)
        flat = tuple(chain.from_iterable(groups))
        perm = tuple(int(p) for p in self.permutation) if self.permutation else flat
        object.__setattr__(self, "source_shape", shape)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "permutation", perm)
        if any(n < 1 for n in shape):
            raise DimensionError(f"invalid source shape {shape}")
        if any(len(g) == 0 for g in groups):
            raise DimensionError("empty group in grouping plan")
        _check_permutation(perm, len(shape))
        if flat != perm:
            raise DimensionError(
                "groups must partition the permuted index positions in order: "
                f"groups flatten to {flat}, permutation is {perm}"
            )

    @property
    def grouped_shape(self) -> tuple[int, ...]:
        return tuple(prod(self.source_shape[p] for p in g) for g in self.groups)


def group_indexes(t: np.ndarray, plan: GroupingPlan) -> np.ndarray:
    """Merge indexes of ``t`` according to ``plan``.

    The element multiset is preserved; this is a pure relabeling.
    """
    t = as_tensor(t)
    if t.shape != plan.source_shape:
        raise DimensionError(
            f"plan expects shape {plan.source_shape}, tensor has {t.shape}"
        )
    return permute(t, plan.permutation).reshape(plan.grouped_shape)


def ungroup_indexes(t: np.ndarray, plan: GroupingPlan) -> np.ndarray:
    """Exact inverse of :func:`group_indexes` for the same plan."""
    t = as_tensor(t)
    if t.shape != plan.grouped_shape:
        raise DimensionError(
            f"plan produces shape {plan.grouped_shape}, tensor has {t.shape}"
        )
    permuted_shape = tuple(plan.source_shape[p] for p in plan.permutation)
    expanded = t.reshape(permuted_shape)
    inverse = np.argsort(plan.permutation)
    return permute(expanded, inverse)


def split_index(t: np.ndarray, axis: int, factor_dims: Sequence[int]) -> np.ndarray:
    """Factor one index of ``t`` into several, row-major sub-enumeration.

    Inverse of grouping those positions back together.
    """
    t = as_tensor(t)
    if not -t.ndim <= axis < t.ndim:
        raise DimensionError(f"axis {axis} out of range for rank {t.ndim}")
    axis = axis % t.ndim if t.ndim else 0
    factors = tuple(int(d) for d in factor_dims)
    if any(d < 1 for d in factors):
        raise DimensionError(f"invalid factor dims {factors}")
    if prod(factors) != t.shape[axis]:
        raise DimensionError(
            f"factors {factors} do not multiply to axis dimension {t.shape[axis]}"
        )
    new_shape = t.shape[:axis] + factors + t.shape[axis + 1 :]
    return t.reshape(new_shape)


def contract_pair(
    a: np.ndarray,
    b: np.ndarray,
    axis_pairs: Sequence[tuple[int, int]],
) -> np.ndarray:
    """Sum over paired axes of the elementwise product of ``a`` and ``b``.

    The result keeps the remaining axes of ``a`` followed by those of ``b``,
    each in original order.  An empty ``axis_pairs`` is the tensor product.
    """
    a = as_tensor(a)
    b = as_tensor(b)
    axes_a = [int(i) for i, _ in axis_pairs]
    axes_b = [int(j) for _, j in axis_pairs]
    if len(set(axes_a)) != len(axes_a) or len(set(axes_b)) != len(axes_b):
        raise DimensionError("an axis may be contracted at most once")
    for i, j in zip(axes_a, axes_b):
        if not (0 <= i < a.ndim and 0 <= j < b.ndim):
            raise DimensionError(f"axis pair ({i}, {j}) out of range")
        if a.shape[i] != b.shape[j]:
            raise DimensionError(
                f"contracted axes disagree: a.shape[{i}]={a.shape[i]} vs "
                f"b.shape[{j}]={b.shape[j]}"
            )
    return _contiguous(np.tensordot(a, b, axes=(axes_a, axes_b)))
