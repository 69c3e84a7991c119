"""Tensor trains (MPS) and tensor-train operators (MPO).

Trains are chains of 3-index cores ``(left bond, physical, right bond)``
with open boundary conditions (outer bonds of size 1); operators carry two
physical indexes per core, ordered ``(left bond, input, output, right bond)``.
Construction is by a left-to-right sweep of truncated SVDs; existing trains
can be re-truncated (rounded) without densification.

Truncation is governed by :class:`TruncationPolicy`.  A singular value is
discarded when it falls strictly below ``sv_tolerance`` times the largest
one (values exactly at the threshold are kept), and in every mode values at
or below ``1e-14`` times the largest are treated as float64 noise.  Singular
vectors are sign-fixed so the first non-negligible component of each left
vector is nonnegative, which makes decompositions reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence

import numpy as np

from .dense import as_tensor
from .errors import CapacityError, DimensionError, NumericalError

__all__ = [
    "DENSE_CAP_DEFAULT",
    "TruncationPolicy",
    "truncated_svd",
    "TensorTrain",
    "TensorTrainOperator",
    "tt_svd",
    "tt_to_dense",
    "mpo_to_dense",
    "mpo_to_matrix",
    "tt_round",
    "tt_inner",
    "tt_norm",
    "tt_add",
    "tt_scale",
    "apply_mpo",
    "identity_mpo",
    "param_count_mps",
    "param_count_mpo",
]

# Largest dense tensor the densification helpers will materialize by default.
DENSE_CAP_DEFAULT = 2**22

# Relative spectral floor: singular values at or below this multiple of the
# largest are float64 noise and define the numerical rank.
NUMERICAL_RANK_CUTOFF = 1e-14


@dataclass(frozen=True)
class TruncationPolicy:
    """Bond-dimension cap and relative singular-value tolerance.

    ``mode="exact"`` keeps everything above the float64 noise floor and
    requires an unbounded cap with zero tolerance.
    """

    max_bond: int | None = None
    sv_tolerance: float = 0.0
    mode: str = "truncated"

    def __post_init__(self):
        if self.mode not in ("exact", "truncated"):
            raise ValueError(f"unknown policy mode {self.mode!r}")
        if self.max_bond is not None and self.max_bond < 1:
            raise ValueError(f"max_bond must be >= 1, got {self.max_bond}")
        if not (np.isfinite(self.sv_tolerance) and self.sv_tolerance >= 0.0):
            raise ValueError(f"sv_tolerance must be finite and >= 0, got {self.sv_tolerance}")
        if self.mode == "exact" and (self.max_bond is not None or self.sv_tolerance != 0.0):
            raise ValueError("exact mode requires unbounded max_bond and zero tolerance")

    @classmethod
    def exact(cls) -> "TruncationPolicy":
        return cls(mode="exact")

    @classmethod
    def truncated(
        cls, max_bond: int | None = None, sv_tolerance: float = 0.0
    ) -> "TruncationPolicy":
        return cls(max_bond=max_bond, sv_tolerance=sv_tolerance, mode="truncated")


def _fix_signs(u: np.ndarray, v: np.ndarray) -> None:
    # First non-negligible component of each left singular vector is made
    # nonnegative; the matching right vector is flipped to compensate.
    for j in range(u.shape[1]):
        col = u[:, j]
        peak = np.max(np.abs(col))
        if peak == 0.0:
            continue
        lead = col[np.abs(col) > 1e-12 * peak][0]
        if lead < 0.0:
            u[:, j] = -col
            v[j, :] = -v[j, :]


def truncated_svd(
    m: np.ndarray, policy: TruncationPolicy
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """SVD of a matrix keeping only the leading singular values.

    Returns ``(U, S, V, discarded_weight)`` with ``m ~= U @ diag(S) @ V``:
    U has orthonormal columns, S is nonincreasing, the rows of V are
    orthonormal right singular vectors, and ``discarded_weight`` is the sum
    of squares of the dropped singular values.  At least one singular value
    is always kept so downstream shapes stay valid.
    """
    m = as_tensor(m)
    if m.ndim != 2:
        raise DimensionError(f"expected a matrix, got rank {m.ndim}")
    if not np.all(np.isfinite(m)):
        raise NumericalError("matrix contains non-finite entries")
    try:
        u, s, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed to converge: {exc}") from exc

    top = s[0]
    rank = int(np.count_nonzero(s > NUMERICAL_RANK_CUTOFF * top)) if top > 0.0 else 0
    if policy.mode == "truncated":
        if policy.sv_tolerance > 0.0 and top > 0.0:
            rank = min(rank, int(np.count_nonzero(s >= policy.sv_tolerance * top)))
        if policy.max_bond is not None:
            rank = min(rank, policy.max_bond)
    rank = max(rank, 1)

    discarded = float(np.sum(s[rank:] ** 2))
    u, s, vt = u[:, :rank].copy(), s[:rank].copy(), vt[:rank].copy()
    _fix_signs(u, vt)
    return u, s, vt, discarded


def _freeze(core) -> np.ndarray:
    out = np.array(core, dtype=np.float64, order="C", copy=True)
    out.flags.writeable = False
    return out


def _validate_chain(cores: tuple[np.ndarray, ...], rank: int, kind: str) -> None:
    if not cores:
        raise DimensionError(f"{kind} needs at least one core")
    for i, core in enumerate(cores):
        if core.ndim != rank:
            raise DimensionError(f"{kind} core {i} has rank {core.ndim}, expected {rank}")
        if any(n < 1 for n in core.shape):
            raise DimensionError(f"{kind} core {i} has an empty dimension: {core.shape}")
    if cores[0].shape[0] != 1:
        raise DimensionError(f"first {kind} core must have left bond 1")
    if cores[-1].shape[-1] != 1:
        raise DimensionError(f"last {kind} core must have right bond 1")
    for i in range(len(cores) - 1):
        if cores[i].shape[-1] != cores[i + 1].shape[0]:
            raise DimensionError(
                f"bond mismatch between cores {i} and {i + 1}: "
                f"{cores[i].shape[-1]} != {cores[i + 1].shape[0]}"
            )


class TensorTrain:
    """Chain of 3-index cores ``(left bond, physical, right bond)``.

    Cores are copied and frozen at construction; instances are immutable
    and safe to share across threads.
    """

    def __init__(self, cores: Iterable[np.ndarray]):
        self.cores = tuple(_freeze(c) for c in cores)
        _validate_chain(self.cores, 3, "tensor train")

    @property
    def n_sites(self) -> int:
        return len(self.cores)

    @property
    def phys_dims(self) -> tuple[int, ...]:
        return tuple(c.shape[1] for c in self.cores)

    @property
    def bond_dims(self) -> tuple[int, ...]:
        return tuple(c.shape[2] for c in self.cores[:-1])

    def param_count(self) -> int:
        return sum(c.size for c in self.cores)

    def __repr__(self) -> str:
        return f"TensorTrain(phys_dims={self.phys_dims}, bond_dims={self.bond_dims})"


class TensorTrainOperator:
    """Chain of 4-index cores ``(left bond, input, output, right bond)``."""

    def __init__(self, cores: Iterable[np.ndarray]):
        self.cores = tuple(_freeze(c) for c in cores)
        _validate_chain(self.cores, 4, "tensor-train operator")

    @property
    def n_sites(self) -> int:
        return len(self.cores)

    @property
    def in_dims(self) -> tuple[int, ...]:
        return tuple(c.shape[1] for c in self.cores)

    @property
    def out_dims(self) -> tuple[int, ...]:
        return tuple(c.shape[2] for c in self.cores)

    @property
    def bond_dims(self) -> tuple[int, ...]:
        return tuple(c.shape[3] for c in self.cores[:-1])

    def param_count(self) -> int:
        return sum(c.size for c in self.cores)

    def __repr__(self) -> str:
        return (
            f"TensorTrainOperator(in_dims={self.in_dims}, "
            f"out_dims={self.out_dims}, bond_dims={self.bond_dims})"
        )


def param_count_mps(n_sites: int, phys_dim: int, bond_dim: int) -> int:
    """Stored elements of a uniform MPS: ``2db`` boundary plus ``db^2`` per interior core."""
    n, d, b = int(n_sites), int(phys_dim), int(bond_dim)
    if n < 1 or d < 1 or b < 1:
        raise DimensionError("n_sites, phys_dim, bond_dim must all be >= 1")
    if n == 1:
        return d
    return 2 * d * b + (n - 2) * d * b * b


def param_count_mpo(n_sites: int, phys_dim: int, bond_dim: int) -> int:
    """Stored elements of a uniform MPO: ``2d^2 b`` boundary plus ``d^2 b^2`` per interior core."""
    n, d, b = int(n_sites), int(phys_dim), int(bond_dim)
    if n < 1 or d < 1 or b < 1:
        raise DimensionError("n_sites, phys_dim, bond_dim must all be >= 1")
    if n == 1:
        return d * d
    return 2 * d * d * b + (n - 2) * d * d * b * b


def tt_svd(
    tensor: np.ndarray,
    policy: TruncationPolicy,
    return_weights: bool = False,
) -> TensorTrain | tuple[TensorTrain, list[float]]:
    """Decompose a dense tensor into a train by a left-to-right SVD sweep.

    All cores except the last are left-orthogonal.  With an exact policy the
    train reproduces the input to float64 accuracy; with a truncated policy
    the reconstruction error is at most ``sqrt(sum(weights))`` where
    ``weights`` are the per-link discarded weights (returned when
    ``return_weights`` is set).
    """
    t = as_tensor(tensor)
    if t.ndim < 1:
        raise DimensionError("cannot decompose a rank-0 tensor")
    if not np.all(np.isfinite(t)):
        raise NumericalError("tensor contains non-finite entries")

    dims = t.shape
    weights: list[float] = []
    cores: list[np.ndarray] = []
    carry = t.reshape(1, -1)
    left = 1
    for k in range(t.ndim - 1):
        mat = carry.reshape(left * dims[k], -1)
        u, s, v, dw = truncated_svd(mat, policy)
        weights.append(dw)
        rank = s.size
        cores.append(u.reshape(left, dims[k], rank))
        carry = s[:, None] * v
        left = rank
    cores.append(carry.reshape(left, dims[-1], 1))
    train = TensorTrain(cores)
    return (train, weights) if return_weights else train


def tt_to_dense(tt: TensorTrain, max_elements: int = DENSE_CAP_DEFAULT) -> np.ndarray:
    """Contract a train back to the dense tensor it represents.

    Refuses to materialize more than ``max_elements`` elements.
    """
    total = prod(tt.phys_dims)
    if total > max_elements:
        raise CapacityError(
            f"dense tensor would have {total} elements (cap {max_elements})"
        )
    acc = tt.cores[0]
    for core in tt.cores[1:]:
        acc = np.tensordot(acc, core, axes=([acc.ndim - 1], [0]))
    return np.ascontiguousarray(acc.reshape(tt.phys_dims))


def mpo_to_dense(
    op: TensorTrainOperator, max_elements: int = DENSE_CAP_DEFAULT
) -> np.ndarray:
    """Contract an operator train to a dense tensor with axes (outputs..., inputs...)."""
    total = prod(op.in_dims) * prod(op.out_dims)
    if total > max_elements:
        raise CapacityError(
            f"dense operator would have {total} elements (cap {max_elements})"
        )
    acc = op.cores[0]
    for core in op.cores[1:]:
        acc = np.tensordot(acc, core, axes=([acc.ndim - 1], [0]))
    # Axes now alternate (in_0, out_0, in_1, out_1, ...); expose outputs first.
    acc = acc.reshape(acc.shape[1:-1])
    n = op.n_sites
    perm = [2 * k + 1 for k in range(n)] + [2 * k for k in range(n)]
    return np.ascontiguousarray(np.transpose(acc, perm))


def mpo_to_matrix(
    op: TensorTrainOperator, max_elements: int = DENSE_CAP_DEFAULT
) -> np.ndarray:
    """Dense matrix of an operator train: rows are outputs, columns inputs."""
    dense = mpo_to_dense(op, max_elements)
    return dense.reshape(prod(op.out_dims), prod(op.in_dims))


def tt_round(
    tt: TensorTrain,
    policy: TruncationPolicy,
    return_weights: bool = False,
) -> TensorTrain | tuple[TensorTrain, list[float]]:
    """Re-truncate an existing train to (possibly) smaller bond dimensions.

    Right-to-left orthogonalization sweep followed by a left-to-right
    truncation sweep; the same error bound as :func:`tt_svd` applies to the
    returned per-link discarded weights.
    """
    cores = [np.asarray(c, dtype=np.float64) for c in tt.cores]
    for c in cores:
        if not np.all(np.isfinite(c)):
            raise NumericalError("train contains non-finite entries")
    n = len(cores)
    if n == 1:
        train = TensorTrain(cores)
        return (train, []) if return_weights else train

    # Sweep right to left, leaving cores 1..n-1 right-orthogonal.
    for k in range(n - 1, 0, -1):
        left, d, right = cores[k].shape
        mat = cores[k].reshape(left, d * right)
        try:
            q, r = np.linalg.qr(mat.T)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"QR failed: {exc}") from exc
        new_left = q.shape[1]
        cores[k] = q.T.reshape(new_left, d, right)
        cores[k - 1] = np.tensordot(cores[k - 1], r.T, axes=([2], [0]))

    # Truncation sweep left to right.
    weights: list[float] = []
    for k in range(n - 1):
        left, d, right = cores[k].shape
        u, s, v, dw = truncated_svd(cores[k].reshape(left * d, right), policy)
        weights.append(dw)
        rank = s.size
        cores[k] = u.reshape(left, d, rank)
        cores[k + 1] = np.tensordot(s[:, None] * v, cores[k + 1], axes=([1], [0]))
    train = TensorTrain(cores)
    return (train, weights) if return_weights else train


def tt_inner(a: TensorTrain, b: TensorTrain) -> float:
    """Dot product of the tensors two trains represent, via transfer contraction."""
    if a.phys_dims != b.phys_dims:
        raise DimensionError(
            f"physical dimensions differ: {a.phys_dims} vs {b.phys_dims}"
        )
    env = np.ones((1, 1))
    for ca, cb in zip(a.cores, b.cores):
        tmp = np.tensordot(env, ca, axes=([0], [0]))  # (lb, d, ra)
        env = np.tensordot(tmp, cb, axes=([0, 1], [0, 1]))  # (ra, rb)
    return float(env[0, 0])


def tt_norm(tt: TensorTrain) -> float:
    """Frobenius norm of the represented tensor."""
    return float(np.sqrt(max(tt_inner(tt, tt), 0.0)))


def tt_scale(tt: TensorTrain, factor: float) -> TensorTrain:
    """Multiply the represented tensor by a scalar (applied to the first core)."""
    cores = list(tt.cores)
    cores[0] = cores[0] * float(factor)
    return TensorTrain(cores)


def tt_add(a: TensorTrain, b: TensorTrain) -> TensorTrain:
    """Elementwise sum of two trains via direct-sum cores (bond dims add)."""
    if a.phys_dims != b.phys_dims:
        raise DimensionError(
            f"physical dimensions differ: {a.phys_dims} vs {b.phys_dims}"
        )
    n = a.n_sites
    if n == 1:
        return TensorTrain([a.cores[0] + b.cores[0]])
    cores = []
    for k, (ca, cb) in enumerate(zip(a.cores, b.cores)):
        la, d, ra = ca.shape
        lb, _, rb = cb.shape
        if k == 0:
            core = np.concatenate([ca, cb], axis=2)
        elif k == n - 1:
            core = np.concatenate([ca, cb], axis=0)
        else:
            core = np.zeros((la + lb, d, ra + rb))
            core[:la, :, :ra] = ca
            core[la:, :, ra:] = cb
        cores.append(core)
    return TensorTrain(cores)


def apply_mpo(
    op: TensorTrainOperator,
    state: TensorTrain,
    policy: TruncationPolicy | None = None,
) -> TensorTrain:
    """Apply an operator train to a state train site by site.

    Bond dimensions multiply link-wise; pass a policy to round the result
    afterwards, or ``None`` to keep it unrounded.
    """
    if op.in_dims != state.phys_dims:
        raise DimensionError(
            f"operator inputs {op.in_dims} do not match state {state.phys_dims}"
        )
    cores = []
    for w, c in zip(op.cores, state.cores):
        lo, _, dout, ro = w.shape
        ls, _, rs = c.shape
        merged = np.tensordot(w, c, axes=([1], [1]))  # (lo, dout, ro, ls, rs)
        merged = merged.transpose(0, 3, 1, 2, 4)
        cores.append(merged.reshape(lo * ls, dout, ro * rs))
    result = TensorTrain(cores)
    if policy is not None:
        result = tt_round(result, policy)
    return result


def identity_mpo(phys_dims: Sequence[int]) -> TensorTrainOperator:
    """Bond-1 operator acting as the identity on each site."""
    cores = [np.eye(int(d)).reshape(1, int(d), int(d), 1) for d in phys_dims]
    return TensorTrainOperator(cores)
