"""ttkit: tensor-train representations and what they make affordable.

Dense tensors with exact index bookkeeping, MPS/MPO trains built by
truncated SVD sweeps, matrix and dense-layer compression, implicit
product-kernel application, and an imaginary-time solver for
nearest-neighbor discrete optimization with constraint layers.  Every
approximation is checkable against a brute-force oracle at desk scale.
"""

from .dense import (
    GroupingPlan,
    as_tensor,
    contract_pair,
    frobenius_norm,
    group_indexes,
    permute,
    split_index,
    ungroup_indexes,
)
from .errors import (
    CapacityError,
    DimensionError,
    InfeasibilityError,
    NetworkError,
    NumericalError,
    TtkitError,
)
from .kernels import (
    ProductState,
    SiteKernel,
    apply_mpo_to_product,
    cosine_kernel,
    product_feature_map,
    product_kernel,
)
from .layers import (
    CompressedLayer,
    CompressionReport,
    ShapePlan,
    apply_compressed_layer,
    compress_dataset,
    compress_layer,
    matrix_to_mpo,
    vector_to_mps,
)
from .network import ContractionNetwork, contract_network
from .optimize import (
    AmplitudeState,
    IteConfig,
    QudoProblem,
    Solution,
    apply_non_repetition,
    brute_force_qudo,
    brute_force_tsp,
    ite_state,
    non_repetition_layer,
    readout_exact,
    readout_greedy,
    solve_qudo,
    solve_tsp,
    uniform_state,
)
from .tt import (
    DENSE_CAP_DEFAULT,
    TensorTrain,
    TensorTrainOperator,
    TruncationPolicy,
    apply_mpo,
    identity_mpo,
    mpo_to_dense,
    mpo_to_matrix,
    param_count_mpo,
    param_count_mps,
    truncated_svd,
    tt_add,
    tt_inner,
    tt_norm,
    tt_round,
    tt_scale,
    tt_svd,
    tt_to_dense,
)

__version__ = "0.1.0"
