"""Batch command-line surface over the library.

Subcommands cover compression, reconstruction, layer compression, kernel
application, the optimization solvers, and their brute-force oracles.  Exit
codes are uniform: 0 success, 1 usage error, 2 malformed input, 3 numerical
or capacity failure.  All flags are validated before any file is read or
written, and outputs are written only after the computation has finished;
reports always go to a separate sidecar file.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io
from .errors import (
    CapacityError,
    DimensionError,
    InfeasibilityError,
    NetworkError,
    NumericalError,
)
from .kernels import SITE_KERNELS, apply_mpo_to_product, product_feature_map
from .layers import ShapePlan, compress_dataset, compress_layer
from .optimize import (
    IteConfig,
    Solution,
    brute_force_qudo,
    brute_force_tsp,
    solve_qudo,
    solve_tsp,
)
from .tt import (
    DENSE_CAP_DEFAULT,
    TensorTrainOperator,
    TruncationPolicy,
    mpo_to_dense,
    tt_to_dense,
)

USAGE_EXIT = 1
INPUT_EXIT = 2
NUMERIC_EXIT = 3


class _Parser(argparse.ArgumentParser):
    # Usage problems exit 1; argparse's default of 2 is reserved for
    # malformed input files.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _policy_from_flags(parser: _Parser, args) -> TruncationPolicy:
    max_bond = getattr(args, "max_bond", None)
    tol = getattr(args, "tol", None)
    if max_bond is not None and max_bond < 1:
        parser.error(f"--max-bond must be >= 1, got {max_bond}")
    if tol is not None and not (np.isfinite(tol) and tol >= 0.0):
        parser.error(f"--tol must be finite and >= 0, got {tol}")
    if max_bond is None and not tol:
        return TruncationPolicy.exact()
    return TruncationPolicy.truncated(max_bond=max_bond, sv_tolerance=tol or 0.0)


def _check_positive(parser: _Parser, name: str, value, minimum=1) -> None:
    if value is not None and value < minimum:
        parser.error(f"{name} must be >= {minimum}, got {value}")


def _parse_factor_dims(parser: _Parser, text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    try:
        dims = tuple(int(part) for part in text.split(","))
    except ValueError:
        parser.error(f"--factor-dims must be comma-separated integers, got {text!r}")
    if not dims or any(d < 1 for d in dims):
        parser.error(f"--factor-dims entries must be >= 1, got {text!r}")
    return dims


def _report_lines(report) -> str:
    lines = [
        f"dense_params = {report.dense_params}",
        f"compressed_params = {report.compressed_params}",
        f"ratio = {report.ratio!r}",
        f"relative_error = {report.relative_error!r}",
        f"error_is_bound = {report.error_is_bound}",
        f"error_bound = {report.error_bound!r}",
        "link_discarded_weights = "
        + ", ".join(repr(w) for w in report.link_discarded_weights),
    ]
    return "\n".join(lines) + "\n"


def _write_report(path, report) -> None:
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(_report_lines(report))


def _solution_obj(sol: Solution) -> dict:
    return {
        "configuration": list(sol.configuration),
        "cost": sol.cost,
        "method": sol.method,
    }


def _emit_solution(args, sol: Solution) -> None:
    obj = _solution_obj(sol)
    if getattr(args, "output", None):
        io.write_json(args.output, obj)
    else:
        json.dump(obj, sys.stdout)
        sys.stdout.write("\n")


def _cmd_compress(parser: _Parser, args) -> int:
    policy = _policy_from_flags(parser, args)
    factor_dims = _parse_factor_dims(parser, args.factor_dims)
    tensor = io.read_tensor(args.input)
    dims = factor_dims if factor_dims is not None else tensor.shape
    if tensor.ndim == 0 and factor_dims is None:
        dims = (1,)
    train, report = compress_dataset(tensor, dims, policy)
    io.write_train(args.output, train)
    _write_report(args.report, report)
    return 0


def _cmd_reconstruct(parser: _Parser, args) -> int:
    _check_positive(parser, "--dense-cap", args.dense_cap)
    train = io.read_train(args.input)
    if isinstance(train, TensorTrainOperator):
        dense = mpo_to_dense(train, args.dense_cap)
    else:
        dense = tt_to_dense(train, args.dense_cap)
    io.write_tensor(args.output, dense)
    return 0


def _cmd_layer_compress(parser: _Parser, args) -> int:
    _check_positive(parser, "--sites", args.sites)
    policy = _policy_from_flags(parser, args)
    matrix = io.read_tensor(args.matrix)
    bias = io.read_tensor(args.bias)
    if matrix.ndim != 2:
        raise DimensionError(f"--matrix must be 2-dimensional, got rank {matrix.ndim}")
    if bias.ndim != 1:
        raise DimensionError(f"--bias must be 1-dimensional, got rank {bias.ndim}")
    plan = ShapePlan.balanced(matrix.shape[0], matrix.shape[1], args.sites)
    layer, report = compress_layer(matrix, bias, plan, policy)
    io.write_json(
        args.output,
        {
            "kind": "layer",
            "plan": {
                "row_factors": list(plan.row_factors),
                "col_factors": list(plan.col_factors),
            },
            "weights": io.train_to_obj(layer.weights),
            "bias": io.train_to_obj(layer.bias),
        },
    )
    _write_report(args.report, report)
    return 0


def _cmd_kernel_apply(parser: _Parser, args) -> int:
    train = io.read_train(args.mpo)
    if not isinstance(train, TensorTrainOperator):
        raise io.FormatError(f"{args.mpo}: expected an mpo train")
    x = io.read_tensor(args.input_vector)
    if x.ndim != 1:
        raise DimensionError(f"--input-vector must be 1-dimensional, got rank {x.ndim}")
    kernel = SITE_KERNELS[args.site_kernel]()
    features = product_feature_map(x, [kernel] * x.size)
    result = apply_mpo_to_product(train, features)
    io.write_tensor(args.output, result)
    return 0


def _solver_config(parser: _Parser, args) -> IteConfig:
    if args.tau is not None and not (np.isfinite(args.tau) and args.tau > 0):
        parser.error(f"--tau must be positive, got {args.tau}")
    _check_positive(parser, "--dense-cap", args.dense_cap)
    policy = _policy_from_flags(parser, args)
    return IteConfig(
        tau=args.tau, policy=policy, readout=args.readout, dense_cap=args.dense_cap
    )


def _cmd_qudo_solve(parser: _Parser, args) -> int:
    cfg = _solver_config(parser, args)
    kind, problem = io.read_problem(args.problem)
    if kind != "qudo":
        raise io.FormatError(f"{args.problem}: expected a qudo problem, found {kind}")
    if cfg.readout == "exact" and problem.d**problem.n > cfg.dense_cap:
        raise CapacityError(
            f"{problem.d}^{problem.n} configurations exceed --dense-cap {cfg.dense_cap}"
        )
    _emit_solution(args, solve_qudo(problem, cfg))
    return 0


def _cmd_tsp_solve(parser: _Parser, args) -> int:
    cfg = _solver_config(parser, args)
    kind, problem = io.read_problem(args.problem)
    if kind != "tsp":
        raise io.FormatError(f"{args.problem}: expected a tsp problem, found {kind}")
    costs, variant = problem
    if cfg.readout == "exact" and costs.shape[0] ** costs.shape[0] > cfg.dense_cap:
        raise CapacityError(
            f"{costs.shape[0]} nodes exceed --dense-cap {cfg.dense_cap} for exact readout"
        )
    _emit_solution(args, solve_tsp(costs, variant, cfg))
    return 0


def _cmd_oracle(parser: _Parser, args) -> int:
    kind, problem = io.read_problem(args.problem)
    if kind != args.kind:
        raise io.FormatError(
            f"{args.problem}: expected a {args.kind} problem, found {kind}"
        )
    if kind == "qudo":
        sol = brute_force_qudo(problem)
    else:
        costs, variant = problem
        sol = brute_force_tsp(costs, variant)
    _emit_solution(args, sol)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="ttkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compress", help="compress a tensor file into a train")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--report")
    p.add_argument("--max-bond", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--factor-dims", help="comma-separated site dimensions")
    p.set_defaults(func=_cmd_compress)

    p = sub.add_parser("reconstruct", help="densify a train file back to a tensor")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--dense-cap", type=int, default=DENSE_CAP_DEFAULT)
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("layer-compress", help="compress a dense layer (matrix + bias)")
    p.add_argument("--matrix", required=True)
    p.add_argument("--bias", required=True)
    p.add_argument("--sites", type=int, required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--report")
    p.add_argument("--max-bond", type=int)
    p.add_argument("--tol", type=float)
    p.set_defaults(func=_cmd_layer_compress)

    p = sub.add_parser(
        "kernel-apply", help="apply an mpo to the product feature map of a vector"
    )
    p.add_argument("--mpo", required=True)
    p.add_argument("--input-vector", required=True)
    p.add_argument("--site-kernel", choices=sorted(SITE_KERNELS), default="product")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_kernel_apply)

    for name, func in (("qudo-solve", _cmd_qudo_solve), ("tsp-solve", _cmd_tsp_solve)):
        p = sub.add_parser(name, help=f"solve a {name.split('-')[0]} problem file")
        p.add_argument("--problem", required=True)
        p.add_argument("--output")
        p.add_argument("--tau", type=float)
        p.add_argument("--readout", choices=("exact", "greedy"), default="exact")
        p.add_argument("--max-bond", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--dense-cap", type=int, default=DENSE_CAP_DEFAULT)
        p.set_defaults(func=func)

    p = sub.add_parser("oracle", help="brute-force reference answer for a problem file")
    p.add_argument("kind", choices=("qudo", "tsp"))
    p.add_argument("--problem", required=True)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(parser, args)
    except (io.FormatError, DimensionError, NetworkError) as exc:
        print(f"ttkit: {exc}", file=sys.stderr)
        return INPUT_EXIT
    except (NumericalError, CapacityError, InfeasibilityError) as exc:
        print(f"ttkit: {exc}", file=sys.stderr)
        return NUMERIC_EXIT


if __name__ == "__main__":
    sys.exit(main())
