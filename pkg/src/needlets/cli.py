"""Command-line front end.

Subcommands mirror the package layers: `quad dump` and `filter plot` for
inspecting the building blocks, `frame build/check/render` for persisted
frames, `model dump` for singular values, `estimate` for one observation
file, and `simulate`/`rates` for the Monte-Carlo studies. All tabular
output is plain CSV (UTF-8, '.' decimal point), to stdout unless --out is
given. Exit codes: 0 success, 1 for I/O or configuration problems, 2 when
a mathematical invariant fails.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from .errors import InvariantError, NormResolutionError, UnresolvedIntegrandError
from .estimators import (
    KAPPA_DEFAULT,
    make_adaptive_config,
    make_threshold_plan,
    need_d,
    svd_adaptive,
    svd_projection,
)
from .filters import POLYNOMIAL_SHAPE, check_partition, filter_a, make_filter, make_profile
from .frame import (
    NODES_EXACT,
    NODES_PAPER,
    build_frame,
    fourier_basis,
    jacobi_basis,
)
from .frameio import load_frame, save_frame
from .jacobi import gauss_jacobi_rule, jacobi_params
from .models import SequenceObservation, direct_model, eval_e, wicksell_model
from .simlab import (
    RateTarget,
    SimulationConfig,
    emit_report,
    rate_study,
    run_experiment,
)

# four decades so the fitted slope is past the threshold-regime transient
RATE_EPS_DEFAULT = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5)


def _open_out(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", newline="", encoding="utf-8"), True


def _write_csv(path, header, rows):
    fh, close = _open_out(path)
    try:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if close:
            fh.close()


def _cmd_quad_dump(args) -> int:
    rule = gauss_jacobi_rule(jacobi_params(args.alpha, args.beta), args.n)
    _write_csv(
        args.out,
        ["index", "node", "weight"],
        (
            [i, f"{x:.17g}", f"{w:.17g}"]
            for i, (x, w) in enumerate(zip(rule.nodes, rule.weights))
        ),
    )
    return 0


def _cmd_filter_plot(args) -> int:
    filt = make_filter(make_profile(POLYNOMIAL_SHAPE, args.m))
    xi = np.linspace(0.0, 2.5, args.points)
    a = filter_a(filt, xi)
    _write_csv(
        args.out,
        ["xi", "a"],
        ([f"{x:.17g}", f"{v:.17g}"] for x, v in zip(xi, a)),
    )
    return 0


def _basis_from_args(args):
    if args.basis == "jacobi":
        return jacobi_basis(args.alpha, args.beta)
    return fourier_basis()


def _cmd_frame_build(args) -> int:
    filt = make_filter(make_profile(POLYNOMIAL_SHAPE, args.m))
    frame = build_frame(_basis_from_args(args), filt, args.jmax, args.nodes_per_level)
    save_frame(frame, args.out)
    print(
        f"wrote {args.out}: basis={frame.basis.kind} j_max={frame.j_max} "
        f"budget={frame.budget} defect={frame.exactness_defect:.3g}"
    )
    return 0


def _frame_checks(frame):
    """(name, measured, tolerance) rows of the frame invariant suite."""
    xi = np.linspace(1.0, float(2**frame.j_max), 4001)
    rows = [("partition-of-unity", check_partition(frame.filt, xi), 1e-12)]

    gram_defect = 0.0
    zero_sum = 0.0
    norm_excess = 0.0
    for lev in frame.levels:
        gram = lev.psi.T @ lev.psi
        i = np.arange(lev.freq_lo, lev.freq_lo + lev.psi.shape[1])
        a2 = filter_a(frame.filt, i / 2.0**lev.j) ** 2 if lev.j >= 0 else np.ones(1)
        gram_defect = max(gram_defect, float(np.max(np.abs(gram - np.diag(a2)))))
        if lev.j >= 0:
            sqw = np.sqrt(lev.weights)
            zero_sum = max(zero_sum, float(np.max(np.abs(sqw @ lev.psi))))
        norms = np.sqrt(np.sum(lev.psi**2, axis=1))
        norm_excess = max(norm_excess, float(np.max(norms)))
    rows.append(("gram-diagonal", gram_defect, 1e-9))
    rows.append(("zero-sum-per-frequency", zero_sum, 1e-10))
    rows.append(("needlet-norm<=1", norm_excess, 1.0 + 1e-10))
    return rows


def _cmd_frame_check(args) -> int:
    frame = load_frame(args.path)
    rows = _frame_checks(frame)
    failed = False
    print(f"frame {args.path}: basis={frame.basis.kind} j_max={frame.j_max} "
          f"nodes={frame.nodes_per_level}")
    for name, value, tol in rows:
        ok = value <= tol
        failed |= not ok
        print(f"  {name:24s} {value:12.3e}  tol {tol:8.1e}  {'PASS' if ok else 'FAIL'}")
    if failed:
        raise InvariantError("frame invariant suite failed")
    return 0


def _cmd_frame_render(args) -> int:
    if args.frame is not None:
        frame = load_frame(args.frame)
    else:
        filt = make_filter(make_profile(POLYNOMIAL_SHAPE, args.m))
        frame = build_frame(_basis_from_args(args), filt, args.jmax, args.nodes_per_level)
    lev = frame.level(args.j)
    if not 1 <= args.nu <= lev.n_nodes:
        raise ValueError(f"nu must be in 1..{lev.n_nodes} at level {args.j}")
    if frame.basis.kind == "jacobi":
        x = np.linspace(-1.0, 1.0, args.points)
    else:
        x = np.arange(args.points) / args.points
    table = frame.basis.eval_all(lev.freq_hi, x)[lev.freq_lo :]
    psi_vals = lev.psi[args.nu - 1] @ table
    _write_csv(
        args.out,
        ["x", "psi"],
        ([f"{a:.17g}", f"{b:.17g}"] for a, b in zip(x, psi_vals)),
    )
    return 0


def _cmd_model_dump(args) -> int:
    model = wicksell_model(args.kmax) if args.kind == "wicksell" else direct_model(args.kmax)
    _write_csv(
        args.out,
        ["k", "b"],
        ([k, f"{b:.17g}"] for k, b in enumerate(model.b)),
    )
    return 0


def _read_observation(path, epsilon) -> SequenceObservation:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            try:
                idx = int(row[0])
            except ValueError:
                continue  # header line
            rows.append((idx, float(row[1])))
    if not rows:
        raise ValueError(f"no observation rows in {path}")
    rows.sort()
    indices = [i for i, _ in rows]
    if indices != list(range(len(rows))):
        raise ValueError("observation indices must cover 0..kmax exactly once")
    return SequenceObservation(np.asarray([y for _, y in rows]), epsilon)


def _cmd_estimate(args) -> int:
    obs = _read_observation(args.input, args.epsilon)
    kmax = obs.kmax
    model = wicksell_model(kmax) if args.model == "wicksell" else direct_model(kmax)

    if args.method == "needd":
        if args.frame is None:
            raise ValueError("--frame is required for the thresholding method")
        frame = load_frame(args.frame)
        plan = make_threshold_plan(frame, model, args.epsilon, kappa=args.kappa)
        # pad from the frame budget up to the observation length so every
        # method emits the same 0..kmax rows
        fhat = np.zeros(kmax + 1)
        coeffs = need_d(frame, model, obs, plan).coeffs
        fhat[: coeffs.shape[0]] = coeffs
    elif args.method == "svd-proj":
        n_keep = args.n_keep if args.n_keep is not None else kmax // 2
        fhat = svd_projection(model, obs, n_keep)
    else:
        config = make_adaptive_config(model, args.epsilon, args.grid_n, args.gamma)
        fhat = svd_adaptive(model, obs, config)

    _write_csv(
        args.out,
        ["i", "fhat"],
        ([i, f"{v:.17g}"] for i, v in enumerate(fhat)),
    )
    if args.render is not None:
        x = np.arange(1, args.points + 1) / args.points
        vals = np.asarray(fhat) @ eval_e(model, len(fhat) - 1, x)
        _write_csv(
            args.render,
            ["x", "fhat"],
            ([f"{a:.17g}", f"{b:.17g}"] for a, b in zip(x, vals)),
        )
    return 0


def _load_config(path) -> SimulationConfig:
    with open(path, encoding="utf-8") as fh:
        return SimulationConfig.from_dict(json.load(fh))


def _cmd_simulate(args) -> int:
    config = _load_config(args.config)
    report = run_experiment(config)
    paths = emit_report(report, "csv", args.out) + emit_report(report, "json", args.out)
    print("wrote " + ", ".join(paths))
    return 0


def _cmd_rates(args) -> int:
    config = _load_config(args.config)
    from .simlab import _build_frame  # shares the frame construction with simulate

    frame = _build_frame(config.frame)
    eps_list = tuple(args.eps) if args.eps else RATE_EPS_DEFAULT
    coeffs = np.exp(-np.arange(64) / 4.0)
    coeffs /= math.sqrt(float(np.sum(coeffs**2)))
    s = 4.0
    rows = []
    slopes = {}
    for model, nu in ((wicksell_model(frame.budget), 0.5), (direct_model(frame.budget), 0.0)):
        study = rate_study(
            model,
            frame,
            coeffs,
            eps_list,
            config.runs,
            RateTarget(s, 2.0, 2.0, nu, s / (s + nu + 0.5)),
            n=config.n,
            kappa=config.needd.kappa,
            master_seed=config.seed,
        )
        slopes[model.kind] = study
        for e, m in zip(study.eps, study.mean_rmse):
            rows.append([model.kind, f"{e:.17g}", f"{m:.17g}",
                         f"{study.slope:.17g}", f"{study.slope_stderr:.17g}"])
    _write_csv(args.out, ["model", "eps", "mean_rmse", "slope", "slope_stderr"], rows)
    for kind, study in slopes.items():
        print(f"{kind}: slope={study.slope:.4f} (stderr {study.slope_stderr:.4f}), "
              f"theory mu={study.rate_target.mu:.4f}, gap={study.gap:+.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="needlets", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    quad = sub.add_parser("quad", help="quadrature rules").add_subparsers(
        dest="action", required=True
    )
    p = quad.add_parser("dump", help="emit nodes and weights as CSV")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_quad_dump)

    filt = sub.add_parser("filter", help="dyadic filters").add_subparsers(
        dest="action", required=True
    )
    p = filt.add_parser("plot", help="emit (xi, a(xi)) samples as CSV")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--points", type=int, default=501)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_filter_plot)

    frame = sub.add_parser("frame", help="needlet frames").add_subparsers(
        dest="action", required=True
    )
    p = frame.add_parser("build", help="build a frame and save it")
    _frame_build_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_frame_build)
    p = frame.add_parser("check", help="run the frame invariant suite")
    p.add_argument("path")
    p.set_defaults(func=_cmd_frame_check)
    p = frame.add_parser("render", help="emit one needlet's graph as CSV")
    p.add_argument("--frame", help="saved frame to load (otherwise built from the build flags)")
    _frame_build_args(p)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--nu", type=int, required=True, help="1-based node index within the level")
    p.add_argument("--points", type=int, default=1001)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_frame_render)

    model = sub.add_parser("model", help="sequence models").add_subparsers(
        dest="action", required=True
    )
    p = model.add_parser("dump", help="emit singular values as CSV")
    p.add_argument("--kind", choices=("wicksell", "direct"), default="wicksell")
    p.add_argument("--kmax", type=int, default=512)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_model_dump)

    p = sub.add_parser("estimate", help="estimate one observation file")
    p.add_argument("--model", choices=("wicksell", "direct"), default="wicksell")
    p.add_argument("--frame", help="saved frame (required for needd)")
    p.add_argument("--input", required=True, help="CSV with rows (i, Y_i)")
    p.add_argument("--method", choices=("needd", "svd-proj", "svd-adapt"), required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--kappa", type=float, default=KAPPA_DEFAULT)
    p.add_argument("--n-keep", type=int, default=None, help="projection cutoff index")
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--grid-n", type=int, default=1024, help="grid resolution bounding the adaptive cutoff")
    p.add_argument("--out", required=True)
    p.add_argument("--render", help="also write the natural-domain rendering (x, fhat(x))")
    p.add_argument("--points", type=int, default=512, help="rendering grid size")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("simulate", help="run the Monte-Carlo bake-off")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output stem; writes <stem>_L1.csv, <stem>_RMSE.csv, <stem>.json")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("rates", help="noise-decay rate study (thresholding estimator)")
    p.add_argument("--config", required=True)
    p.add_argument("--eps", type=float, action="append", help="noise level (repeatable); default pinned ladder")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_rates)

    return parser


def _frame_build_args(p) -> None:
    p.add_argument("--basis", choices=("jacobi", "fourier"), default="jacobi")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--jmax", type=int, default=7)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--nodes-per-level", choices=(NODES_EXACT, NODES_PAPER), default=NODES_EXACT)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (InvariantError, NormResolutionError, UnresolvedIntegrandError) as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
