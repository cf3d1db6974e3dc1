"""Command-line surface: fit, eval, drift, defer, diagnose, simulate-nn.

One command produces one artifact file.  Exit codes: 0 success, 1 usage
error, 2 data/model error.  Every subcommand prints its effective
configuration (defaults resolved) before doing any work, and all
randomized paths honor --seed.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import applications, data_io, diagnostics
from .calibration import Hyperparams
from .errors import (
    DegenerateHyperparams,
    EmptyInput,
    LengthMismatch,
    LogitUncertaintyError,
)
from .gmm import FitConfig, GaussianComponent, GmmModel
from .model import (
    DEFAULT_C_MAX,
    DEFAULT_ELBOW_TOL,
    FittedClass,
    batch_predict,
    fit_uncertainty_model,
)

_FIT_DEFAULTS = {
    "u1": 0.5,
    "u2": 0.2,
    "q1": 0.8,
    "q2": 0.6,
    "max_iterations": 500,
    "convergence_tol": 1e-7,
    "covariance_regularizer": 1e-6,
    "num_restarts": 3,
    "c_max": DEFAULT_C_MAX,
    "elbow_tol": DEFAULT_ELBOW_TOL,
    "min_samples_per_class": None,
    "seed": 0,
}

_USAGE_ERRORS = (DegenerateHyperparams, LengthMismatch, EmptyInput, ValueError)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the contract reserves 2 for
    # data errors, so route usage problems through our own exception.
    def error(self, message):
        raise _UsageError(message)


def _fraction(value: float) -> float:
    """Percentile integers (q1=80) are accepted and divided by 100."""
    return value / 100.0 if value > 1.0 else value


def _print_config(name: str, cfg: dict) -> None:
    print(f"effective configuration ({name}):")
    print(json.dumps(cfg, indent=2, default=str))


def _resolve_fit_config(args) -> dict:
    cfg = dict(_FIT_DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                loaded = json.load(fh)
        except OSError as exc:
            raise data_io.IoFailure(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise data_io.CorruptModelFile(
                f"config {args.config} is not valid JSON: {exc}"
            ) from exc
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise _UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    for key in cfg:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    for key in ("u1", "u2", "q1", "q2"):
        cfg[key] = _fraction(float(cfg[key]))
    return cfg


def _add_fit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with any of the fit settings")
    p.add_argument("--u1", type=float, help="upper target uncertainty")
    p.add_argument("--u2", type=float, help="lower target uncertainty")
    p.add_argument("--q1", type=float, help="upper score quantile (fraction or percentile)")
    p.add_argument("--q2", type=float, help="lower score quantile (fraction or percentile)")
    p.add_argument("--max-iterations", type=int, dest="max_iterations")
    p.add_argument("--convergence-tol", type=float, dest="convergence_tol")
    p.add_argument("--covariance-regularizer", type=float, dest="covariance_regularizer")
    p.add_argument("--num-restarts", type=int, dest="num_restarts")
    p.add_argument("--c-max", type=int, dest="c_max")
    p.add_argument("--elbow-tol", type=float, dest="elbow_tol")
    p.add_argument("--min-samples-per-class", type=int, dest="min_samples_per_class")
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="logit-uncertainty",
        description="Classifier uncertainty from logit outputs via per-class "
        "Gaussian mixture densities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit an uncertainty model from a logit CSV")
    p.add_argument("--train", required=True, help="training logit CSV")
    p.add_argument("--out", required=True, help="output model JSON")
    _add_fit_flags(p)

    p = sub.add_parser("eval", help="score a logit CSV with a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="output report CSV")

    p = sub.add_parser("drift", help="KL drift distance between two logit CSVs")
    p.add_argument("--model", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--stream", required=True)
    p.add_argument("--out", required=True, help="output drift CSV")

    p = sub.add_parser("defer", help="deferral cost-bound sweep for two reports")
    p.add_argument("--a-report", required=True, dest="a_report")
    p.add_argument("--b-report", required=True, dest="b_report")
    p.add_argument("--data", required=True, help="labeled logit CSV both reports score")
    p.add_argument("--thresholds", required=True, help="comma-separated values in [0,1]")
    p.add_argument("--out", required=True, help="output bounds CSV")

    p = sub.add_parser("diagnose", help="HDR and uncertainty-bound checks")
    p.add_argument("--model", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--n-mc", type=int, default=50000, dest="n_mc")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output diagnostics CSV")

    p = sub.add_parser("simulate-nn", help="wide random-network output simulation")
    p.add_argument("--widths", default="8,32,128,512")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--components", type=int, default=2)
    p.add_argument("--n", type=int, default=5000, help="networks per width")
    p.add_argument("--cw-hat", type=float, default=2.0, dest="cw_hat")
    p.add_argument("--cb", type=float, default=0.1)
    p.add_argument("--input-dim", type=int, default=4, dest="input_dim")
    p.add_argument("--bias-means", dest="bias_means", help="comma-separated")
    p.add_argument("--bias-stds", dest="bias_stds", help="comma-separated")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output convergence CSV")

    return parser


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        return [float(cell) for cell in text.split(",") if cell.strip() != ""]
    except ValueError as exc:
        raise _UsageError(f"{flag} expects comma-separated numbers: {exc}") from exc


def _cmd_fit(args) -> None:
    cfg = _resolve_fit_config(args)
    _print_config("fit", {**cfg, "train": args.train, "out": args.out})
    hp = Hyperparams(u1=cfg["u1"], u2=cfg["u2"], q1=cfg["q1"], q2=cfg["q2"])
    fit_config = FitConfig(
        max_iterations=int(cfg["max_iterations"]),
        convergence_tol=float(cfg["convergence_tol"]),
        covariance_regularizer=float(cfg["covariance_regularizer"]),
        seed=int(cfg["seed"]),
        num_restarts=int(cfg["num_restarts"]),
    )
    records = data_io.load_logit_records(args.train)
    model = fit_uncertainty_model(
        records,
        hp,
        fit_config,
        c_max=int(cfg["c_max"]),
        elbow_tol=float(cfg["elbow_tol"]),
        min_samples_per_class=(
            None
            if cfg["min_samples_per_class"] is None
            else int(cfg["min_samples_per_class"])
        ),
    )
    data_io.save_model(model, args.out)
    for i, entry in enumerate(model.per_class):
        if isinstance(entry, FittedClass):
            print(f"class {i}: fitted with {entry.gmm.num_components} component(s)")
        else:
            print(f"class {i}: unfitted ({entry.reason})")
    print(f"wrote model to {args.out}")


def _cmd_eval(args) -> None:
    _print_config("eval", {"model": args.model, "data": args.data, "out": args.out})
    model = data_io.load_model(args.model)
    records = data_io.load_logit_records(args.data)
    uncertainties = batch_predict(model, records)
    data_io.write_uncertainty_report(records, uncertainties, args.out)
    print(f"wrote {len(records)} uncertainty rows to {args.out}")


def _cmd_drift(args) -> None:
    _print_config(
        "drift",
        {
            "model": args.model,
            "reference": args.reference,
            "stream": args.stream,
            "out": args.out,
        },
    )
    model = data_io.load_model(args.model)
    reference = batch_predict(model, data_io.load_logit_records(args.reference))
    stream = batch_predict(model, data_io.load_logit_records(args.stream))
    kl = applications.drift_kl(reference, stream)
    ref_fit = applications.fit_gaussian_1d(reference)
    stream_fit = applications.fit_gaussian_1d(stream)
    lines = [
        "n_reference,n_stream,mu_reference,sigma_reference,mu_stream,sigma_stream,kl",
        f"{reference.size},{stream.size},{ref_fit.mu:.12g},{ref_fit.sigma:.12g},"
        f"{stream_fit.mu:.12g},{stream_fit.sigma:.12g},{kl:.12g}",
    ]
    data_io._atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(f"kl={kl:.12g}")


def _read_report_against(data_path, report_path):
    records = data_io.load_logit_records(data_path)
    idx, labels, uncertainties = data_io.read_uncertainty_report(report_path)
    if np.any(idx < 0) or np.any(idx >= len(records)):
        raise data_io.MalformedRow(
            f"{report_path}: sample_index outside the data file's range"
        )
    truth = np.array([records.records[i].true_label for i in idx])
    return uncertainties, labels == truth


def _cmd_defer(args) -> None:
    thresholds = _parse_float_list(args.thresholds, "--thresholds")
    if not thresholds:
        raise _UsageError("--thresholds needs at least one value")
    _print_config(
        "defer",
        {
            "a_report": args.a_report,
            "b_report": args.b_report,
            "data": args.data,
            "thresholds": thresholds,
            "out": args.out,
        },
    )
    u_a, ok_a = _read_report_against(args.data, args.a_report)
    u_b, ok_b = _read_report_against(args.data, args.b_report)
    rows = applications.cost_bound_sweep(
        u_a, ok_a, u_b, ok_b, thresholds, out_path=args.out
    )
    print(f"wrote {len(rows)} threshold rows to {args.out}")


def _cmd_diagnose(args) -> None:
    _print_config(
        "diagnose",
        {
            "model": args.model,
            "alpha": args.alpha,
            "n_mc": args.n_mc,
            "seed": args.seed,
            "out": args.out,
        },
    )
    model = data_io.load_model(args.model)
    rows = []
    for i in model.fitted_classes:
        entry = model.per_class[i]
        estimate = diagnostics.hdr_threshold(
            entry.gmm, args.alpha, args.n_mc, [args.seed, i]
        )
        r_alpha = diagnostics.mahalanobis_radius(args.alpha, entry.gmm.dimension)
        v1 = diagnostics.verify_hdr_uncertainty_bound(
            model, i, "q1", args.n_mc, [args.seed, i, 1]
        )
        v2 = diagnostics.verify_hdr_uncertainty_bound(
            model, i, "q2", args.n_mc, [args.seed, i, 2]
        )
        rows.append((i, args.alpha, estimate.f_alpha, r_alpha, v1, v2, args.n_mc))
        print(
            f"class {i}: f_alpha={estimate.f_alpha:.6g} r_alpha={r_alpha:.6g} "
            f"violations q1={v1:.4%} q2={v2:.4%}"
        )
    if not rows:
        raise EmptyInput("model has no fitted classes to diagnose")
    diagnostics.write_hdr_check_csv(rows, args.out)
    print(f"wrote diagnostics to {args.out}")


def _default_bias_mixture(components: int, means, stds) -> GmmModel:
    if means is None:
        # Far-separated defaults so multimodality survives the network noise.
        if components == 1:
            means = [0.0]
        else:
            means = list(np.linspace(-20.0, 20.0, components))
    if stds is None:
        stds = [1.0] * components
    if len(means) != components or len(stds) != components:
        raise _UsageError("--bias-means/--bias-stds must list one value per component")
    comps = tuple(
        GaussianComponent(
            weight=1.0 / components,
            mean=np.array([float(m)]),
            cholesky=np.array([[float(s)]]),
        )
        for m, s in zip(means, stds)
    )
    return GmmModel(components=comps, dimension=1)


def _cmd_simulate_nn(args) -> None:
    widths = [int(w) for w in _parse_float_list(args.widths, "--widths")]
    bias_means = (
        _parse_float_list(args.bias_means, "--bias-means") if args.bias_means else None
    )
    bias_stds = (
        _parse_float_list(args.bias_stds, "--bias-stds") if args.bias_stds else None
    )
    _print_config(
        "simulate-nn",
        {
            "widths": widths,
            "depth": args.depth,
            "components": args.components,
            "n_networks": args.n,
            "cw_hat": args.cw_hat,
            "cb": args.cb,
            "input_dim": args.input_dim,
            "bias_means": bias_means,
            "bias_stds": bias_stds,
            "seed": args.seed,
            "out": args.out,
        },
    )
    mixture = _default_bias_mixture(args.components, bias_means, bias_stds)
    config = diagnostics.NetworkSimConfig(
        depth=args.depth,
        widths=tuple(widths),
        input_set=np.ones((1, args.input_dim)),
        weight_variance_hat=args.cw_hat,
        bias_variance=args.cb,
        final_bias_mixture=mixture,
        n_networks=args.n,
        seed=args.seed,
    )
    samples = diagnostics.simulate_wide_network(config)
    stats = diagnostics.convergence_report(
        samples, args.components, FitConfig(seed=args.seed)
    )
    diagnostics.write_convergence_csv(
        widths, [s.size for s in samples], stats, args.out
    )
    for w, stat in zip(widths, stats):
        print(f"width {w}: ks_statistic={stat:.6g}")
    print(f"wrote convergence report to {args.out}")


_HANDLERS = {
    "fit": _cmd_fit,
    "eval": _cmd_eval,
    "drift": _cmd_drift,
    "defer": _cmd_defer,
    "diagnose": _cmd_diagnose,
    "simulate-nn": _cmd_simulate_nn,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        _HANDLERS[args.command](args)
    except (_UsageError, *_USAGE_ERRORS) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except LogitUncertaintyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def console_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_entry()
