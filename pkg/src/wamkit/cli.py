"""Command-line front end.

Every command prints a single JSON object to stdout (or aligned key/value
text with ``--no-json``); logs and warnings go to stderr so stdout stays
machine-parseable. Exit codes: 0 success, 2 rejected input, 3 numerical
failure during computation.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .errors import ComputationError, InvalidInput, ValidationError
from .featstore import read_features, read_model, write_model
from .gmm import EmConfig, TransformInfo, aic, fit_gmm, log_transform, select_k
from .metrics import Metric, MetricReport, config_digest, fid, kid, sensitivity_ratios
from .normtest import marginal_normality_report
from .transport import ground_cost, solve_discrete_ot

log = logging.getLogger("wamkit")

_EXIT_VALIDATION = 2
_EXIT_NUMERICAL = 3


def _report_payload(report: MetricReport) -> dict:
    return {
        "metric": report.metric.value,
        "value": report.value,
        "sample_sizes": list(report.sample_sizes),
        "config_digest": report.config_digest,
        "notes": report.notes,
    }


def _load_transformed(path: str, ns) -> np.ndarray:
    x = read_features(path).data.astype(np.float64)
    if ns.log_transform:
        return log_transform(x, ns.epsilon)
    return x


def _em_config(ns) -> EmConfig:
    return EmConfig(seed=ns.seed)


def _transform_info(ns) -> TransformInfo:
    return TransformInfo(log=ns.log_transform, epsilon=ns.epsilon)


def cmd_fit(ns) -> dict:
    x = _load_transformed(ns.features, ns)
    gmm = fit_gmm(x, ns.k, _em_config(ns)).with_transform(_transform_info(ns))
    write_model(gmm, ns.out)
    return {
        "k": gmm.k,
        "loglik": gmm.meta.loglik,
        "aic": aic(gmm, x),
        "iterations": gmm.meta.iterations,
        "out": ns.out,
    }


def cmd_choose_k(ns) -> dict:
    x = _load_transformed(ns.features, ns)
    if ns.k_grid:
        try:
            grid = sorted({int(v) for v in ns.k_grid.split(",")})
        except ValueError:
            raise InvalidInput(f"could not parse --k-grid {ns.k_grid!r}") from None
    else:
        grid = list(range(1, ns.k_max + 1))
    config = _em_config(ns)
    curve = []
    for k in grid:
        gmm = fit_gmm(x, k, config)
        curve.append((k, aic(gmm, x)))
        log.info("k=%d aic=%.6g", k, curve[-1][1])
    knee = select_k(curve, sensitivity=ns.sensitivity, skip_prefix=ns.skip)
    if ns.plot:
        with open(ns.plot, "w") as fh:
            fh.write("k,aic\n")
            for k, value in curve:
                fh.write(f"{k},{value!r}\n")
    return {
        "k_star": knee.k,
        "fallback_used": knee.fallback,
        "curve": [[k, value] for k, value in curve],
    }


def _side_gmm(ns, side: str):
    features = getattr(ns, f"features_{side}")
    model = getattr(ns, f"model_{side}")
    if (features is None) == (model is None):
        raise InvalidInput(f"give exactly one of --features-{side} or --model-{side}")
    if model is not None:
        return read_model(model)
    x = _load_transformed(features, ns)
    return fit_gmm(x, ns.k, _em_config(ns)).with_transform(_transform_info(ns))


def cmd_wam(ns) -> dict:
    gmm_a = _side_gmm(ns, "a")
    gmm_b = _side_gmm(ns, "b")
    if gmm_a.meta.transform != gmm_b.meta.transform:
        log.warning(
            "transform mismatch between sides: %s vs %s",
            gmm_a.meta.transform,
            gmm_b.meta.transform,
        )
    ground = ground_cost(gmm_a, gmm_b, threads=ns.threads)
    plan = solve_discrete_ot(ground, gmm_a.weights, gmm_b.weights)
    check = abs(float((plan.matrix * ground).sum()) - plan.cost)
    return {
        "metric": Metric.WAM2.value,
        "value": plan.cost,
        "k_a": gmm_a.k,
        "k_b": gmm_b.k,
        "seed": ns.seed,
        "transport_cost_check": check,
    }


def cmd_fid(ns) -> dict:
    x_a = read_features(ns.features_a).data.astype(np.float64)
    x_b = read_features(ns.features_b).data.astype(np.float64)
    return _report_payload(fid(x_a, x_b))


def cmd_kid(ns) -> dict:
    x_a = read_features(ns.features_a).data.astype(np.float64)
    x_b = read_features(ns.features_b).data.astype(np.float64)
    return _report_payload(kid(x_a, x_b, block_size=ns.block_size, threads=ns.threads))


def cmd_ks(ns) -> dict:
    x = read_features(ns.features).data.astype(np.float64)
    report = marginal_normality_report(x, alpha=ns.alpha)
    payload = {
        "fraction_rejected": report.fraction_rejected,
        "n": x.shape[0],
        "n_marginals": x.shape[1],
        "alpha": ns.alpha,
    }
    if ns.per_marginal:
        payload["marginals"] = [
            {
                "index": r.marginal_index,
                "statistic": r.statistic,
                "p_value": r.p_value,
                "degenerate": r.degenerate,
            }
            for r in report.results
        ]
    return payload


def cmd_ratio(ns) -> dict:
    def wrap(value: float) -> MetricReport:
        return MetricReport(
            metric=Metric.RATIO,
            value=value,
            sample_sizes=(1, 1),
            config_digest=config_digest({"metric": "RATIO"}),
        )

    ratios = sensitivity_ratios(
        wrap(ns.orig), wrap(ns.pert), wrap(ns.orig_other), wrap(ns.pert_other)
    )
    return {
        "r_first": ratios.r_first,
        "r_second": ratios.r_second,
        "r": ratios.r,
    }


def _add_transform_flags(sub):
    sub.add_argument("--epsilon", type=float, default=1e-6,
                     help="offset added before the log transform")
    sub.add_argument("--no-log-transform", dest="log_transform",
                     action="store_false", default=True,
                     help="fit on raw features instead of log-scaled ones")


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="RNG seed for mixture fits (default 17)")
    shared.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="worker threads; values never depend on this")
    shared.add_argument("--json", dest="json_out", action="store_true",
                        default=argparse.SUPPRESS, help="JSON on stdout (default)")
    shared.add_argument("--no-json", dest="json_out", action="store_false",
                        default=argparse.SUPPRESS,
                        help="aligned key/value text instead of JSON")

    parser = argparse.ArgumentParser(
        prog="wamkit",
        description="Distribution distances between image-feature sets",
    )
    parser.add_argument("--seed", type=int, default=17)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--json", dest="json_out", action="store_true", default=True)
    parser.add_argument("--no-json", dest="json_out", action="store_false")
    commands = parser.add_subparsers(dest="command", required=True)

    fit_p = commands.add_parser("fit", parents=[shared],
                                help="fit a mixture and write a gmm-v1 model")
    fit_p.add_argument("--features", required=True)
    fit_p.add_argument("--k", type=int, required=True)
    _add_transform_flags(fit_p)
    fit_p.add_argument("--out", required=True)
    fit_p.set_defaults(handler=cmd_fit)

    choose_p = commands.add_parser("choose-k", parents=[shared],
                                   help="scan component counts and pick the knee")
    choose_p.add_argument("--features", required=True)
    choose_p.add_argument("--k-max", type=int, default=50)
    choose_p.add_argument("--k-grid", default=None,
                          help="comma-separated k values overriding --k-max")
    choose_p.add_argument("--sensitivity", type=float, default=0.5)
    choose_p.add_argument("--skip", type=int, default=2,
                          help="curve points dropped before knee detection")
    _add_transform_flags(choose_p)
    choose_p.add_argument("--plot", default=None, help="write the curve as CSV")
    choose_p.set_defaults(handler=cmd_choose_k)

    wam_p = commands.add_parser("wam", parents=[shared],
                                help="squared mixture transport distance")
    wam_p.add_argument("--features-a")
    wam_p.add_argument("--model-a")
    wam_p.add_argument("--features-b")
    wam_p.add_argument("--model-b")
    wam_p.add_argument("--k", type=int, default=10,
                       help="components fitted to each features side")
    _add_transform_flags(wam_p)
    wam_p.set_defaults(handler=cmd_wam)

    fid_p = commands.add_parser("fid", parents=[shared],
                                help="Gaussian transport distance on raw features")
    fid_p.add_argument("--features-a", required=True)
    fid_p.add_argument("--features-b", required=True)
    fid_p.set_defaults(handler=cmd_fid)

    kid_p = commands.add_parser("kid", parents=[shared],
                                help="unbiased kernel distance on raw features")
    kid_p.add_argument("--features-a", required=True)
    kid_p.add_argument("--features-b", required=True)
    kid_p.add_argument("--block-size", type=int, default=None)
    kid_p.set_defaults(handler=cmd_kid)

    ks_p = commands.add_parser("ks", parents=[shared],
                               help="per-marginal normality check")
    ks_p.add_argument("--features", required=True)
    ks_p.add_argument("--alpha", type=float, default=0.01)
    ks_p.add_argument("--per-marginal", action="store_true")
    ks_p.set_defaults(handler=cmd_ks)

    ratio_p = commands.add_parser("ratio", parents=[shared],
                                  help="perturbation sensitivity ratios")
    ratio_p.add_argument("--orig", type=float, required=True)
    ratio_p.add_argument("--pert", type=float, required=True)
    ratio_p.add_argument("--orig-other", type=float, required=True)
    ratio_p.add_argument("--pert-other", type=float, required=True)
    ratio_p.set_defaults(handler=cmd_ratio)

    return parser


def _emit(payload: dict, json_out: bool) -> None:
    if json_out:
        print(json.dumps(payload))
        return
    for key, value in payload.items():
        print(f"{key}: {value}")


def main(argv=None) -> int:
    # force=True rebinds the handler to whatever sys.stderr is now, so
    # repeated in-process invocations (tests, notebooks) keep logging to
    # the live stream instead of a stale one.
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(message)s",
                        level=logging.INFO, force=True)
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.threads is None:
        ns.threads = os.cpu_count() or 1
    if ns.threads < 1:
        log.error("--threads must be >= 1, got %d", ns.threads)
        return _EXIT_VALIDATION
    try:
        payload = ns.handler(ns)
    except ValidationError as exc:
        log.error("%s", exc)
        return _EXIT_VALIDATION
    except FileNotFoundError as exc:
        log.error("file not found: %s", exc.filename or exc)
        return _EXIT_VALIDATION
    except OSError as exc:
        log.error("i/o failure: %s", exc)
        return _EXIT_VALIDATION
    except ComputationError as exc:
        log.error("%s", exc)
        return _EXIT_NUMERICAL
    _emit(payload, ns.json_out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
