"""Command-line front end mirroring the HTTP service.

Every data command renders the same payloads as the service through the same
serializer, so `--format json` output is byte-identical to the corresponding
endpoint's response. Exit codes: 0 success, 2 invalid inputs, 3 infeasible
targets.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Optional, Sequence

from .advisor import PrivacyFirstAnswers, ReliabilityTarget, RiskTarget
from .attacksim import scenario_from_dict, worst_case_scenario
from .errors import DomainError, EngineError, InfeasibleError
from .risk import DEFAULT_ALPHA0_GRID
from .serialize import csv_text, json_text, parse_grid
from .service import (
    curve_payload,
    posterior_payload,
    power_payload,
    privacy_first_payload,
    risk_payload,
    simulate_payload,
    utility_first_payload,
    parse_privacy_first_request,
    parse_utility_first_request,
    parse_simulate_request,
)
from .tradeoff import mechanism_from_dict
from .utility import utility_model_from_dict

_MECH_KINDS = ("laplace", "gaussian", "uniform-sampling", "dp-bound")


def _add_output_args(p: argparse.ArgumentParser, default_format: str) -> None:
    p.add_argument("--output", "-o", default="-", help="output file, '-' for stdout")
    p.add_argument(
        "--format",
        choices=("csv", "json"),
        default=default_format,
        help=f"output format (default {default_format})",
    )


def _add_mech_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", required=True, choices=_MECH_KINDS)
    p.add_argument("--mu", type=float, help="privacy parameter (noise and sampling kinds)")
    p.add_argument("--sensitivity", type=float, help="query sensitivity (default 1)")
    p.add_argument("--n", type=int, help="dataset size (uniform-sampling)")
    p.add_argument("--epsilon", type=float, help="epsilon (dp-bound)")
    p.add_argument("--delta", type=float, help="delta (dp-bound, default 0)")


def _mech_from_args(args: argparse.Namespace):
    data: dict = {"kind": args.kind}
    for name in ("mu", "sensitivity", "epsilon", "delta", "n"):
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    return mechanism_from_dict(data)


def _alphas_from_args(args: argparse.Namespace):
    if args.alpha and args.grid:
        raise DomainError("give either --alpha or --grid, not both")
    if args.alpha:
        return tuple(args.alpha)
    if args.grid:
        return parse_grid(args.grid)
    raise DomainError("missing --alpha or --grid")


def _points_csv(payload: dict, header: Sequence[str]) -> str:
    return csv_text(header, payload["points"])


def _cmd_curve(args: argparse.Namespace) -> str:
    payload = curve_payload(_mech_from_args(args), _alphas_from_args(args))
    if args.format == "json":
        return json_text(payload)
    return _points_csv(payload, ("alpha", "beta"))


def _cmd_risk(args: argparse.Namespace) -> str:
    grid = parse_grid(args.alpha0_grid) if args.alpha0_grid else DEFAULT_ALPHA0_GRID
    payload = risk_payload(_mech_from_args(args), grid)
    if args.format == "json":
        return json_text(payload)
    rows = [
        (a, rho, power)
        for (a, rho), (_, power) in zip(payload["rho_at"], payload["attack_power_at"])
    ]
    return csv_text(("alpha0", "rho_at", "attack_power"), rows)


def _cmd_posterior(args: argparse.Namespace) -> str:
    payload = posterior_payload(
        _mech_from_args(args), args.prior, _alphas_from_args(args)
    )
    if args.format == "json":
        return json_text(payload)
    return _points_csv(payload, ("alpha", "posterior"))


def _model_from_args(args: argparse.Namespace):
    data: dict = {}
    for name in ("n", "sigma", "m0", "m", "alpha0"):
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    if args.data_range is not None and args.delta_q is not None:
        raise DomainError("give either --delta-q or --data-range, not both")
    if args.data_range is not None:
        parts = args.data_range.split(":")
        if len(parts) != 2:
            raise DomainError(f"--data-range looks like lo:hi, got {args.data_range!r}")
        try:
            lo, hi = float(parts[0]), float(parts[1])
        except ValueError:
            raise DomainError(f"--data-range needs numbers, got {args.data_range!r}")
        if not lo < hi:
            raise DomainError(f"--data-range needs lo < hi, got {args.data_range!r}")
        if "n" not in data:
            raise DomainError("--data-range requires --n")
        data["delta_q"] = (hi - lo) / data["n"]
    elif args.delta_q is not None:
        data["delta_q"] = args.delta_q
    if args.mu is not None:
        data["mu"] = args.mu if args.mu == "unprotected" else _parse_mu(args.mu)
    return utility_model_from_dict(data)


def _parse_mu(raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise DomainError(f"--mu must be a number or 'unprotected', got {raw!r}")


def _cmd_power(args: argparse.Namespace) -> str:
    model = _model_from_args(args)
    if args.grid:
        grid = parse_grid(args.grid)
    elif args.view == "function":
        grid = (model.m,)
    else:
        raise DomainError("--view roc requires --grid")
    payload = power_payload(model, args.view, grid)
    if args.format == "json":
        return json_text(payload)
    header = ("m", "power") if args.view == "function" else ("alpha", "power")
    return _points_csv(payload, header)


def _read_json_file(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise DomainError(f"cannot read {path!r}: {exc}")
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path!r} is not valid JSON: {exc}")


def _cmd_advise(args: argparse.Namespace) -> str:
    if args.format == "csv":
        raise DomainError("advise reports are JSON only")
    if args.input is None and args.mode is None:
        raise DomainError("choose an advise mode (privacy-first / utility-first) or give --input")
    if args.input is not None:
        if args.mode is not None:
            raise DomainError("give either an advise mode or --input, not both")
        body = _read_json_file(args.input)
        mode = body.get("mode") if isinstance(body, dict) else None
        if mode == "privacy-first":
            return json_text(privacy_first_payload(**parse_privacy_first_request(body)))
        if mode == "utility-first":
            return json_text(utility_first_payload(**parse_utility_first_request(body)))
        raise DomainError("--input file requires \"mode\": \"privacy-first\" or \"utility-first\"")
    if args.mode == "privacy-first":
        target = RiskTarget(
            max_relative_risk=args.max_rho,
            max_power=args.max_power,
            at_alpha0=args.at_alpha0,
        )
        answers = PrivacyFirstAnswers(
            allow_blatant=args.blatant,
            allow_arbitrary_confidence=args.arbitrary_confidence,
            risk_target=target,
            prefer_kind=args.prefer,
        )
        return json_text(
            privacy_first_payload(answers, sensitivity=args.sensitivity, n=args.n)
        )
    model = _model_from_args(args)
    reliability = ReliabilityTarget(
        rel_beta_tol=args.rel_beta_tol, power_floor=args.power_floor
    )
    return json_text(utility_first_payload(model, reliability, args.mech))


def _cmd_simulate(args: argparse.Namespace) -> str:
    if args.input is not None:
        if args.kind is not None:
            raise DomainError("give either --input or mechanism flags, not both")
        scenario = scenario_from_dict(_read_json_file(args.input))
    else:
        if args.kind is None:
            raise DomainError("missing --input or --kind")
        scenario = worst_case_scenario(_mech_from_args(args))
    if (args.thresholds is None) == (args.alphas is None):
        raise DomainError("give exactly one of --thresholds / --alphas")
    thresholds = tuple(parse_grid(args.thresholds)) if args.thresholds else None
    alphas = tuple(parse_grid(args.alphas)) if args.alphas else None
    payload = simulate_payload(
        scenario, args.trials, args.seed, thresholds=thresholds, alphas=alphas
    )
    if args.format == "json":
        return json_text(payload)
    rows = [
        (p["threshold"], p["alpha_hat"], p["power_hat"], p["alpha_se"], p["power_se"])
        for p in payload["points"]
    ]
    return csv_text(
        ("threshold", "alpha_hat", "power_hat", "alpha_se", "power_se"), rows
    )


def _cmd_serve(args: argparse.Namespace) -> str:
    import uvicorn

    from .service import create_app

    app = create_app(store_path=args.store_path, static_dir=args.static_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return ""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dptradeoff",
        description="privacy-utility trade-off analysis for noisy data releases",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curve", help="trade-off curve beta = f(alpha) as CSV or JSON")
    _add_mech_args(p)
    p.add_argument("--alpha", type=float, action="append", help="single level, repeatable")
    p.add_argument("--grid", help="alpha grid: start:stop:step or comma list")
    _add_output_args(p, "csv")
    p.set_defaults(run=_cmd_curve)

    p = sub.add_parser("risk", help="failure class, rho and pointwise attack risk")
    _add_mech_args(p)
    p.add_argument("--alpha0-grid", help="levels: start:stop:step or comma list")
    _add_output_args(p, "json")
    p.set_defaults(run=_cmd_risk)

    p = sub.add_parser("posterior", help="attacker posterior vs test level")
    _add_mech_args(p)
    p.add_argument("--prior", type=float, required=True, help="prior membership probability")
    p.add_argument("--alpha", type=float, action="append", help="single level, repeatable")
    p.add_argument("--grid", help="alpha grid: start:stop:step or comma list")
    _add_output_args(p, "csv")
    p.set_defaults(run=_cmd_posterior)

    p = sub.add_parser("power", help="power of the noisy one-sided mean test")
    p.add_argument("--n", type=int, help="number of observations")
    p.add_argument("--sigma", type=float, help="known observation standard deviation")
    p.add_argument("--delta-q", type=float, help="query sensitivity")
    p.add_argument("--data-range", help="public data range lo:hi (sets delta-q = (hi-lo)/n)")
    p.add_argument("--m0", type=float, default=0.0, help="null mean (default 0)")
    p.add_argument("--m", type=float, help="alternative mean")
    p.add_argument("--alpha0", type=float, help="test level")
    p.add_argument("--mu", help="privacy parameter, or 'unprotected'")
    p.add_argument("--view", choices=("function", "roc"), default="function")
    p.add_argument("--grid", help="m grid (function) or alpha grid (roc)")
    _add_output_args(p, "csv")
    p.set_defaults(run=_cmd_power)

    p = sub.add_parser("advise", help="recommend a mechanism and privacy parameter")
    advise_sub = p.add_subparsers(dest="mode")
    p.add_argument("--input", help="JSON file with a full inputs snapshot")
    _add_output_args(p, "json")
    p.set_defaults(run=_cmd_advise, mode=None)

    pf = advise_sub.add_parser("privacy-first", help="risk questionnaire first")
    pf.add_argument(
        "--blatant",
        action=argparse.BooleanOptionalAction,
        required=True,
        help="are releases that blatantly reveal records acceptable?",
    )
    pf.add_argument(
        "--arbitrary-confidence",
        action=argparse.BooleanOptionalAction,
        required=True,
        help="may attacker confidence grow without bound?",
    )
    pf.add_argument("--max-rho", type=float, help="cap on the odds-gain ratio rho")
    pf.add_argument("--max-power", type=float, help="cap on attack power")
    pf.add_argument("--at-alpha0", type=float, help="confidence level for the cap")
    pf.add_argument("--prefer", choices=_MECH_KINDS, help="preferred mechanism kind")
    pf.add_argument("--sensitivity", type=float, default=1.0)
    pf.add_argument("--n", type=int, help="dataset size (uniform-sampling targets)")
    _add_output_args(pf, "json")
    pf.set_defaults(run=_cmd_advise, mode="privacy-first", input=None)

    uf = advise_sub.add_parser("utility-first", help="test reliability first")
    uf.add_argument("--n", type=int, help="number of observations")
    uf.add_argument("--sigma", type=float, help="known observation standard deviation")
    uf.add_argument("--delta-q", type=float, help="query sensitivity")
    uf.add_argument("--data-range", help="public data range lo:hi")
    uf.add_argument("--m0", type=float, default=0.0, help="null mean (default 0)")
    uf.add_argument("--m", type=float, help="alternative mean")
    uf.add_argument("--alpha0", type=float, help="test level")
    uf.add_argument("--rel-beta-tol", type=float, help="relative Type II inflation cap")
    uf.add_argument("--power-floor", type=float, help="absolute power floor")
    uf.add_argument("--mech", choices=("gaussian", "laplace"), default="gaussian")
    _add_output_args(uf, "json")
    uf.set_defaults(run=_cmd_advise, mode="utility-first", input=None, mu=None)

    p = sub.add_parser("simulate", help="Monte Carlo membership attack")
    _add_mech_args_optional(p)
    p.add_argument("--input", help="scenario JSON file")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--thresholds", help="statistic thresholds: comma list or range")
    p.add_argument("--alphas", help="target false-positive rates: comma list or range")
    _add_output_args(p, "csv")
    p.set_defaults(run=_cmd_simulate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=int(os.environ.get("PORT", "8000")))
    p.add_argument("--store-path", default=None, help="scenario store directory")
    p.add_argument("--static-dir", default=None, help="UI static build directory")
    p.set_defaults(run=_cmd_serve)

    return parser


def _add_mech_args_optional(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", choices=_MECH_KINDS)
    p.add_argument("--mu", type=float)
    p.add_argument("--sensitivity", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = args.run(args)
    except InfeasibleError as exc:
        print(f"error ({exc.code}): {exc}", file=sys.stderr)
        return 3
    except EngineError as exc:
        print(f"error ({exc.code}): {exc}", file=sys.stderr)
        return 2
    if text:
        if args.output == "-":
            sys.stdout.write(text)
        else:
            try:
                with open(args.output, "w") as fh:
                    fh.write(text)
            except OSError as exc:
                print(f"error: cannot write {args.output!r}: {exc}", file=sys.stderr)
                return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
