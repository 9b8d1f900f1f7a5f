"""Command-line client.

Thin layer over the request handlers: parses files into request models,
runs them in-process (or POSTs to a running service with --server), writes
the JSON report to stdout (or --out) and a short human summary to stderr,
and exits with the report's exit code.
"""

from __future__ import annotations

import argparse
import json
import sys

from pydantic import BaseModel, ValidationError

from . import handlers
from .models import (
    AsdRequest,
    DemoRequest,
    ImplementRequest,
    InvertRequest,
    SimulateRequest,
    Tolerances,
    VerifyRequest,
)

_HANDLERS = {
    "implement": handlers.handle_implement,
    "invert": handlers.handle_invert,
    "verify": handlers.handle_verify,
    "asd": handlers.handle_asd,
    "demo-pt": handlers.handle_demo_pt,
    "simulate": handlers.handle_simulate,
}

_ENDPOINTS = {name: f"/{name}" for name in _HANDLERS}


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(handlers.EXIT_PARSE) from exc


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--samples", type=int, default=200)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--tol-ratio", type=float, default=1e-9)
    parser.add_argument("--tol-psd", type=float, default=1e-10)
    parser.add_argument("--tol-fixed", type=float, default=1e-9)
    parser.add_argument("--out", type=str, default=None, help="write the JSON report here")
    parser.add_argument("--server", type=str, default=None, help="POST to a running service")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="npovm",
        description="Construct, invert, verify, and simulate post-selected measurements.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("implement", help="decomposition -> post-selected POVM + verification")
    p.add_argument("decomposition", help="decomposition JSON file")
    _add_common(p)

    p = sub.add_parser("invert", help="post-selected POVM -> measurement family on a domain")
    p.add_argument("povm", help="POVM JSON file")
    p.add_argument("--reject", required=True, help="label of the rejected outcome")
    p.add_argument("--subspace", required=True, help="subspace JSON file (spanning matrices)")
    p.add_argument("--c0", type=float, default=None)
    _add_common(p)

    p = sub.add_parser("verify", help="check that a POVM implements a family on a domain")
    p.add_argument("family", help="measurement family JSON file")
    p.add_argument("povm", help="POVM JSON file")
    p.add_argument("subspace", help="subspace JSON file")
    p.add_argument("--reject", default=None)
    _add_common(p)

    p = sub.add_parser("asd", help="ambiguous state discrimination instance")
    p.add_argument("input", help="pure-state family or group representation JSON file")
    _add_common(p)

    p = sub.add_parser("demo-pt", help="built-in two-qubit partial-transpose demonstration")
    p.add_argument("--shots", type=int, default=100_000)
    _add_common(p)

    p = sub.add_parser("simulate", help="Monte Carlo post-selected measurement")
    p.add_argument("povm", help="POVM JSON file")
    p.add_argument("--state", required=True, help="density matrix JSON file")
    p.add_argument("--reject", required=True)
    p.add_argument("--shots", type=int, default=100_000)
    _add_common(p)

    return parser


def _build_request(args: argparse.Namespace) -> BaseModel:
    tol = Tolerances(ratio=args.tol_ratio, psd=args.tol_psd, fixed=args.tol_fixed)
    common = {"samples": args.samples, "seed": args.seed, "tolerances": tol}
    if args.command == "implement":
        return ImplementRequest(decomposition=_load_json(args.decomposition), **common)
    if args.command == "invert":
        return InvertRequest(
            povm=_load_json(args.povm),
            reject=args.reject,
            subspace=_load_json(args.subspace),
            c0=args.c0,
            **common,
        )
    if args.command == "verify":
        return VerifyRequest(
            family=_load_json(args.family),
            povm=_load_json(args.povm),
            subspace=_load_json(args.subspace),
            reject=args.reject,
            **common,
        )
    if args.command == "asd":
        return AsdRequest(input=_load_json(args.input), **common)
    if args.command == "demo-pt":
        return DemoRequest(
            samples=args.samples, shots=args.shots, seed=args.seed, tolerances=tol
        )
    if args.command == "simulate":
        return SimulateRequest(
            povm=_load_json(args.povm),
            state=_load_json(args.state),
            reject=args.reject,
            shots=args.shots,
            seed=args.seed,
            tolerances=tol,
        )
    raise SystemExit(handlers.EXIT_PARSE)


def _run_remote(server: str, command: str, req: BaseModel) -> dict:
    import httpx

    url = server.rstrip("/") + _ENDPOINTS[command]
    resp = httpx.post(url, json=req.model_dump(), timeout=300.0)
    resp.raise_for_status()
    return resp.json()


def _summary(report: dict) -> str:
    bits = [f"{report.get('command')}: {report.get('status')}"]
    for key in ("c", "acceptance", "max_ratio_error", "projection_norm", "acceptance_rate"):
        value = report.get(key)
        if isinstance(value, (int, float)):
            bits.append(f"{key}={value:.6g}")
        elif value is not None:
            bits.append(f"{key}={value}")
    if report.get("error"):
        bits.append(f"error: {report['error']}")
    return "  ".join(bits)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        req = _build_request(args)
    except ValidationError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return handlers.EXIT_PARSE
    if args.server:
        report = _run_remote(args.server, args.command, req)
    else:
        report = _HANDLERS[args.command](req)
    text = json.dumps(report, sort_keys=True, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    print(_summary(report), file=sys.stderr)
    return int(report.get("exit_code", handlers.EXIT_VERIFICATION))


if __name__ == "__main__":
    raise SystemExit(main())
