"""Command-line client.

Thin by construction: each subcommand parses flags into the request models
from schemas.py, calls the same service-layer function the HTTP API uses,
and writes the response as JSON or CSV.

Exit codes: 0 success, 1 check failure, 2 invalid input, 3 resource cap.
"""

from __future__ import annotations

import argparse
import sys

from pydantic import ValidationError

from . import __version__, service
from .harness import ExperimentSpec
from .model import ConsistencyError, DomainError
from .serialize import csv_text, json_text

EXIT_OK = 0
EXIT_CHECK_FAILURE = 1
EXIT_INVALID_INPUT = 2
EXIT_RESOURCE_CAP = 3


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _global_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=_int_list, default=None, help="site count(s), comma-separated")
    p.add_argument("--beta", type=_float_list, default=None, help="inverse temperature(s)")
    p.add_argument("--alpha", type=_float_list, default=None, help="critical-window parameter(s)")
    p.add_argument("--eps", type=_float_list, default=None, help="total-variation threshold(s)")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--workers", type=int, default=1, help="parallel workers")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="json", dest="fmt")
    p.add_argument("--cap-steps", type=int, default=10**9, dest="cap_steps")
    p.add_argument("--spec", default=None, help="experiment spec file (key=value lines)")


def _one(values, name: str, default=None):
    if not values:
        if default is not None:
            return default
        raise DomainError(f"--{name} is required")
    if len(values) != 1:
        raise DomainError(f"--{name} takes a single value here")
    return values[0]


def _start_value(text: str):
    if text in ("all-plus", "all-minus", "bottom"):
        return text
    return float(text)


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _emit_model(args, model, csv_shape=None) -> None:
    if args.fmt == "csv":
        if csv_shape is None:
            payload = model.model_dump()
            rows = [(k, v) for k, v in payload.items() if not isinstance(v, (list, dict))]
            _emit(args, csv_text(["key", "value"], rows))
        else:
            header, rows = csv_shape(model)
            _emit(args, csv_text(header, rows))
    else:
        _emit(args, json_text(model.model_dump()))


# per-command CSV layouts for curve-shaped payloads


def _kernel_csv(m):
    return ["state", "p", "q", "h"], list(zip(m.states, m.p, m.q, m.h))


def _stationary_csv(m):
    return ["state", "value"], list(zip(m.states, m.pi))


def _curve_csv(m):
    return ["t", "value"], list(zip(m.t, m.value))


def _electric_csv(m):
    rows = []
    for j in range(len(m.states)):
        edge_r = m.log_r[j] if j < len(m.log_r) else ""
        edge_c = m.log_c[j] if j < len(m.log_c) else ""
        rows.append((m.states[j], edge_r, edge_c, m.log_c_loop[j], m.log_w[j]))
    return ["state", "log_r_edge_up", "log_c_edge_up", "log_c_loop", "log_w"], rows


def _report_csv(report_model):
    header: list[str] = []
    for rec in report_model.records:
        for key in rec:
            if key not in header:
                header.append(key)
    rows = [[rec.get(col, "") for col in header] for rec in report_model.records]
    return header, rows


def _scan_request_from_args(args) -> service.ScanRequest:
    base: dict = {}
    if args.spec:
        spec = ExperimentSpec.from_file(args.spec)
        base = {
            "kind": spec.kind,
            "n": spec.n_list,
            "beta": spec.beta_list,
            "alpha": spec.alpha_list,
            "eps": spec.eps_list,
            "seed": spec.seed,
            "reps": spec.reps,
            "workers": spec.workers,
            "cap_steps": spec.cap_steps,
            "suites": spec.suites,
        }
    if getattr(args, "kind", None):
        base["kind"] = args.kind
    if args.n is not None:
        base["n"] = args.n
    if args.beta is not None:
        base["beta"] = args.beta
    if args.alpha is not None:
        base["alpha"] = args.alpha
    if args.eps is not None:
        base["eps"] = args.eps
    base.setdefault("seed", args.seed)
    base.setdefault("workers", args.workers)
    base.setdefault("cap_steps", args.cap_steps)
    if "kind" not in base:
        raise DomainError("scan needs a kind (positional) or a --spec file")
    return service.ScanRequest(**base)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="glauberlab",
        description="Exact analysis and Monte Carlo simulation of heat-bath Glauber "
        "dynamics on the mean-field Ising model.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, **kw) -> argparse.ArgumentParser:
        p = sub.add_parser(name, **kw)
        _global_flags(p)
        return p

    p = add("kernel", help="birth-and-death kernel of the magnetization chain")
    p.add_argument("--kind", choices=("free", "censored"), default="free")

    p = add("stationary", help="exact stationary law (dual-route checked)")
    p.add_argument("--kind", choices=("free", "censored"), default="free")

    p = add("tvcurve", help="exact total-variation curve")
    p.add_argument("--kind", choices=("free", "censored"), default="free")
    p.add_argument("--start", type=_start_value, default="all-plus")
    p.add_argument("--t-max", type=int, required=True, dest="t_max")
    p.add_argument("--record-every", type=int, default=1, dest="record_every")

    p = add("mix", help="mixing time by doubling and bisection")
    p.add_argument("--kind", choices=("free", "censored"), default="free")
    p.add_argument("--start", type=_start_value, default="all-plus")

    p = add("gap", help="spectral gap of the magnetization chain")
    p.add_argument("--kind", choices=("free", "censored"), default="free")

    add("fullgap", help="spectral gap of the full 2^n dynamics (n <= 12)")

    p = add("electric", help="log-domain electrical network of the chain")
    p.add_argument("--kind", choices=("free", "censored"), default="free")

    add("zeta", help="positive root of tanh(beta x) = x (beta > 1)")
    add("texp", help="supercritical mixing scale t_exp")

    p = add("simulate", help="Monte Carlo hitting or coalescence estimate")
    p.add_argument("--mode", choices=("hitting", "coalescence"), default="hitting")
    p.add_argument("--start", type=_start_value, default="all-plus")
    p.add_argument("--target-kind", choices=("abs_le", "le", "ge"), default="abs_le",
                   dest="target_kind")
    p.add_argument("--target-value", type=float, default=None, dest="target_value")
    p.add_argument("--censored", action="store_true")
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--include-samples", action="store_true", dest="include_samples")

    p = add("scan", help="regime scan; kind or --spec file")
    p.add_argument("kind", nargs="?", default=None,
                   choices=("cutoff-scan", "critical-scan", "lowtemp-scan", "limit-law",
                            "censored-scan", "verify"))
    p.add_argument("--reps", type=int, default=200)

    p = add("verify", help="run acceptance suites (default: the fast exact suite)")
    p.add_argument("suites", nargs="*", default=[],
                   help="suite names, or 'all'; empty runs the fast suite")

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except (DomainError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except ConsistencyError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILURE


def _dispatch(args) -> int:
    cmd = args.command
    if cmd == "kernel":
        req = service.ChainRequest(
            n=_one(args.n, "n"), beta=_one(args.beta, "beta"), kind=args.kind
        )
        _emit_model(args, service.run_kernel(req), _kernel_csv)
        return EXIT_OK
    if cmd == "stationary":
        req = service.ChainRequest(
            n=_one(args.n, "n"), beta=_one(args.beta, "beta"), kind=args.kind
        )
        _emit_model(args, service.run_stationary(req), _stationary_csv)
        return EXIT_OK
    if cmd == "tvcurve":
        req = service.TvCurveRequest(
            n=_one(args.n, "n"), beta=_one(args.beta, "beta"), kind=args.kind,
            start=args.start, t_max=args.t_max, record_every=args.record_every,
        )
        _emit_model(args, service.run_tvcurve(req), _curve_csv)
        return EXIT_OK
    if cmd == "mix":
        req = service.MixRequest(
            n=_one(args.n, "n"), beta=_one(args.beta, "beta"), kind=args.kind,
            start=args.start, eps=_one(args.eps, "eps", 0.25), cap_steps=args.cap_steps,
        )
        res = service.run_mix(req)
        _emit_model(args, res)
        return EXIT_RESOURCE_CAP if res.lower_bound_only else EXIT_OK
    if cmd == "gap":
        req = service.GapRequest(n=_one(args.n, "n"), beta=_one(args.beta, "beta"), kind=args.kind)
        _emit_model(args, service.run_gap(req))
        return EXIT_OK
    if cmd == "fullgap":
        req = service.FullGapRequest(n=_one(args.n, "n"), beta=_one(args.beta, "beta"))
        _emit_model(args, service.run_fullgap(req))
        return EXIT_OK
    if cmd == "electric":
        req = service.ElectricRequest(
            n=_one(args.n, "n"), beta=_one(args.beta, "beta"), kind=args.kind
        )
        _emit_model(args, service.run_electric(req), _electric_csv)
        return EXIT_OK
    if cmd == "zeta":
        _emit_model(args, service.run_zeta(service.ZetaRequest(beta=_one(args.beta, "beta"))))
        return EXIT_OK
    if cmd == "texp":
        req = service.TexpRequest(n=_one(args.n, "n"), beta=_one(args.beta, "beta"))
        _emit_model(args, service.run_texp(req))
        return EXIT_OK
    if cmd == "simulate":
        req = service.SimulateRequest(
            n=_one(args.n, "n"), beta=_one(args.beta, "beta"), mode=args.mode,
            start=args.start, target_kind=args.target_kind, target_value=args.target_value,
            censored=args.censored, reps=args.reps, seed=args.seed,
            cap_steps=args.cap_steps, workers=args.workers,
            include_samples=args.include_samples,
        )
        res = service.run_simulate(req)
        _emit_model(args, res)
        return EXIT_OK if res.valid else EXIT_RESOURCE_CAP
    if cmd == "scan":
        req = _scan_request_from_args(args)
        res = service.run_scan(req)
        _emit_model(args, res, _report_csv)
        return EXIT_OK if res.passed else EXIT_CHECK_FAILURE
    if cmd == "verify":
        req = service.VerifyRequest(suites=list(args.suites))
        res = service.run_verify(req, stream=sys.stderr)
        _emit_model(args, res, _report_csv)
        return EXIT_OK if res.passed else EXIT_CHECK_FAILURE
    raise DomainError(f"unknown command {cmd!r}")


if __name__ == "__main__":
    sys.exit(main())
