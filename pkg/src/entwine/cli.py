"""Command-line interface.

Exit codes: 0 no violation found, 3 violation found, 2 invalid input,
1 internal fault.
"""
from __future__ import annotations

import argparse
import sys

from . import __version__
from .condition import (
    TAU_GAP,
    GapCertificate,
    Verdict,
    cross_table_of,
    hermiticity_check,
    minimize_gap,
)
from .ensembles import avg_entanglement
from .errors import EntwineError
from .formats import (
    CertificateFile,
    FormatError,
    density_from_obj,
    digest,
    dumps,
    ensemble_from_obj,
    ensemble_to_obj,
    loads,
    read_bytes,
    write_text,
)
from .optimizer import additivity_probe, eof_min, improve
from .wootters import wootters_decomposition

EXIT_OK = 0
EXIT_FAULT = 1
EXIT_INPUT = 2
EXIT_VIOLATED = 3


class InputError(Exception):
    pass


def _load(path):
    data = read_bytes(path)
    return data, loads(data, str(path))


def _load_ensemble(path):
    data, obj = _load(path)
    return data, ensemble_from_obj(obj, str(path))


def _emit(text: str, out):
    if out:
        write_text(out, text)
    else:
        sys.stdout.write(text)


def _gap_opts(args) -> dict:
    return {
        "restarts": args.restarts,
        "max_iters": args.max_iters,
        "seed": args.seed,
        "tau_gap": args.tau_gap,
    }


def _verdict_code(verdict: Verdict) -> int:
    return EXIT_VIOLATED if verdict is Verdict.VIOLATED else EXIT_OK


def cmd_check(args) -> int:
    data, e = _load_ensemble(args.input)
    ct = cross_table_of(e)
    cert = minimize_gap(ct, **_gap_opts(args))
    cf = CertificateFile.from_certificate(cert, hermiticity_check(ct), digest(data))
    _emit(dumps(cf.to_obj()), args.out)
    if args.out:
        print(f"verdict: {cf.verdict}\ngap: {cf.gap!r}")
    return _verdict_code(cert.verdict)


def cmd_eof(args) -> int:
    _, obj = _load(args.input)
    rho, dims = density_from_obj(obj, str(args.input))
    opts = {"m": args.m, "restarts": args.restarts, "max_iters": args.max_iters, "seed": args.seed}
    res = eof_min(rho, dims, **opts)
    print(f"eof_upper_bound: {res.value!r}")
    print(f"m: {res.m}\nseed: {res.seed}")
    if args.out:
        write_text(args.out, dumps(ensemble_to_obj(res.ensemble)))
    return EXIT_OK


def cmd_wootters(args) -> int:
    _, obj = _load(args.input)
    rho, dims = density_from_obj(obj, str(args.input))
    if dims != (2, 2):
        raise InputError(f"{args.input}: wootters needs a 2x2 split, got {dims}")
    dec = wootters_decomposition(rho)
    print(f"concurrence: {dec.concurrence!r}\neof: {dec.eof!r}")
    if dec.jitter:
        print(f"jitter: {dec.jitter!r} (seed {dec.jitter_seed})")
    if args.out:
        write_text(args.out, dumps(ensemble_to_obj(dec.ensemble)))
    return EXIT_OK


def cmd_improve(args) -> int:
    data, e = _load_ensemble(args.input)
    _, cobj = _load(args.cert)
    cf = CertificateFile.from_obj(cobj, str(args.cert))
    if cf.input_digest != digest(data):
        raise InputError(f"{args.cert}: input_digest does not match {args.input}")
    if cf.verdict != Verdict.VIOLATED.value:
        raise InputError(f"{args.cert}: certificate verdict is {cf.verdict}, not VIOLATED")
    cert = GapCertificate(
        cf.coefficients(), cf.gap, Verdict.VIOLATED, cf.restarts, [], cf.seed, cf.tau_gap
    )
    better = improve(e, cert)
    print(f"before: {avg_entanglement(e)!r}\nafter: {avg_entanglement(better)!r}")
    if args.out:
        write_text(args.out, dumps(ensemble_to_obj(better)))
    return EXIT_OK


def cmd_additivity(args) -> int:
    data1, e1 = _load_ensemble(args.input1)
    data2, e2 = _load_ensemble(args.input2)
    report = additivity_probe(e1, e2, double_check=args.double_check, **_gap_opts(args))
    cf = CertificateFile.from_certificate(
        report.certificate, report.hermiticity_residual, digest(data1 + b"\0" + data2)
    )
    _emit(dumps(cf.to_obj()), args.out)
    lines = [
        f"product_members: {report.product.count}",
        f"verdict: {cf.verdict}",
        f"gap: {cf.gap!r}",
        f"hermiticity_residual: {cf.hermiticity_residual!r}",
    ]
    if report.double_check is not None:
        lines.append(f"double_check_avg_entanglement: {report.double_check.value!r}")
    print("\n".join(lines), file=sys.stderr if not args.out else sys.stdout)
    return _verdict_code(report.certificate.verdict)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entwine", description="Optimality tests and EoF estimates for pure-state decompositions."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def search_flags(p, restarts):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--restarts", type=int, default=restarts)
        p.add_argument("--max-iters", type=int, default=500)

    p = sub.add_parser("check", help="test a decomposition for optimality")
    p.add_argument("input")
    p.add_argument("--out", help="certificate path (default: standard output)")
    p.add_argument("--tau-gap", type=float, default=TAU_GAP)
    search_flags(p, 64)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("eof", help="upper-bound the entanglement of formation by minimization")
    p.add_argument("input", help="density-matrix file")
    p.add_argument("--m", type=int, default=None, help="decomposition size (default rank^2)")
    p.add_argument("--out", help="path for the minimizing ensemble")
    search_flags(p, 32)
    p.set_defaults(func=cmd_eof)

    p = sub.add_parser("wootters", help="closed-form two-qubit concurrence, EoF and decomposition")
    p.add_argument("input", help="4x4 density-matrix file")
    p.add_argument("--out", help="path for the optimal ensemble")
    p.set_defaults(func=cmd_wootters)

    p = sub.add_parser("improve", help="apply a violation certificate")
    p.add_argument("input")
    p.add_argument("cert")
    p.add_argument("--out", help="path for the improved ensemble")
    p.set_defaults(func=cmd_improve)

    p = sub.add_parser("additivity", help="test the tensor product of two decompositions")
    p.add_argument("input1")
    p.add_argument("input2")
    p.add_argument("--out", help="certificate path (default: standard output)")
    p.add_argument("--tau-gap", type=float, default=TAU_GAP)
    p.add_argument("--no-double-check", dest="double_check", action="store_false")
    search_flags(p, 64)
    p.set_defaults(func=cmd_additivity)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (FormatError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EntwineError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAULT


if __name__ == "__main__":
    sys.exit(main())
