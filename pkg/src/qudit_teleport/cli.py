"""Command line entry point: ``qtele run|verify|feasibility <config>...``."""
import argparse
import sys

from .errors import TeleportError
from .scenario import (
    EXIT_INFEASIBLE,
    EXIT_INVALID,
    EXIT_OK,
    bundled_names,
    feasibility_of,
    load_scenario,
    run_scenario,
    verify,
)


def _seed(value: str) -> int:
    seed = int(value, 0)
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return seed


def _transport(value: str) -> str:
    if value != "memory" and not value.startswith("tcp:"):
        raise argparse.ArgumentTypeError("transport must be 'memory' or 'tcp:<host>:<port>'")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtele",
        description="Synthesize and simulate qudit teleportation scenarios.",
        epilog="Bundled scenarios: " + ", ".join(bundled_names()),
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("configs", nargs="+", help="scenario file or bundled scenario name")
    common.add_argument("--seed", type=_seed, help="override the scenario's sampling seed")
    common.add_argument("--format", choices=("text", "jsonl"), default="text")
    common.add_argument("--transport", type=_transport, help="memory or tcp:<host>:<port> (session mode)")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="simulate the protocol and report every branch")
    sub.add_parser("verify", parents=[common], help="synthesize and check the teleportation condition")
    sub.add_parser("feasibility", parents=[common], help="Schmidt-spectrum feasibility verdict")
    return parser


def _verify(ref, out):
    try:
        sc = load_scenario(ref)
        ok, residual = verify(sc)
    except TeleportError as exc:
        out.write(f"error: {exc}\n")
        return EXIT_INFEASIBLE if hasattr(exc, "lambdas") else EXIT_INVALID
    out.write(f"{sc.name}: residual={residual:.3e} {'ok' if ok else 'FAILED'}\n")
    return EXIT_OK if ok else EXIT_INVALID


def _feasibility(ref, out):
    try:
        sc = load_scenario(ref)
    except TeleportError as exc:
        out.write(f"error: {exc}\n")
        return EXIT_INVALID
    v = feasibility_of(sc)
    spectrum = ", ".join(f"{x:.12g}" for x in v.lambdas)
    verdict = "feasible" if v.feasible else "infeasible"
    out.write(f"{sc.name}: {verdict} effective_dim={v.effective_dim} lambdas=({spectrum})\n")
    return EXIT_OK if v.feasible else EXIT_INFEASIBLE


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    code = EXIT_OK
    for ref in args.configs:
        if args.command == "run":
            text, rc = run_scenario(ref, args.seed, args.format, args.transport)
            out.write(text)
        elif args.command == "verify":
            rc = _verify(ref, out)
        else:
            rc = _feasibility(ref, out)
        code = max(code, rc)
    return code


if __name__ == "__main__":
    sys.exit(main())
