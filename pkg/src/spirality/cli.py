"""Command-line surface.

Subcommands: lerf, spirality, separable, assemble, verify.  Exit codes:
0 positive verdict, 1 negative verdict or failed verification, 2 malformed
input, 3 theorem hypotheses violated.  Output is deterministic (sorted ids,
no timestamps); --json switches to a machine-readable report.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import io_json, jsj, phi, semicover
from .errors import HypothesesViolated, SpiralityError
from .io_json import InstanceError, fraction_str

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_MALFORMED = 2
EXIT_HYPOTHESES = 3


def _color_enabled() -> bool:
    return sys.stdout.isatty() and not os.environ.get("SPIRALITY_NO_COLOR")


def _emph(text: str) -> str:
    if _color_enabled():
        return f"\x1b[1m{text}\x1b[0m"
    return text


def _load_instance(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InstanceError([io_json.Issue(io_json.SYNTAX, str(e), path)])
    return io_json.parse_instance(text), text


def _print_json(payload: dict):
    print(json.dumps(payload, sort_keys=True))


def _cycle_ids(cycle) -> list[str]:
    # rotate so the smallest edge id leads; purely presentational
    steps = list(cycle)
    if steps:
        k = min(range(len(steps)), key=lambda i: (steps[i].edge, not steps[i].forward))
        steps = steps[k:] + steps[:k]
    return [s.edge for s in steps]


def cmd_lerf(args) -> int:
    inst, _ = _load_instance(args.file)
    verdict = jsj.is_lerf(inst.jsj)
    if args.json:
        payload = {"command": "lerf", "lerf": verdict.lerf}
        if verdict.witness_edge:
            payload["witness_edge"] = verdict.witness_edge
        _print_json(payload)
    else:
        print(_emph(str(verdict)))
    return EXIT_OK if verdict.lerf else EXIT_NEGATIVE


def cmd_spirality(args) -> int:
    inst, _ = _load_instance(args.file)
    violations = phi.validate(inst.phi)
    if violations:
        raise InstanceError([io_json.Issue(io_json.INVARIANT, v) for v in violations])
    rows = []
    for cyc in phi.cycle_basis(inst.phi):
        value = phi.spirality_on_cycle(inst.phi, cyc)
        rows.append((cyc, value))
    if args.json:
        _print_json(
            {
                "command": "spirality",
                "cycles": [
                    {
                        "steps": [{"edge": s.edge, "forward": s.forward} for s in cyc],
                        "value": fraction_str(value),
                    }
                    for cyc, value in rows
                ],
            }
        )
    else:
        if not rows:
            print("no basis cycles (forest)")
        for cyc, value in rows:
            print(f"cycle=[{','.join(_cycle_ids(cyc))}] value={fraction_str(value)}")
    return EXIT_OK


def cmd_separable(args) -> int:
    inst, _ = _load_instance(args.file)
    verdict = phi.separability_verdict(inst.jsj, inst.phi)
    if args.json:
        payload = {"command": "separable", "separable": verdict.separable}
        if not verdict.separable:
            payload["witness_cycle"] = _cycle_ids(verdict.witness_cycle)
            payload["value"] = fraction_str(verdict.value)
        _print_json(payload)
    elif verdict.separable:
        print(_emph("Separable"))
    else:
        cyc = ",".join(_cycle_ids(verdict.witness_cycle))
        print(_emph(f"NotSeparable cycle=[{cyc}] value={fraction_str(verdict.value)}"))
    return EXIT_OK if verdict.separable else EXIT_NEGATIVE


def cmd_assemble(args) -> int:
    inst, text = _load_instance(args.file)
    result = semicover.assemble(inst.jsj, inst.phi, supplied_constants=inst.constants)
    if isinstance(result, semicover.SpiralObstruction):
        if args.json:
            _print_json(
                {
                    "command": "assemble",
                    "obstruction": {
                        "chord": result.chord,
                        "cycle": _cycle_ids(result.cycle),
                        "value": fraction_str(result.value),
                    },
                }
            )
        else:
            cyc = ",".join(_cycle_ids(result.cycle))
            print(f"SpiralObstruction chord={result.chord} cycle=[{cyc}] value={fraction_str(result.value)}")
        return EXIT_NEGATIVE
    cert_text = io_json.serialize_certificate(result, text)
    if args.out:
        Path(args.out).write_text(cert_text + "\n", encoding="utf-8")
    if args.json:
        _print_json(
            {
                "command": "assemble",
                "certificate": "written" if args.out else "stdout",
                "edges": len(result.edge_lattices),
                "global_constant": result.sheet.global_c,
            }
        )
    else:
        print(f"certificate edges={len(result.edge_lattices)} global={result.sheet.global_c}")
        if not args.out:
            print(cert_text)
    return EXIT_OK


def cmd_verify(args) -> int:
    inst, text = _load_instance(args.file)
    try:
        cert_text = Path(args.cert).read_text(encoding="utf-8")
    except OSError as e:
        raise InstanceError([io_json.Issue(io_json.SYNTAX, str(e), args.cert)])
    data = io_json.parse_certificate(cert_text)
    problems = []
    if data["instance_digest"] != io_json.instance_digest(text):
        problems.append("certificate digest does not match the instance")
        ok = False
    else:
        cert = io_json.certificate_from_data(data)
        declared = {vid: cert.sheet.vertex_constants.get(vid, 1) for vid in cert.sheet.vertex_constants}
        for vid, val in inst.constants.items():
            if declared.get(vid, 1) != val:
                problems.append(f"certificate constant for {vid} differs from the instance")
        ok, more = semicover.verify_certificate(inst.jsj, inst.phi, cert)
        problems.extend(more)
        ok = ok and not problems
    if args.json:
        _print_json({"command": "verify", "ok": ok, "violations": sorted(problems)})
    else:
        print(_emph("certificate ok") if ok else _emph("certificate INVALID"))
        for p in sorted(problems):
            print(f"  {p}")
    return EXIT_OK if ok else EXIT_NEGATIVE


COMMANDS = {
    "lerf": cmd_lerf,
    "spirality": cmd_spirality,
    "separable": cmd_separable,
    "assemble": cmd_assemble,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spirality",
        description="Separability and LERFness decisions on decorated torus-decomposition graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, about in (
        ("lerf", "decide LERFness of the ambient group"),
        ("spirality", "print every basis cycle of the surface graph with its exact value"),
        ("separable", "decide separability of the declared subgroup"),
        ("assemble", "build a semi-cover certificate or report the spirality obstruction"),
        ("verify", "independently check a certificate against its instance"),
    ):
        p = sub.add_parser(name, help=about)
        p.add_argument("file", help="instance file (JSON), or a directory with --each")
        if name == "verify":
            p.add_argument("cert", help="certificate file (JSON)")
        if name == "assemble":
            p.add_argument("--out", help="write the certificate here")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--each", action="store_true", help="treat FILE as a directory of instances")
    return parser


def _run_single(args) -> int:
    try:
        return COMMANDS[args.command](args)
    except InstanceError as e:
        for issue in e.issues:
            print(str(issue), file=sys.stderr)
        return EXIT_MALFORMED
    except HypothesesViolated as e:
        print(f"hypotheses violated: {e}", file=sys.stderr)
        return EXIT_HYPOTHESES
    except SpiralityError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_MALFORMED


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "each", False):
        base = Path(args.file)
        worst = EXIT_OK
        for path in sorted(base.glob("*.json")):
            if path.name.endswith(".cert.json"):
                continue
            sub_args = argparse.Namespace(**vars(args))
            sub_args.file = str(path)
            sub_args.each = False
            print(f"== {path.name}")
            worst = max(worst, _run_single(sub_args))
        return worst
    return _run_single(args)


if __name__ == "__main__":
    sys.exit(main())
