"""Command-line entry point.

Exit status: 0 on pass, 1 on audit failure or halted scenario, 2 on usage
or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from ..auditor import TrackerNotFound, individual_verify, load_manifest, requirement_matrix, verify_transcript
from ..crypto.errors import DecodeError
from ..crypto.group import GROUPS, get_group
from ..ledger import ParseError, read_transcript, verify_chain, verify_checkpoint
from .config import ConfigInvalid, ScenarioConfig, load_config
from .scenario import ScenarioHalted, SimReport, run_scenario

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse exits 2 already; keep the message on stderr
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise _Usage(f"cannot read {path}: {exc.strerror}") from None


class _Usage(Exception):
    pass


def _group(label: str | None):
    return None if label is None else get_group(label)


def _write_outputs(out: Path, data: bytes, report: SimReport) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "transcript.vspc").write_bytes(data)
    (out / "report.json").write_text(report.to_json())
    (out / "timings.json").write_text(report.timings_json())


def _summary(report: SimReport) -> str:
    lines = [
        f"announced:    {report.announced_counts}",
        f"ground truth: {report.ground_truth_counts}",
        f"audit:        {'pass' if report.audit and report.audit.overall else 'FAIL'}",
    ]
    for a in report.adversaries:
        lines.append(f"adversary {a.kind}: {a.outcome} ({a.detail})")
    if report.halted:
        lines.append(f"halted in {report.halted['phase']}: {report.halted['cause']}")
    return "\n".join(lines)


def cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    out = Path(args.out)
    try:
        data, report = run_scenario(config)
    except ScenarioHalted as halt:
        _write_outputs(out, halt.transcript, halt.report)
        print(_summary(halt.report))
        return EXIT_FAIL
    _write_outputs(out, data, report)
    print(_summary(report))
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_audit(args: argparse.Namespace) -> int:
    report = verify_transcript(_read(args.transcript), _group(args.group))
    if args.json:
        sys.stdout.write(report.to_json())
    else:
        sys.stdout.write(report.to_text())
        sys.stdout.write(requirement_matrix(report))
    for check_id in report.failing():
        print(f"failing check: {check_id}", file=sys.stderr)
    return EXIT_OK if report.overall else EXIT_FAIL


def cmd_receipt(args: argparse.Namespace) -> int:
    try:
        tracker = bytes.fromhex(args.tracker)
    except ValueError:
        raise _Usage("--tracker must be hex") from None
    try:
        receipt = individual_verify(_read(args.transcript), tracker, _group(args.group))
    except TrackerNotFound as exc:
        print(f"tracker not found: {exc}", file=sys.stderr)
        return EXIT_FAIL
    sys.stdout.write(receipt.to_json())
    return EXIT_OK if receipt.verified else EXIT_FAIL


def cmd_bench(args: argparse.Namespace) -> int:
    config = ScenarioConfig(
        n_voters=args.voters, n_candidates=args.candidates, seed=args.seed, group=args.group,
        max_ring_size=args.max_ring_size, spoil_fraction=args.spoil_fraction,
        abstain_fraction=args.abstain_fraction, election_id="bench",
    )
    data, report = run_scenario(config)
    if args.out:
        _write_outputs(Path(args.out), data, report)
    summary = {
        "voters": args.voters,
        "candidates": args.candidates,
        "group": args.group,
        "certified": report.ok,
        "metrics": report.metrics,
        "timings": json.loads(report.timings_json()),
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_verify(args: argparse.Namespace) -> int:
    """Structural ledger check only: chain, signatures, checkpoints."""
    entries, checkpoints = read_transcript(_read(args.transcript))
    params, manifest = load_manifest(entries, _group(args.group))
    chain = verify_chain(params, entries, manifest.author_keys())
    print(f"chain: {'ok' if chain.ok else f'broken at {chain.bad_index}: {chain.reason}'} ({len(entries)} entries)")
    ok = chain.ok
    for i, cp in enumerate(checkpoints):
        v = verify_checkpoint(params, entries, cp, manifest.officer_keys(), manifest.officer_quorum)
        print(f"checkpoint {i} upto {cp.upto_index}: {'ok' if v.ok else v.reason}")
        ok = ok and v.ok
    return EXIT_OK if ok else EXIT_FAIL


def _jsonable(v: Any) -> Any:
    if isinstance(v, bytes):
        return v.hex()
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    if isinstance(v, int) and not isinstance(v, bool) and v.bit_length() > 53:
        return hex(v)
    return v


def cmd_export(args: argparse.Namespace) -> int:
    entries, checkpoints = read_transcript(_read(args.transcript))
    doc = {
        "entries": [
            {"index": e.index, "kind": e.payload_kind.name, "author": e.author, "prev_hash": e.prev_hash.hex(),
             "entry_hash": e.entry_hash.hex(), "payload": _jsonable(e.decoded())}
            for e in entries
        ],
        "checkpoints": [
            {"upto": cp.upto_index, "chain_head": cp.chain_head.hex(), "merkle_root": cp.merkle_root.hex(),
             "signers": [oid for oid, _ in cp.signatures]}
            for cp in checkpoints
        ],
    }
    text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vspace", description="Verifiable anonymous election simulator and auditor.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    groups = sorted(GROUPS)

    r = sub.add_parser("run", help="run a scenario file")
    r.add_argument("--config", required=True)
    r.add_argument("--out", required=True, help="output directory")
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("audit", help="audit a transcript without secrets")
    a.add_argument("--transcript", required=True)
    a.add_argument("--json", action="store_true", help="machine-readable report")
    a.add_argument("--group", choices=groups, help="expected group (default: as declared)")
    a.set_defaults(func=cmd_audit)

    rc = sub.add_parser("receipt", help="check one ballot's inclusion by tracker")
    rc.add_argument("--transcript", required=True)
    rc.add_argument("--tracker", required=True)
    rc.add_argument("--group", choices=groups)
    rc.set_defaults(func=cmd_receipt)

    b = sub.add_parser("bench", help="honest election at a given size, with metrics")
    b.add_argument("--voters", type=int, required=True)
    b.add_argument("--candidates", type=int, default=3)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--group", choices=groups, default="test256")
    b.add_argument("--max-ring-size", type=int, default=64)
    b.add_argument("--spoil-fraction", type=float, default=0.0)
    b.add_argument("--abstain-fraction", type=float, default=0.0)
    b.add_argument("--out", help="also write transcript and reports here")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="check chain and checkpoints only")
    v.add_argument("--transcript", required=True)
    v.add_argument("--group", choices=groups)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("export", help="dump a transcript as JSON")
    e.add_argument("--transcript", required=True)
    e.add_argument("--out")
    e.set_defaults(func=cmd_export)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigInvalid as exc:
        print(f"ConfigInvalid: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _Usage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, DecodeError) as exc:
        print(f"malformed transcript: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
