"""Command-line interface: ``sqn generate|verify|certify|simulate|tile|info``.

Exit codes: 0 when every check passes, 1 when any check fails, 2 on usage or
input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import certifier, protocol, relations, structure
from .construction import ParityError, build_F, build_O, cardinality, check_tiling
from .document import (
    DocumentError,
    Report,
    StateSetDocument,
    amplitude_mismatch,
    generate_document,
    load,
    serialize,
)
from .states import CapExceededError, Tolerance, max_overlap
from .tiling import build_tile_model, render_ascii, render_svg

FAMILIES = ("E", "F", "O", "basis")
CHECKS = ("ortho", "cardinality", "tiling", "relations")


class UsageError(ValueError):
    pass


def _dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not dims or any(d < 3 for d in dims):
        raise argparse.ArgumentTypeError("every dimension must be >= 3")
    return dims


def _source_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--doc", type=Path, help="state-set document (schema sqn/1)")
    p.add_argument("--dims", type=_dims, help="comma-separated local dimensions, e.g. 3,3,3,3")
    p.add_argument("--family", choices=FAMILIES, default="F", help="set family when building from --dims")


def _tol_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--abs-zero", type=float, default=1e-10)
    p.add_argument("--rel-nullspace", type=float, default=1e-8)
    p.add_argument("--completeness", type=float, default=1e-12)


def _report_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", type=Path, help="write the report here instead of stdout")


def _tol(args) -> Tolerance:
    return Tolerance(args.abs_zero, args.rel_nullspace, args.completeness)


def _document(args) -> StateSetDocument:
    if args.doc is not None:
        return load(args.doc)
    if args.dims is None:
        raise UsageError("give --doc or --dims")
    return generate_document(args.family, args.dims)


def _party_list(text: str, n: int) -> list[int]:
    if text == "all":
        return list(range(1, n + 1))
    try:
        i = int(text)
    except ValueError:
        raise UsageError(f"--party expects an integer or 'all', got {text!r}")
    if not 1 <= i <= n:
        raise UsageError(f"party {i} outside 1..{n}")
    return [i]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sqn", description="Strongly nonlocal orthogonal product sets toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a state-set document")
    p.add_argument("--dims", type=_dims, required=True)
    p.add_argument("--family", choices=FAMILIES, default="F")
    p.add_argument("--amplitudes", action="store_true", help="include expanded amplitudes")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("verify", help="orthogonality, cardinality, tiling and relation checks")
    _source_args(p)
    p.add_argument("--checks", default="all", help="comma list of ortho,cardinality,tiling,relations or 'all'")
    p.add_argument("--ortho-tol", type=float, default=1e-9)
    _tol_args(p)
    _report_args(p)

    p = sub.add_parser("certify", help="strong-nonlocality certification")
    _source_args(p)
    p.add_argument("--method", choices=("numerical", "structural", "both"), default="both")
    p.add_argument("--party", default="all")
    p.add_argument("--cap", type=int, default=certifier.DEFAULT_CAP, help="largest subsystem dimension solved densely")
    _tol_args(p)
    _report_args(p)

    p = sub.add_parser("simulate", help="run the entanglement-assisted discrimination protocol")
    _source_args(p)
    p.add_argument("--state", default="all", help="state index or 'all'")
    p.add_argument("--policy", choices=("exhaustive", "sampled"), default="exhaustive")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--transcripts", type=Path, help="write per-leaf transcripts as JSON lines")
    _tol_args(p)
    _report_args(p)

    p = sub.add_parser("tile", help="draw the block tiling for one bipartition")
    _source_args(p)
    p.add_argument("--party", type=int, default=1)
    p.add_argument("--format", choices=("ascii", "svg"), default="ascii")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("info", help="summary of a set")
    _source_args(p)
    _report_args(p)
    return parser


def cmd_generate(args) -> int:
    doc = generate_document(args.family, args.dims, args.amplitudes)
    _emit(serialize(doc), args.out)
    return 0


def cmd_verify(args, argv: Sequence[str]) -> Report:
    doc = _document(args)
    tol = _tol(args)
    wanted = CHECKS if args.checks == "all" else tuple(args.checks.split(","))
    bad = [c for c in wanted if c not in CHECKS]
    if bad:
        raise UsageError(f"unknown checks {bad}; choose from {', '.join(CHECKS)} or all")
    report = Report(list(argv))
    states = doc.product_states()
    if "ortho" in wanted:
        if doc.states is not None and doc.has_blocks:
            dev, where = amplitude_mismatch(doc)
            report.add("amplitudes", dev <= tol.abs_zero, max_deviation=dev, state=where)
        worst, pair = max_overlap(states)
        report.add("ortho", worst <= args.ortho_tol, max_overlap=worst, pair=list(pair) if pair else None, states=len(states))
    if "cardinality" in wanted:
        if doc.family in ("E", "F", "O"):
            expected = cardinality(doc.dims)
        elif doc.family == "basis":
            expected = len(states) if doc.states is None else _prod(doc.dims)
        else:
            expected = sum(b.size for b in doc.blocks) if doc.has_blocks else len(states)
        report.add("cardinality", len(states) == expected, count=len(states), expected=expected)
    if "tiling" in wanted:
        if doc.has_blocks:
            t = check_tiling(doc.to_state_set())
            report.add("tiling", t.ok, disjoint=t.disjoint, missing=t.missing, extra=t.extra, overlaps=t.overlaps[:10])
        else:
            report.add("tiling", True, skipped="document has no symbolic blocks")
    if "relations" in wanted:
        _relation_checks(doc, report)
    return report


def _prod(dims) -> int:
    out = 1
    for d in dims:
        out *= d
    return out


def _relation_checks(doc: StateSetDocument, report: Report) -> None:
    if not doc.has_blocks or doc.family not in ("E", "F", "O"):
        report.add("relations", True, skipped="relations need a symbolic E, F or O set")
        return
    s = doc.to_state_set()
    n = s.n
    if doc.family in ("E", "F"):
        if n < 4:
            report.add("relations", True, skipped="strip-and-flip needs at least four parties")
            return
        for i in range(1, n + 1):
            target = build_O(s.dims[: i - 1] + s.dims[i:])
            report.add(f"strip_and_flip[{i}]", relations.set_equal(relations.strip_and_flip(s, i), target), target=target.name)
    else:
        target = build_F(s.dims[:-1])
        report.add(f"strip[{n}]", relations.set_equal(relations.strip_subsystem(s, n), target), target=target.name)
        for j in range(2, n + 1):
            target = build_O(s.dims[j - 1:] + s.dims[: j - 1])
            report.add(f"cyclic[{j}]", relations.set_equal(relations.cyclic_permute(s, j), target), target=target.name)


def cmd_certify(args, argv: Sequence[str]) -> Report:
    doc = _document(args)
    tol = _tol(args)
    parties = _party_list(args.party, len(doc.dims))
    report = Report(list(argv))
    num = struct = None
    if args.method in ("numerical", "both"):
        num = certifier.certify_strong_nonlocality_numerical(doc.product_states(), parties, args.cap, tol)
        for i, r in num.parties.items():
            d = r.as_dict()
            d.pop("witness", None)
            passed = r.status in ("trivial", "skipped")
            if r.status == "nontrivial" and r.space is not None and r.space.witness is not None:
                d["witness_diagonal"] = [float(x) for x in r.space.witness.diagonal().real]
                d["witness_offdiag_max"] = float(_offdiag(r.space.witness))
            report.add(f"numerical[{i}]", passed, **d)
        report.extra["numerical_verdict"] = num.verdict
    if args.method in ("structural", "both"):
        blocks = structure.blocks_of(doc.to_state_set()) if doc.has_blocks else structure.blocks_from_states(doc.product_states())
        struct = structure.strong_nonlocality_structural(blocks, parties)
        for i, r in struct.parties.items():
            report.add(f"structural[{i}]", r.all_pass, **r.as_dict())
        report.extra["structural_verdict"] = struct.verdict
    if num is not None and struct is not None:
        assessed = {i for i, r in num.parties.items() if r.status != "skipped"}
        agree = all((num.parties[i].status == "trivial") == struct.parties[i].all_pass for i in assessed)
        report.add("agreement", agree, parties_compared=sorted(assessed))
    return report


def _offdiag(m) -> float:
    import numpy as np

    return float(np.max(np.abs(m - np.diag(np.diag(m)))))


def cmd_simulate(args, argv: Sequence[str]) -> Report:
    doc = _document(args)
    tol = _tol(args)
    s = doc.to_state_set()
    total = s.cardinality
    if args.state == "all":
        indices = None
    else:
        try:
            k = int(args.state)
        except ValueError:
            raise UsageError(f"--state expects an index or 'all', got {args.state!r}")
        if not 0 <= k < total:
            raise UsageError(f"state {k} outside 0..{total - 1}")
        indices = [k]
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    report = Report(list(argv))
    residual = max(m.completeness_residual() for m in protocol.protocol_measurements(s))
    report.add("completeness", residual <= tol.completeness, max_residual=residual)
    transcripts = []
    if args.policy == "exhaustive":
        worst_sum = 0.0
        for k in indices if indices is not None else range(total):
            trs = protocol.run_protocol(s, k, "exhaustive", tol=tol, strict=False)
            worst_sum = max(worst_sum, abs(sum(t.probability for t in trs) - 1))
            transcripts.extend(trs)
        report.add("probability_sum", worst_sum <= 1e-9, max_deviation=worst_sum)
    elif indices is None:
        transcripts = protocol.simulate_sampled(s, args.trials, args.seed, tol, strict=False)
    else:
        transcripts = protocol.run_protocol(s, indices[0], "sampled", args.seed, args.trials, tol, strict=False)
    ok = sum(t.success for t in transcripts)
    states_ok = len({t.state_index for t in transcripts} - {t.state_index for t in transcripts if not t.success})
    report.add("success", ok == len(transcripts), runs=len(transcripts), succeeded=ok, states_all_correct=states_ok)
    mn1 = max((t.mn1_probability for t in transcripts), default=0.0)
    report.add("remainder_never_fires", mn1 <= tol.completeness, max_probability=mn1)
    costs = protocol.ebit_costs(s.dims)
    report.add("ebits", costs["protocol"] <= costs["teleport"] + 1e-12, protocol=round(costs["protocol"], 4), teleport=round(costs["teleport"], 4))
    notes = sorted({n for t in transcripts for n in t.notes})
    if notes:
        report.extra["notes"] = notes
    if args.transcripts is not None:
        with open(args.transcripts, "w") as fh:
            for t in transcripts:
                fh.write(json.dumps(t.as_dict()) + "\n")
    return report


def cmd_tile(args) -> int:
    doc = _document(args)
    s = doc.to_state_set()
    if not 1 <= args.party <= s.n:
        raise UsageError(f"party {args.party} outside 1..{s.n}")
    model = build_tile_model(s, args.party)
    text = render_svg(model) if args.format == "svg" else render_ascii(model)
    _emit(text, args.out)
    if not model.ok:
        print("tiling check failed: boxes overlap or the uncovered region is not the middle box", file=sys.stderr)
        return 1
    return 0


def cmd_info(args, argv: Sequence[str]) -> Report:
    doc = _document(args)
    report = Report(list(argv))
    info = {"name": doc.name, "family": doc.family, "dims": list(doc.dims), "states": len(doc.product_states())}
    if doc.has_blocks:
        s = doc.to_state_set()
        info.update(blocks=len(s.blocks), claims_strong_nonlocality=s.claims_strong_nonlocality)
        info["block_names"] = [b.name for b in s.blocks]
    info["ebits"] = protocol.ebit_costs(doc.dims)
    report.extra["info"] = info
    return report


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _write_report(report: Report, args) -> None:
    text = report.to_json() if args.format == "json" else report.to_text()
    if args.command == "info" and args.format == "text":
        info = report.extra["info"]
        text = "".join(f"{k}: {v}\n" for k, v in info.items() if k != "block_names")
    _emit(text, args.out)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "generate":
            return cmd_generate(args)
        if args.command == "tile":
            return cmd_tile(args)
        handler = {"verify": cmd_verify, "certify": cmd_certify, "simulate": cmd_simulate, "info": cmd_info}[args.command]
        report = handler(args, argv)
    except (UsageError, DocumentError, ParityError, CapExceededError, ValueError, IndexError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _write_report(report, args)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
