import argparse
import os
import sys
from typing import List, Optional, Sequence

# Ensure repository root is on sys.path when running as a script
_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir))
if _ROOT not in sys.path:
    sys.path.insert(0, _ROOT)

from core.codec import load_filter, save_filter
from core.config import build_filter_params
from core.filters import (
    Variant,
    fill_ratio,
    fold_standard,
    intersect,
    make_filter,
    per_part_fill,
    provably_disjoint,
    truncate_parts,
    union,
)
from core.hashing import SchemeTag
from core.progress import note, report_failure
from core.reporting import OutputFormat, render_records


def read_elements(lines: Sequence[str], hex_input: bool) -> List[bytes]:
    """One element per line; with --hex each line is a hex string."""
    out: List[bytes] = []
    for line in lines:
        line = line.rstrip("\r\n")
        out.append(bytes.fromhex(line.strip()) if hex_input else line.encode("utf-8"))
    return out


def _input_lines(path: Optional[str]) -> List[str]:
    if path is None or path == "-":
        return sys.stdin.read().splitlines()
    with open(path, "r", encoding="utf-8") as f:
        return f.read().splitlines()


def filter_info(f) -> dict:
    p = f.params
    info = {
        "variant": p.variant.value,
        "scheme": p.scheme.tag.value,
        "m": p.m,
        "k": p.k,
        "block_bits": p.block_bits,
        "seed": p.scheme.seed,
        "fold_factor": p.fold_factor,
        "inserted_count": f.inserted_count,
        "popcount": f.popcount,
        "fill_ratio": fill_ratio(f),
    }
    if p.variant is Variant.PARTITIONED:
        for i, fill in enumerate(per_part_fill(f)):
            info[f"part_{i}_fill"] = fill
    return info


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Create, fill, combine and inspect PBF1 filter files.")
    parser.add_argument("--hex", action="store_true", help="Elements are hex strings (binary elements).")
    parser.add_argument("--debug", action="store_true", help="Print tracebacks on failure.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("create", help="Write an empty filter.")
    p.add_argument("path")
    p.add_argument("--variant", choices=[v.value for v in Variant], default=Variant.PARTITIONED.value)
    p.add_argument("--scheme", choices=[s.value for s in SchemeTag], default=SchemeTag.INDEPENDENT.value)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--block-bits", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("insert", help="Insert elements (one per line) and rewrite the file.")
    p.add_argument("path")
    p.add_argument("--input", default="-", help="Element file; '-' reads stdin.")

    p = sub.add_parser("query", help="Print present/absent per element.")
    p.add_argument("path")
    p.add_argument("elements", nargs="*", help="Elements; read from stdin when omitted.")

    for name, text in (("union", "Bitwise OR of two filters."), ("intersect", "Bitwise AND of two filters.")):
        p = sub.add_parser(name, help=text)
        p.add_argument("a")
        p.add_argument("b")
        p.add_argument("--out", required=True)

    p = sub.add_parser("disjoint", help="Decide whether two sets provably share no element.")
    p.add_argument("a")
    p.add_argument("b")

    p = sub.add_parser("fold", help="Fold a standard filter to m' bits.")
    p.add_argument("path")
    p.add_argument("--m-prime", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("truncate", help="Keep the first k' parts of a partitioned filter.")
    p.add_argument("path")
    p.add_argument("--k-prime", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("info", help="Print parameters and fill.")
    p.add_argument("path")
    p.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.JSON.value)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = sys.stdout

    stage = "init"
    try:
        cmd = args.command
        if cmd == "create":
            stage = "build_params"
            params = build_filter_params({
                "variant": args.variant,
                "scheme": args.scheme,
                "m": args.m,
                "k": args.k,
                "block_bits": args.block_bits,
                "seed": args.seed,
            })
            stage = "save_filter"
            save_filter(make_filter(params), args.path)
            note("Save", f"{params.variant.value} m={params.m} k={params.k} -> {args.path}")

        elif cmd == "insert":
            stage = "load_filter"
            f = load_filter(args.path)
            stage = "read_elements"
            elements = read_elements(_input_lines(args.input), args.hex)
            stage = "insert"
            f.insert_many(elements)
            stage = "save_filter"
            save_filter(f, args.path)
            note("Insert", f"{len(elements)} elements -> {args.path} (inserted_count={f.inserted_count})")

        elif cmd == "query":
            stage = "load_filter"
            f = load_filter(args.path)
            stage = "read_elements"
            lines = args.elements if args.elements else _input_lines("-")
            stage = "query"
            for line, element in zip(lines, read_elements(lines, args.hex)):
                out.write(f"{line}\t{'present' if f.query(element) else 'absent'}\n")

        elif cmd in ("union", "intersect", "disjoint"):
            stage = "load_filter"
            a, b = load_filter(args.a), load_filter(args.b)
            stage = cmd
            if cmd == "disjoint":
                out.write("disjoint\n" if provably_disjoint(a, b) else "possibly-overlapping\n")
            else:
                result = union(a, b) if cmd == "union" else intersect(a, b)
                stage = "save_filter"
                save_filter(result, args.out)
                note("Save", f"{cmd} -> {args.out}")

        elif cmd == "fold":
            stage = "load_filter"
            f = load_filter(args.path)
            stage = "fold"
            save_filter(fold_standard(f, args.m_prime), args.out)
            note("Save", f"fold m={f.params.m} -> m'={args.m_prime} -> {args.out}")

        elif cmd == "truncate":
            stage = "load_filter"
            f = load_filter(args.path)
            stage = "truncate"
            save_filter(truncate_parts(f, args.k_prime), args.out)
            note("Save", f"truncate k={f.params.k} -> k'={args.k_prime} -> {args.out}")

        elif cmd == "info":
            stage = "load_filter"
            f = load_filter(args.path)
            stage = "render"
            out.write(render_records([filter_info(f)], OutputFormat(args.format)))

    except Exception as exc:
        report_failure(f"filter {args.command}", stage, exc, args.debug)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
