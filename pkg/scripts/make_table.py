import argparse
import os
import sys
from typing import Optional, Sequence

# Ensure repository root is on sys.path when running as a script
_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir))
if _ROOT not in sys.path:
    sys.path.insert(0, _ROOT)

from core.analysis import N_CONVENTIONS
from core.progress import note, report_failure
from core.reporting import OutputFormat, render_table
from core.tables import DECIMALS, build_table


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Recompute one of the four comparison tables.")
    parser.add_argument("table", type=int, choices=sorted(DECIMALS))
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.CSV.value)
    parser.add_argument(
        "--n-convention",
        choices=N_CONVENTIONS,
        default="floor",
        help="How fractional occupations become an integer n (tables 2 and 3).",
    )
    parser.add_argument("--out", default=None, help="Also write the table to this file.")
    parser.add_argument("--debug", action="store_true", help="Print tracebacks on failure.")
    args = parser.parse_args(argv)

    stage = "init"
    try:
        stage = "compute"
        df = build_table(args.table, args.n_convention)
        stage = "render"
        text = render_table(df, OutputFormat(args.format), DECIMALS[args.table])
        sys.stdout.write(text)
        if args.out:
            stage = "save"
            parent = os.path.dirname(args.out)
            if parent:
                os.makedirs(parent, exist_ok=True)
            with open(args.out, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
            note("Save", f"table {args.table} -> {args.out} ({len(df)} rows)")
    except Exception as exc:
        report_failure(f"table {args.table}", stage, exc, args.debug, convention=args.n_convention)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
