import argparse
import os
import sys
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

# Ensure repository root is on sys.path when running as a script
_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir))
if _ROOT not in sys.path:
    sys.path.insert(0, _ROOT)

from core.analysis import (
    AnalysisInputs,
    birthday_collision_prob,
    capacity_for_fpr,
    collision_count_distribution,
    false_overlap_probs,
    fpr_approx,
    fpr_blocked,
    fpr_folded,
    fpr_original_bloom,
    fpr_partitioned_exact,
    fpr_per_element,
    fpr_per_element_naive,
    fpr_standard_exact,
    fpr_truncated,
    nominal_capacity,
)
from core.errors import BloomError
from core.hashing import hash_bits_needed
from core.progress import report_failure
from core.reporting import OutputFormat, render_value


def _n(a: argparse.Namespace) -> float:
    return int(a.n) if float(a.n).is_integer() else a.n


def _capacity(a: argparse.Namespace) -> int:
    if a.target is None:
        return nominal_capacity(a.m, a.k, a.occupation)
    return capacity_for_fpr(a.m, a.k, a.target, a.variant)


# Defined for k > m too; they check their own inputs.
ANY_K = ("birthday", "collisions")

# name -> (required flags, evaluator)
FORMULAS: Dict[str, Tuple[Tuple[str, ...], Callable[[argparse.Namespace], Any]]] = {
    "birthday": (("m", "k"), lambda a: birthday_collision_prob(a.m, a.k)),
    "fa": (("n", "m", "k"), lambda a: fpr_approx(_n(a), a.m, a.k)),
    "original": (("n", "m", "k"), lambda a: fpr_original_bloom(_n(a), a.m, a.k)),
    "fs": (("n", "m", "k"), lambda a: fpr_standard_exact(_n(a), a.m, a.k)),
    "fp": (("n", "m", "k"), lambda a: fpr_partitioned_exact(_n(a), a.m, a.k)),
    "per-element": (("n", "m", "k"), lambda a: fpr_per_element(_n(a), a.m, a.k, a.d or a.k)),
    "per-element-naive": (("n", "m", "k"), lambda a: fpr_per_element_naive(_n(a), a.m, a.k, a.d or a.k)),
    "collisions": (("m", "k"), lambda a: collision_count_distribution(a.k, a.m)),
    "overlap": (("m", "k", "n1", "n2"), lambda a: false_overlap_probs(a.m, a.k, a.n1, a.n2)),
    "capacity": (("m", "k"), _capacity),
    "truncated": (("n", "m", "k", "k_prime"), lambda a: fpr_truncated(_n(a), a.m, a.k, a.k_prime)),
    "folded": (("n", "m", "k", "m_prime"), lambda a: fpr_folded(_n(a), a.m, a.k, a.m_prime)),
    "blocked": (
        ("n", "m", "k", "block_bits"),
        lambda a: fpr_blocked(_n(a), a.m, a.k, a.block_bits, a.variant == "partitioned"),
    ),
    "hash-bits": (("m", "k"), lambda a: hash_bits_needed(a.variant, a.m, a.k)),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Evaluate one false-positive formula.")
    parser.add_argument("formula", choices=sorted(FORMULAS))
    parser.add_argument("--n", type=float, default=None, help="Inserted elements.")
    parser.add_argument("--m", type=int, default=None, help="Filter (or block) size in bits.")
    parser.add_argument("--k", type=int, default=None, help="Hash functions.")
    parser.add_argument("--d", type=int, default=None, help="Distinct positions of the queried element (default k).")
    parser.add_argument("--n1", type=float, default=None)
    parser.add_argument("--n2", type=float, default=None)
    parser.add_argument("--k-prime", type=int, default=None)
    parser.add_argument("--m-prime", type=int, default=None)
    parser.add_argument("--block-bits", type=int, default=None)
    parser.add_argument("--target", type=float, default=None, help="Target FPR for 'capacity'.")
    parser.add_argument("--occupation", type=float, default=1.0, help="Fraction of nominal capacity.")
    parser.add_argument("--variant", default="partitioned", help="standard | partitioned (| approx for capacity).")
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.CSV.value)
    parser.add_argument("--debug", action="store_true", help="Print tracebacks on failure.")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    required, evaluate = FORMULAS[args.formula]
    missing = [f"--{name.replace('_', '-')}" for name in required if getattr(args, name) is None]
    if missing:
        parser.error(f"{args.formula} needs {' '.join(missing)}")

    stage = "init"
    try:
        stage = "validate"
        if args.formula not in ANY_K:
            AnalysisInputs(
                n=args.n or 0,
                m=args.m,
                k=args.k,
                d=args.d or 0,
                occupation=args.occupation,
                n1=args.n1 or 0,
                n2=args.n2 or 0,
            )
        stage = "evaluate"
        value = evaluate(args)
        stage = "render"
        sys.stdout.write(render_value(args.formula, value, OutputFormat(args.format)))
    except Exception as exc:
        report_failure(f"analyze {args.formula}", stage, exc, args.debug)
        if isinstance(exc, BloomError):
            sys.stderr.write(parser.format_usage())
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
