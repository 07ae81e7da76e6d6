import argparse
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

# Ensure repository root is on sys.path when running as a script
_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir))
if _ROOT not in sys.path:
    sys.path.insert(0, _ROOT)

from core.analysis import nominal_capacity
from core.config import build_experiment_config, load_config
from core.filters import Variant
from core.hashing import SchemeTag
from core.montecarlo import (
    STEP_CLASSES,
    ElementGenerator,
    craft_element,
    disjointness_experiment,
    double_hash_weak_spot_experiment,
    estimate_global_fpr,
    estimate_per_element_fpr,
    overlap_incidence_experiment,
)
from core.progress import note, report_failure
from core.reporting import OutputFormat, render_records

EXPERIMENTS = ("fpr", "per-element", "double-hash", "overlap", "disjoint")

DEFAULTS: Dict[str, Any] = {
    "m": 512,
    "k": 8,
    "variant": Variant.PARTITIONED.value,
    "scheme": SchemeTag.INDEPENDENT.value,
    "seed": 1,
    "trials": 100_000,
    "shards": 16,
    "n_jobs": 1,
}


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Run a seeded Monte Carlo experiment.")
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", default=None, help="YAML with filter/experiment sections; flags override it.")
    parser.add_argument("--variant", choices=[v.value for v in Variant], default=None)
    parser.add_argument("--scheme", choices=[s.value for s in SchemeTag], default=None)
    parser.add_argument("--m", type=positive_int, default=None)
    parser.add_argument("--k", type=positive_int, default=None)
    parser.add_argument("--block-bits", type=positive_int, default=None)
    parser.add_argument("--n", type=int, default=None, help="Inserted elements (default: nominal capacity).")
    parser.add_argument("--d", type=positive_int, default=None, help="per-element: distinct positions of the crafted element.")
    parser.add_argument("--step-class", choices=STEP_CLASSES, default=None, help="double-hash: one step class (default all).")
    parser.add_argument("--fill", type=float, default=0.5, help="double-hash: fraction of bits set.")
    parser.add_argument("--n1", type=int, default=4)
    parser.add_argument("--n2", type=int, default=4)
    parser.add_argument("--trials", type=positive_int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--shards", type=positive_int, default=None)
    parser.add_argument("--n-jobs", type=int, default=None, help="Worker processes for the shards.")
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.CSV.value)
    parser.add_argument("--no-progress", action="store_true", help="Disable progress bar output.")
    parser.add_argument("--debug", action="store_true", help="Print tracebacks on failure.")
    return parser


def _settings(args: argparse.Namespace) -> Dict[str, Any]:
    """Defaults, then the config file, then explicit flags."""
    cfg: Dict[str, Any] = {"filter": {}, "experiment": {}}
    if args.config:
        cfg.update(load_config(args.config))
    merged = dict(DEFAULTS)
    merged.update(cfg.get("filter") or {})
    merged.update(cfg.get("experiment") or {})
    flags = {
        "m": args.m,
        "k": args.k,
        "variant": args.variant,
        "scheme": args.scheme,
        "block_bits": args.block_bits,
        "n": args.n,
        "trials": args.trials,
        "seed": args.seed,
        "shards": args.shards,
        "n_jobs": args.n_jobs,
    }
    merged.update({k: v for k, v in flags.items() if v is not None})
    if merged.get("n") is None:
        merged["n"] = nominal_capacity(int(merged["m"]), int(merged["k"]))
    merged["progress"] = not args.no_progress
    return merged


def _rows(nested: Dict[str, Any], keys: Sequence[str]) -> List[Dict[str, Any]]:
    """Flatten {a: {b: report}} (or {a: report}) into one row per report."""
    rows: List[Dict[str, Any]] = []
    for key, value in nested.items():
        if isinstance(value, dict):
            for sub_key, report in value.items():
                rows.append({keys[0]: key, keys[1]: sub_key, **report.to_dict()})
        else:
            rows.append({keys[0]: key, **value.to_dict()})
    return rows


def run(args: argparse.Namespace, s: Dict[str, Any]) -> List[Dict[str, Any]]:
    exp = args.experiment
    common = dict(trials=int(s["trials"]), seed=int(s["seed"]), shards=int(s["shards"]),
                  n_jobs=int(s["n_jobs"]), progress=bool(s["progress"]))

    if exp in ("fpr", "per-element"):
        overrides = {k: s.get(k) for k in ("m", "k", "variant", "scheme", "block_bits", "n")}
        overrides.update(common)
        if exp == "per-element":
            overrides["generator"] = ElementGenerator.DISTINCT_COUNT.value
            overrides["target_d"] = args.d or int(s["k"])
            if args.step_class is not None:
                overrides["generator"] = ElementGenerator.STEP_CLASS.value
                overrides["step_class"] = args.step_class
        config = build_experiment_config({}, overrides)
        note("Cfg", f"{exp} {config.params.variant.value} scheme={config.params.scheme.tag.value} "
                    f"m={config.params.m} k={config.params.k} n={config.n} trials={config.trials} seed={config.seed}")
        if exp == "fpr":
            return [{"experiment": exp, **estimate_global_fpr(config).to_dict()}]
        crafted = craft_element(config)
        note("Craft", f"element {crafted.element.hex()} after {crafted.attempts} attempts")
        return [{"experiment": exp, **estimate_per_element_fpr(crafted.element, config).to_dict()}]

    scheme = SchemeTag(args.scheme) if args.scheme else None
    m, k = int(s["m"]), int(s["k"])
    note("Cfg", f"{exp} m={m} k={k} trials={common['trials']} seed={common['seed']}")
    if exp == "double-hash":
        classes = (args.step_class,) if args.step_class else STEP_CLASSES
        result = double_hash_weak_spot_experiment(
            m, k, args.fill, step_classes=classes, scheme_tag=scheme or SchemeTag.NAIVE_DOUBLE, **common
        )
        return _rows(result, ("step_class", "layout"))
    if exp == "overlap":
        result = overlap_incidence_experiment(m, k, scheme_tag=scheme or SchemeTag.NAIVE_DOUBLE, **common)
        return _rows(result, ("layout", "issue"))
    result = disjointness_experiment(m, k, args.n1, args.n2, scheme_tag=scheme or SchemeTag.INDEPENDENT, **common)
    return _rows(result, ("layout",))


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    stage = "init"
    try:
        stage = "load_config"
        settings = _settings(args)
        stage = f"run_{args.experiment}"
        rows = run(args, settings)
        stage = "render"
        sys.stdout.write(render_records(rows, OutputFormat(args.format)))
    except Exception as exc:
        report_failure(f"simulate {args.experiment}", stage, exc, args.debug, config=args.config)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
