import os
from typing import Any, Dict, Mapping, Optional

import yaml

from .filters import DEFAULT_BLOCK_BITS, FilterParams, Variant
from .hashing import HashScheme
from .montecarlo import DEFAULT_SHARDS, ElementGenerator, ExperimentConfig

INCLUDABLE_SECTIONS = ("filter", "experiment")


def _read_mapping(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        cfg = yaml.safe_load(f)
    if not isinstance(cfg, dict):
        raise ValueError(f"Config root must be a mapping: {path}")
    return cfg


def load_config(path: str) -> Dict[str, Any]:
    """Load a YAML config, resolving `include` for the filter/experiment sections.

    If the config has:

    filter:
      include: filter.yaml
      k: 16

    the `filter` section becomes the included mapping with the local keys
    laid over it. Paths are resolved relative to the main config file.
    """
    path = os.path.abspath(path)
    cfg = _read_mapping(path)
    base_dir = os.path.dirname(path)

    for name in INCLUDABLE_SECTIONS:
        section = cfg.get(name)
        if isinstance(section, dict) and "include" in section:
            merged = _read_mapping(os.path.join(base_dir, section["include"]))
            merged.update({k: v for k, v in section.items() if k != "include"})
            cfg[name] = merged

    return cfg


def build_filter_params(section: Mapping[str, Any]) -> FilterParams:
    """FilterParams from a `filter:` mapping (m and k required)."""
    variant = Variant(section.get("variant", Variant.STANDARD.value))
    is_blocked = variant in (Variant.BLOCKED_STANDARD, Variant.BLOCKED_PARTITIONED)
    block_bits = section.get("block_bits")
    if block_bits is None:
        block_bits = DEFAULT_BLOCK_BITS if is_blocked else 0
    return FilterParams(
        m=int(section["m"]),
        k=int(section["k"]),
        variant=variant,
        block_bits=int(block_bits),
        scheme=HashScheme(section.get("scheme", "independent"), int(section.get("seed", 0))),
    )


def build_experiment_config(cfg: Mapping[str, Any], overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """ExperimentConfig from a loaded config; non-None overrides win."""
    filt = dict(cfg.get("filter") or {})
    exp = dict(cfg.get("experiment") or {})
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in ("m", "k", "variant", "block_bits", "scheme"):
            filt[key] = value
        else:
            exp[key] = value
    seed = int(exp.get("seed", 1))
    filt.setdefault("seed", seed)

    return ExperimentConfig(
        params=build_filter_params(filt),
        n=int(exp.get("n", 0)),
        trials=int(exp.get("trials", 1)),
        seed=seed,
        shards=int(exp.get("shards", DEFAULT_SHARDS)),
        n_jobs=int(exp.get("n_jobs", 1)),
        generator=ElementGenerator(exp.get("generator", ElementGenerator.UNIFORM.value)),
        target_d=exp.get("target_d"),
        step_class=exp.get("step_class"),
        progress=bool(exp.get("progress", False)),
    )
