"""Seeded Monte Carlo checks of the exact formulas.

Every experiment splits its trials over a fixed number of shards. Shard i
draws from its own PCG64 generator seeded with derive_seed(seed, i), and the
shard counts are pooled, so a result depends on (config, seed, shards) and
never on how many worker processes ran the shards.

Elements are random byte strings pushed through the real hashing path;
crafted elements (given distinct count, given double-hash step) are found by
rejection on hashed random elements.
"""
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Set, Tuple

import numpy as np
from joblib import Parallel, delayed
from statsmodels.stats.proportion import proportion_confint

from .analysis import (
    collision_count_distribution,
    distinct_hit_prob,
    double_hash_pair_collision_prob,
    false_overlap_probs,
    false_overlap_probs_exact,
    fpr_blocked,
    fpr_partitioned_exact,
    fpr_per_element,
    fpr_standard_exact,
)
from .errors import AttemptBudgetExceeded, InfeasibleError
from .filters import BloomFilter, FilterParams, Variant, make_filter, provably_disjoint
from .hashing import (
    HashScheme,
    IndexLayout,
    LayoutMode,
    SchemeTag,
    derive_indices,
    derive_seed,
    distinct_count,
    double_hash_pair,
    is_power_of_two,
)
from .progress import get_progress

DEFAULT_SHARDS = 16
DEFAULT_ELEMENT_BYTES = 16
DEFAULT_ATTEMPT_BUDGET = 1_000_000
EXACT_CI_BELOW = 10

CRAFT_SALT = 0xC4AF7
STEP_CLASSES = ("0", "m/2", "m/4", "odd")


class ElementGenerator(str, Enum):
    UNIFORM = "uniform"
    DISTINCT_COUNT = "distinct-count"
    STEP_CLASS = "step-class"


@dataclass
class ExperimentConfig:
    params: FilterParams
    n: int = 0
    trials: int = 1
    seed: int = 1
    shards: int = DEFAULT_SHARDS
    n_jobs: int = 1
    generator: ElementGenerator = ElementGenerator.UNIFORM
    target_d: Optional[int] = None
    step_class: Optional[str] = None
    attempt_budget: int = DEFAULT_ATTEMPT_BUDGET
    element_bytes: int = DEFAULT_ELEMENT_BYTES
    progress: bool = False

    def __post_init__(self) -> None:
        self.generator = ElementGenerator(self.generator)
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.n < 0:
            raise ValueError(f"n must be >= 0, got {self.n}")
        if self.shards < 1:
            raise ValueError(f"shards must be >= 1, got {self.shards}")
        if self.generator is ElementGenerator.DISTINCT_COUNT:
            if self.params.is_partitioned and self.target_d != self.params.k:
                raise InfeasibleError("partitioned layouts always give d = k")
            if self.target_d is None:
                raise ValueError("distinct-count generator needs target_d")
        if self.generator is ElementGenerator.STEP_CLASS:
            if not self.params.scheme.is_double:
                raise InfeasibleError("step-class elements need a double-hashing scheme")
            if self.step_class not in STEP_CLASSES:
                raise ValueError(f"step_class must be one of {STEP_CLASSES}, got {self.step_class!r}")


@dataclass
class ExperimentReport:
    point_estimate: float
    std_error: float
    ci95: Tuple[float, float]
    trials_used: int
    positives: int
    reference: Optional[float] = None
    sigma_distance: Optional[float] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def within_sigma(self, n_sigma: float = 4.0) -> bool:
        return self.sigma_distance is not None and self.sigma_distance <= n_sigma

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        meta = out.pop("metadata")
        out["ci95_lo"], out["ci95_hi"] = out.pop("ci95")
        out.update({f"meta_{k}": v for k, v in meta.items()})
        return out


def confidence_interval(positives: int, trials: int) -> Tuple[float, float]:
    """Clopper-Pearson below 10 positives, else normal with continuity correction."""
    if positives < EXACT_CI_BELOW or trials - positives < EXACT_CI_BELOW:
        lo, hi = proportion_confint(positives, trials, alpha=0.05, method="beta")
        lo = 0.0 if not np.isfinite(lo) else float(lo)
        hi = 1.0 if not np.isfinite(hi) else float(hi)
    else:
        lo, hi = proportion_confint(positives, trials, alpha=0.05, method="normal")
        lo, hi = float(lo) - 0.5 / trials, float(hi) + 0.5 / trials
    p_hat = positives / trials
    return max(0.0, min(lo, p_hat)), min(1.0, max(hi, p_hat))


def sigma_distance(p_hat: float, reference: float, trials: int) -> float:
    """|p_hat - p| in units of the binomial standard error at the reference p."""
    sd = math.sqrt(reference * (1.0 - reference) / trials)
    if sd == 0.0:
        return 0.0 if p_hat == reference else math.inf
    return abs(p_hat - reference) / sd


def make_report(
    positives: int,
    trials: int,
    reference: Optional[float] = None,
    metadata: Optional[Dict[str, Any]] = None,
) -> ExperimentReport:
    p_hat = positives / trials
    return ExperimentReport(
        point_estimate=p_hat,
        std_error=math.sqrt(p_hat * (1.0 - p_hat) / trials),
        ci95=confidence_interval(positives, trials),
        trials_used=trials,
        positives=positives,
        reference=reference,
        sigma_distance=None if reference is None else sigma_distance(p_hat, reference, trials),
        metadata=dict(metadata or {}),
    )


# ----------------------------------------------------------------------
# Sharding
# ----------------------------------------------------------------------

def shard_sizes(trials: int, shards: int) -> List[int]:
    base, extra = divmod(trials, shards)
    return [base + (1 if i < extra else 0) for i in range(shards)]


def shard_rng(seed: int, shard: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, shard))


def run_sharded(
    worker: Callable[..., Any],
    trials: int,
    seed: int,
    shards: int,
    n_jobs: int = 1,
    progress: bool = False,
    desc: str = "Trials",
    args: Sequence[Any] = (),
) -> np.ndarray:
    """Pool worker(rng, trials, *args) counts over shards (elementwise sum)."""
    tasks = [(i, size) for i, size in enumerate(shard_sizes(trials, shards)) if size > 0]
    if n_jobs == 1:
        p = get_progress(progress, total=trials, desc=desc)
        results = []
        for i, size in tasks:
            counts = np.atleast_1d(np.asarray(worker(shard_rng(seed, i), size, *args), dtype=np.int64))
            p.update(size, positives=int(counts[0]))
            results.append(counts)
        p.close()
    else:
        results = Parallel(n_jobs=n_jobs)(
            delayed(_run_shard)(worker, seed, i, size, args) for i, size in tasks
        )
    return np.sum(results, axis=0)


def _run_shard(worker: Callable[..., Any], seed: int, shard: int, size: int, args: Sequence[Any]) -> np.ndarray:
    return np.atleast_1d(np.asarray(worker(shard_rng(seed, shard), size, *args), dtype=np.int64))


# ----------------------------------------------------------------------
# Elements and filters
# ----------------------------------------------------------------------

def random_element(rng: np.random.Generator, nbytes: int = DEFAULT_ELEMENT_BYTES) -> bytes:
    return rng.bytes(nbytes)


def fresh_element(rng: np.random.Generator, exclude: Set[bytes], nbytes: int = DEFAULT_ELEMENT_BYTES) -> bytes:
    while True:
        e = rng.bytes(nbytes)
        if e not in exclude:
            return e


def fill_with_random(f: BloomFilter, n: int, rng: np.random.Generator, exclude: Set[bytes], nbytes: int) -> Set[bytes]:
    inserted: Set[bytes] = set()
    for _ in range(n):
        e = fresh_element(rng, exclude, nbytes)
        inserted.add(e)
        f.insert(e)
    return inserted


def random_filled_filter(params: FilterParams, fill: float, rng: np.random.Generator) -> BloomFilter:
    """Filter with exactly round(fill * span) random bits set per span.

    The span is a part for partitioned layouts and the whole filter (or
    block) otherwise.
    """
    f = make_filter(params)
    span = params.block_bits if params.is_blocked else params.m
    segment = span // params.k if params.is_partitioned else span
    ones = int(round(fill * segment))
    bits = f.bits
    for start in range(0, params.m, segment):
        for p in rng.choice(segment, size=ones, replace=False):
            bits[start + int(p)] = 1
    return f


def reference_global_fpr(params: FilterParams, n: int) -> Optional[float]:
    v = params.variant
    if v is Variant.STANDARD:
        return fpr_standard_exact(n, params.m, params.k)
    if v is Variant.PARTITIONED:
        return fpr_partitioned_exact(n, params.m, params.k)
    return fpr_blocked(n, params.m, params.k, params.block_bits, v is Variant.BLOCKED_PARTITIONED)


def _config_metadata(config: ExperimentConfig) -> Dict[str, Any]:
    p = config.params
    return {
        "variant": p.variant.value,
        "scheme": p.scheme.tag.value,
        "m": p.m,
        "k": p.k,
        "block_bits": p.block_bits,
        "n": config.n,
        "seed": config.seed,
        "shards": config.shards,
    }


# ----------------------------------------------------------------------
# Global FPR
# ----------------------------------------------------------------------

def _global_fpr_worker(rng: np.random.Generator, trials: int, params: FilterParams, n: int, nbytes: int) -> int:
    f = make_filter(params)
    positives = 0
    for _ in range(trials):
        f.clear()
        inserted = fill_with_random(f, n, rng, set(), nbytes)
        positives += f.query(fresh_element(rng, inserted, nbytes))
    return positives


def estimate_global_fpr(config: ExperimentConfig) -> ExperimentReport:
    """One fresh query per freshly built filter; compare with F_s / F_p."""
    (positives,) = run_sharded(
        _global_fpr_worker,
        config.trials,
        config.seed,
        config.shards,
        config.n_jobs,
        config.progress,
        desc="Global FPR",
        args=(config.params, config.n, config.element_bytes),
    )
    return make_report(
        int(positives),
        config.trials,
        reference_global_fpr(config.params, config.n),
        _config_metadata(config),
    )


# ----------------------------------------------------------------------
# Crafted elements
# ----------------------------------------------------------------------

class CraftedElement(NamedTuple):
    element: bytes
    attempts: int


def _expected_attempts(layout: IndexLayout, d: int) -> float:
    p = float(collision_count_distribution(layout.k, layout.index_range)[d])
    return math.inf if p == 0.0 else 1.0 / p


def find_element_with_distinct_count(
    scheme: HashScheme,
    layout: IndexLayout,
    d: int,
    seed: int,
    attempt_budget: int = DEFAULT_ATTEMPT_BUDGET,
    nbytes: int = DEFAULT_ELEMENT_BYTES,
) -> CraftedElement:
    """Rejection-sample hashed random elements until exactly d distinct positions."""
    k, r = layout.k, layout.index_range
    if layout.mode is LayoutMode.PER_PART and d != k:
        raise InfeasibleError(f"per-part layout always gives d = k = {k}, asked for d = {d}")
    if not 1 <= d <= min(k, r):
        raise InfeasibleError(f"d = {d} outside [1, min(k, m)] = [1, {min(k, r)}]")
    if scheme.tag is SchemeTag.SAFE_DOUBLE and is_power_of_two(r) and k <= r and d < k:
        raise InfeasibleError("safe double hashing on a power-of-two range never collides")

    rng = np.random.default_rng(derive_seed(seed, CRAFT_SALT))
    for attempt in range(1, attempt_budget + 1):
        e = rng.bytes(nbytes)
        if distinct_count(derive_indices(scheme, e, layout)) == d:
            return CraftedElement(e, attempt)

    expected = _expected_attempts(layout, d)
    raise AttemptBudgetExceeded(
        f"no element with d = {d} after {attempt_budget} attempts (expected about {expected:.0f})",
        attempts=attempt_budget,
        expected_attempts=expected,
    )


def _step_matches(h2: int, m: int, step_class: str) -> bool:
    step = h2 % m
    if step_class == "0":
        return step == 0
    if step_class == "m/2":
        return step == m // 2
    if step_class == "m/4":
        return step == m // 4
    if step_class == "odd":
        return step % 2 == 1
    raise ValueError(f"step_class must be one of {STEP_CLASSES}, got {step_class!r}")


def find_element_with_step(
    scheme: HashScheme,
    m: int,
    step_class: str,
    seed: int,
    attempt_budget: int = DEFAULT_ATTEMPT_BUDGET,
    nbytes: int = DEFAULT_ELEMENT_BYTES,
) -> CraftedElement:
    """Element whose raw double-hash step h2 falls in `step_class` modulo m."""
    if not scheme.is_double:
        raise InfeasibleError("step classes only exist for double-hashing schemes")
    salt = CRAFT_SALT + 1 + STEP_CLASSES.index(step_class)
    rng = np.random.default_rng(derive_seed(seed, salt))
    for attempt in range(1, attempt_budget + 1):
        e = rng.bytes(nbytes)
        _, h2 = double_hash_pair(scheme, e)
        if _step_matches(h2, m, step_class):
            return CraftedElement(e, attempt)
    raise AttemptBudgetExceeded(
        f"no element with step class {step_class} mod {m} after {attempt_budget} attempts",
        attempts=attempt_budget,
        expected_attempts=float(m),
    )


def find_issue2_partner(
    x: bytes,
    scheme: HashScheme,
    m: int,
    k: int,
    seed: int,
    attempt_budget: int = DEFAULT_ATTEMPT_BUDGET,
    nbytes: int = DEFAULT_ELEMENT_BYTES,
) -> CraftedElement:
    """y with h1(y) = h1(x) + (k-1) h2(x) and h2(y) = -h2(x), both mod m.

    Under naive double hashing y walks x's indices backwards.
    """
    h1x, h2x = double_hash_pair(scheme, x)
    want = ((h1x + (k - 1) * h2x) % m, (-h2x) % m)
    rng = np.random.default_rng(derive_seed(seed, CRAFT_SALT + 0x10))
    for attempt in range(1, attempt_budget + 1):
        y = rng.bytes(nbytes)
        if y == x:
            continue
        h1y, h2y = double_hash_pair(scheme, y)
        if (h1y % m, h2y % m) == want:
            return CraftedElement(y, attempt)
    raise AttemptBudgetExceeded(
        f"no mirror partner mod {m} after {attempt_budget} attempts",
        attempts=attempt_budget,
        expected_attempts=float(m * m),
    )


def craft_element(config: ExperimentConfig) -> CraftedElement:
    """Element for the config's generator (uniform draws need no search)."""
    p = config.params
    if config.generator is ElementGenerator.UNIFORM:
        rng = np.random.default_rng(derive_seed(config.seed, CRAFT_SALT))
        return CraftedElement(rng.bytes(config.element_bytes), 1)
    if config.generator is ElementGenerator.DISTINCT_COUNT:
        return find_element_with_distinct_count(
            p.scheme, p.layout(), int(config.target_d), config.seed, config.attempt_budget, config.element_bytes
        )
    span = p.block_bits if p.is_blocked else p.m
    return find_element_with_step(
        p.scheme, span, str(config.step_class), config.seed, config.attempt_budget, config.element_bytes
    )


# ----------------------------------------------------------------------
# Per-element FPR
# ----------------------------------------------------------------------

def _per_element_worker(
    rng: np.random.Generator,
    trials: int,
    params: FilterParams,
    n: int,
    element: bytes,
    nbytes: int,
) -> int:
    f = make_filter(params)
    exclude = {element}
    positives = 0
    for _ in range(trials):
        f.clear()
        fill_with_random(f, n, rng, exclude, nbytes)
        positives += f.query(element)
    return positives


def reference_per_element_fpr(params: FilterParams, n: int, d: int) -> Optional[float]:
    if params.variant is Variant.STANDARD:
        return fpr_per_element(n, params.m, params.k, d)
    if params.variant is Variant.PARTITIONED:
        return fpr_partitioned_exact(n, params.m, params.k)
    return None


def estimate_per_element_fpr(element: bytes, config: ExperimentConfig) -> ExperimentReport:
    """Test one fixed element against `trials` random filters that exclude it."""
    scratch = make_filter(config.params)
    d = len(set(scratch.positions(element)))
    (positives,) = run_sharded(
        _per_element_worker,
        config.trials,
        config.seed,
        config.shards,
        config.n_jobs,
        config.progress,
        desc="Per-element FPR",
        args=(config.params, config.n, element, config.element_bytes),
    )
    meta = _config_metadata(config)
    meta.update({"d": d, "element_hex": element.hex()})
    if config.params.variant is Variant.STANDARD:
        meta["global_reference"] = fpr_standard_exact(config.n, config.params.m, config.params.k)
    return make_report(int(positives), config.trials, reference_per_element_fpr(config.params, config.n, d), meta)


# ----------------------------------------------------------------------
# Double hashing: weak spots
# ----------------------------------------------------------------------

def _fixed_fill_worker(rng: np.random.Generator, trials: int, params: FilterParams, fill: float, element: bytes) -> int:
    positives = 0
    for _ in range(trials):
        positives += random_filled_filter(params, fill, rng).query(element)
    return positives


def _fixed_fill_reference(params: FilterParams, fill: float, element: bytes) -> Tuple[float, int]:
    f = make_filter(params)
    d = len(set(f.positions(element)))
    if params.is_partitioned:
        pb = params.m // params.k
        return (round(fill * pb) / pb) ** params.k, d
    ones = int(round(fill * params.m))
    return distinct_hit_prob(ones, params.m, d), d


def double_hash_weak_spot_experiment(
    m_block: int,
    k: int,
    fill: float,
    trials: int,
    seed: int,
    scheme_tag: SchemeTag = SchemeTag.NAIVE_DOUBLE,
    step_classes: Sequence[str] = STEP_CLASSES,
    shards: int = DEFAULT_SHARDS,
    n_jobs: int = 1,
    progress: bool = False,
) -> Dict[str, Dict[str, ExperimentReport]]:
    """Per-element FPR of crafted double-hash steps on fixed-fill blocks.

    Returns {step_class: {"standard": report, "partitioned": report}}; the
    same crafted element is queried against both layouts.
    """
    scheme = HashScheme(scheme_tag, seed)
    layouts = {
        "standard": FilterParams(m_block, k, Variant.STANDARD, scheme=scheme),
        "partitioned": FilterParams(m_block, k, Variant.PARTITIONED, scheme=scheme),
    }
    out: Dict[str, Dict[str, ExperimentReport]] = {}
    for step_class in step_classes:
        crafted = find_element_with_step(scheme, m_block, step_class, seed)
        out[step_class] = {}
        for name, params in layouts.items():
            (positives,) = run_sharded(
                _fixed_fill_worker, trials, seed, shards, n_jobs, progress,
                desc=f"Step {step_class} {name}",
                args=(params, fill, crafted.element),
            )
            reference, d = _fixed_fill_reference(params, fill, crafted.element)
            out[step_class][name] = make_report(
                int(positives), trials, reference,
                {
                    "variant": name,
                    "scheme": scheme_tag.value,
                    "step_class": step_class,
                    "m": m_block,
                    "k": k,
                    "fill": fill,
                    "d": d,
                    "attempts": crafted.attempts,
                },
            )
    return out


# ----------------------------------------------------------------------
# Double hashing: overlaps between element pairs
# ----------------------------------------------------------------------

def _overlap_worker(rng: np.random.Generator, trials: int, scheme: HashScheme, m: int, k: int) -> List[int]:
    flat = IndexLayout.flat(m, k)
    parts = IndexLayout.per_part(m, k)
    # standard full, standard partial, partitioned full, partitioned partial
    counts = [0, 0, 0, 0]
    for _ in range(trials):
        x = rng.bytes(DEFAULT_ELEMENT_BYTES)
        y = fresh_element(rng, {x})
        for slot, layout in ((0, flat), (2, parts)):
            px = set(derive_indices(scheme, x, layout).positions())
            py = set(derive_indices(scheme, y, layout).positions())
            shared = len(px & py)
            counts[slot] += px == py
            counts[slot + 1] += shared >= 2
    return counts


def overlap_incidence_experiment(
    m: int,
    k: int,
    trials: int,
    seed: int,
    scheme_tag: SchemeTag = SchemeTag.NAIVE_DOUBLE,
    shards: int = DEFAULT_SHARDS,
    n_jobs: int = 1,
    progress: bool = False,
) -> Dict[str, Dict[str, ExperimentReport]]:
    """Rates of full (issue2) and >= 2-position partial (issue3) overlap of random pairs."""
    scheme = HashScheme(scheme_tag, seed)
    counts = run_sharded(
        _overlap_worker, trials, seed, shards, n_jobs, progress,
        desc="Overlap pairs", args=(scheme, m, k),
    )
    out: Dict[str, Dict[str, ExperimentReport]] = {}
    for offset, name in ((0, "standard"), (2, "partitioned")):
        meta = {
            "variant": name,
            "scheme": scheme_tag.value,
            "m": m,
            "k": k,
            "pair_collision_prob": double_hash_pair_collision_prob(m, k, name == "partitioned"),
        }
        out[name] = {
            "issue2": make_report(int(counts[offset]), trials, None, meta),
            "issue3": make_report(int(counts[offset + 1]), trials, None, meta),
        }
    return out


# ----------------------------------------------------------------------
# Set disjointness
# ----------------------------------------------------------------------

def _disjoint_worker(
    rng: np.random.Generator,
    trials: int,
    standard: FilterParams,
    partitioned: FilterParams,
    n1: int,
    n2: int,
) -> List[int]:
    filters = [(make_filter(standard), make_filter(standard)), (make_filter(partitioned), make_filter(partitioned))]
    counts = [0, 0]
    for _ in range(trials):
        seen: Set[bytes] = set()
        drawn = []
        for _ in range(n1 + n2):
            e = fresh_element(rng, seen)
            seen.add(e)
            drawn.append(e)
        a_elems, b_elems = drawn[:n1], drawn[n1:]
        for slot, (fa, fb) in enumerate(filters):
            fa.clear()
            fb.clear()
            fa.insert_many(a_elems)
            fb.insert_many(b_elems)
            counts[slot] += not provably_disjoint(fa, fb)
    return counts


def disjointness_experiment(
    m: int,
    k: int,
    n1: int,
    n2: int,
    trials: int,
    seed: int,
    scheme_tag: SchemeTag = SchemeTag.INDEPENDENT,
    shards: int = DEFAULT_SHARDS,
    n_jobs: int = 1,
    progress: bool = False,
) -> Dict[str, ExperimentReport]:
    """False set-overlap rate of genuinely disjoint sets, standard vs partitioned."""
    scheme = HashScheme(scheme_tag, seed)
    standard = FilterParams(m, k, Variant.STANDARD, scheme=scheme)
    partitioned = FilterParams(m, k, Variant.PARTITIONED, scheme=scheme)
    counts = run_sharded(
        _disjoint_worker, trials, seed, shards, n_jobs, progress,
        desc="Disjoint sets", args=(standard, partitioned, n1, n2),
    )
    exact = false_overlap_probs_exact(m, k, n1, n2)
    formula = false_overlap_probs(m, k, n1, n2)
    out: Dict[str, ExperimentReport] = {}
    for slot, name in enumerate(("standard", "partitioned")):
        out[name] = make_report(
            int(counts[slot]), trials, exact[slot],
            {"variant": name, "m": m, "k": k, "n1": n1, "n2": n2, "formula": formula[slot]},
        )
    return out
