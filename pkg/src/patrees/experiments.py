"""Monte Carlo experiment harness.

Each operation here is a deterministic function of its configuration and a
64-bit master seed.  Work item i draws its generator from
``SeedSequence(entropy=master_seed, spawn_key=(i,))`` (paired runs use
``(i, 0)`` / ``(i, 1)``, grids use ``(row, trial)``), so trials are
independent, reorderable, and reproducible one at a time; reruns with the
same seed and trial count give identical results.  Trial outcomes reduce
by summation or pooling, never by stream sharing.

Tree-shape statistics (centroid tracking, root coverage) run the exact
discrete attachment chain.  Pure population statistics (races, dominance,
degree extremes) run on the out-degree-class engine, which shares its law
with the tree engine vertex-for-vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .attraction import AttractionSpec, alpha_sublinear, evaluate, validate
from .growth import WeightedIndex, grow_discrete
from .malthus import solve_malthusian
from .population import run_population
from .tree import CentroidTracker, GrowingTree, line_tree, psi_all, star_tree

__all__ = [
    "SEED_SCHEME",
    "CentroidChangeLog",
    "CoverageRow",
    "CoverageTable",
    "DominanceReport",
    "HoeffdingRow",
    "MaxDegreeRow",
    "RaceResult",
    "derived_rng",
    "dominance_check",
    "h_k_psi",
    "hoeffding_probe",
    "max_degree_scan",
    "race",
    "resolve_shape",
    "root_coverage",
    "track_centroid",
]

SEED_SCHEME = "ss-spawnkey-v1"


def derived_rng(master_seed: int, *branch: int) -> np.random.Generator:
    """Generator for one work item, derived per the module seed scheme."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(branch))
    return np.random.default_rng(ss)


# ------------------------------------------------------------------ selection


def h_k_psi(tree: GrowingTree, K: int) -> list[int]:
    """The K vertices of smallest psi, ties to lower birth index, sorted so."""
    n = tree.n
    if not 1 <= K <= n:
        raise ValueError(f"K must be in [1, {n}], got {K}")
    psi = psi_all(tree)
    order = sorted(range(n), key=lambda v: (psi[v], v))
    return order[:K]


# ------------------------------------------------------------------- coverage


@dataclass(frozen=True)
class CoverageRow:
    alpha: float | None
    n: int
    K: int
    trials: int
    successes: int
    coverage: float
    std_error: float


@dataclass(frozen=True)
class CoverageTable:
    """Root-confidence coverage per candidate set size K."""

    rows: tuple[CoverageRow, ...]


def root_coverage(
    spec: AttractionSpec,
    n: int,
    K_list,
    trials: int,
    master_seed: int,
    *,
    allow_any_spec: bool = False,
) -> CoverageTable:
    """Fraction of trials in which the first vertex lands in the K smallest-psi set.

    Grows one fresh n-vertex tree per trial (seed spawn key ``(i,)``) and
    scores every K on the same tree, so coverage is nondecreasing in K
    exactly, not merely in expectation.  Guarded to the sublinear weight
    class, where the guarantee being probed actually holds.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    ks = [int(k) for k in K_list]
    if not ks:
        raise ValueError("K_list must not be empty")
    for k in ks:
        if not 1 <= k <= n:
            raise ValueError(f"K values must be in [1, {n}], got {k}")
    if not allow_any_spec and not validate(spec).valid:
        raise ValueError(
            "root coverage applies to weights in the sublinear class; "
            "pass allow_any_spec=True to run it anyway"
        )

    successes = {k: 0 for k in ks}
    for i in range(trials):
        tree = grow_discrete(spec, n, derived_rng(master_seed, i))
        psi = psi_all(tree)
        root_psi = psi[0]
        # rank of the first vertex under (psi, birth index); it wins ties
        rank = 1 + sum(1 for v in range(1, n) if psi[v] < root_psi)
        for k in ks:
            if rank <= k:
                successes[k] += 1

    alpha = spec.alpha if spec.kind == "alpha_sublinear" else None
    rows = []
    for k in ks:
        cov = successes[k] / trials
        rows.append(
            CoverageRow(
                alpha=alpha,
                n=n,
                K=k,
                trials=trials,
                successes=successes[k],
                coverage=cov,
                std_error=math.sqrt(cov * (1.0 - cov) / trials),
            )
        )
    return CoverageTable(rows=tuple(rows))


# ----------------------------------------------------------- centroid tracking


@dataclass(frozen=True)
class CentroidChangeLog:
    """Selected-centroid history of one growth run.

    ``events`` holds (n, previous selected, new selected) at each change;
    ``checkpoints`` holds (n, vertices ordered by (psi, birth index)).
    A change of selection at finite n never certifies permanence; the log
    only reports what happened up to n_max.
    """

    events: tuple[tuple[int, int, int], ...]
    checkpoints: tuple[tuple[int, tuple[int, ...]], ...]
    final_selected: int


def track_centroid(
    spec: AttractionSpec,
    n_max: int,
    checkpoint_list,
    K_top: int,
    master_seed: int,
) -> CentroidChangeLog:
    """Grow one tree to n_max, logging every selected-centroid change.

    The growth stream is identical to ``grow_discrete`` under the derived
    seed ``(0,)``, so a run can be replayed externally.  The centroid is
    maintained incrementally (O(depth) per step) and re-selected at every
    step.  Two structural guarantees are asserted throughout: the selected
    centroid's psi never exceeds n/2, and the new leaf always sees the
    previous selection in a component of at least half the old tree.
    """
    if n_max < 2:
        raise ValueError(f"n_max must be at least 2, got {n_max}")
    if K_top < 1:
        raise ValueError(f"K_top must be at least 1, got {K_top}")
    marks = sorted(set(int(c) for c in checkpoint_list))
    for c in marks:
        if not 1 <= c <= n_max:
            raise ValueError(f"checkpoints must be in [1, {n_max}], got {c}")

    rng = derived_rng(master_seed, 0)
    tracker = CentroidTracker()
    f0 = evaluate(spec, 0)
    weights = WeightedIndex([f0])
    out_deg = [0]
    events: list[tuple[int, int, int]] = []
    checkpoints: list[tuple[int, tuple[int, ...]]] = []
    mark_set = set(marks)
    if 1 in mark_set:
        checkpoints.append((1, (0,)))

    for i in range(1, n_max):
        parent = weights.sample(rng)
        prev_selected = tracker.selected
        component = tracker.add_leaf(parent)
        n_now = i + 1
        if 2 * component < n_now - 1:
            raise RuntimeError(
                f"new-leaf component {component} fell below half of {n_now - 1}"
            )
        if 2 * tracker.psi_selected > n_now:
            raise RuntimeError(
                f"selected centroid psi {tracker.psi_selected} exceeds half of {n_now}"
            )
        if tracker.selected != prev_selected:
            events.append((n_now, prev_selected, tracker.selected))
        out_deg[parent] += 1
        weights.update(parent, evaluate(spec, out_deg[parent]))
        weights.append(f0)
        out_deg.append(0)
        if n_now in mark_set:
            members = h_k_psi(tracker.as_tree(), min(K_top, n_now))
            checkpoints.append((n_now, tuple(members)))

    return CentroidChangeLog(
        events=tuple(events),
        checkpoints=tuple(checkpoints),
        final_selected=tracker.selected,
    )


# ------------------------------------------------------------- degree scaling


@dataclass(frozen=True)
class MaxDegreeRow:
    alpha: float
    n: int
    trials: int
    median_max_degree: float
    log_scale_ratio: float  # median / (log n)^(1/(1-alpha)); nan at n = 1


def max_degree_scan(
    alpha: float,
    n_list,
    trials: int,
    master_seed: int,
) -> tuple[MaxDegreeRow, ...]:
    """Median maximum total degree across tree sizes, with the log-power ratio.

    Total degree counts the parent edge for every vertex except the first,
    so a two-vertex tree has maximum degree 1.  Row j, trial t draws from
    spawn key (j, t).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    sizes = [int(n) for n in n_list]
    if not sizes:
        raise ValueError("n_list must not be empty")
    if any(n < 1 for n in sizes):
        raise ValueError("tree sizes must be at least 1")
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")

    spec = alpha_sublinear(alpha)
    rows = []
    for j, n in enumerate(sizes):
        maxima = np.empty(trials, dtype=np.int64)
        for t in range(trials):
            run = run_population(spec, n_max=n, rng=derived_rng(master_seed, j, t))
            nonroot_deg = run.max_out_degree_nonroot + 1 if run.max_out_degree_nonroot >= 0 else 0
            maxima[t] = max(run.root_out_degree, nonroot_deg)
        median = float(np.median(maxima))
        if n >= 2:
            ratio = median / math.log(n) ** (1.0 / (1.0 - alpha))
        else:
            ratio = math.nan
        rows.append(
            MaxDegreeRow(
                alpha=alpha, n=n, trials=trials, median_max_degree=median, log_scale_ratio=ratio
            )
        )
    return tuple(rows)


# ----------------------------------------------------------------------- race


def resolve_shape(shape) -> GrowingTree:
    """Materialize a seed-tree descriptor.

    Accepts a GrowingTree, or one of: ``"single"``, ``"line:R"``,
    ``"star:R"``, ``"tree:PATH"``.
    """
    if isinstance(shape, GrowingTree):
        return shape
    if not isinstance(shape, str):
        raise ValueError(f"unsupported shape descriptor: {shape!r}")
    if shape == "single":
        return GrowingTree()
    kind, sep, arg = shape.partition(":")
    if not sep or not arg:
        raise ValueError(
            f"bad shape descriptor {shape!r}; expected single, line:R, star:R, or tree:PATH"
        )
    if kind == "line" or kind == "star":
        try:
            r = int(arg)
        except ValueError:
            raise ValueError(f"bad vertex count in shape descriptor {shape!r}") from None
        return line_tree(r) if kind == "line" else star_tree(r)
    if kind == "tree":
        return GrowingTree.load(arg)
    raise ValueError(
        f"bad shape descriptor {shape!r}; expected single, line:R, star:R, or tree:PATH"
    )


def _shape_label(shape) -> str:
    if isinstance(shape, str):
        return shape
    return f"tree:n={shape.n}"


@dataclass(frozen=True)
class RaceResult:
    shape1: str
    shape2: str
    t_end: float
    trials: int
    wins: float  # ties score one half
    win_prob: float
    std_error: float


def race(
    shape1,
    shape2,
    spec: AttractionSpec,
    t_end: float | None,
    trials: int,
    master_seed: int,
) -> RaceResult:
    """Empirical P(shape1's continuation outgrows shape2's at the horizon).

    Trial i runs two independent continuations from spawn keys (i, 0) and
    (i, 1) and compares final populations; ties count one half.  With
    ``t_end=None`` the horizon defaults to the time at which the smaller
    seed reaches about 1e4 individuals in expectation.
    """
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    tree1 = resolve_shape(shape1)
    tree2 = resolve_shape(shape2)
    degs1 = [tree1.out_degree(v) for v in range(tree1.n)]
    degs2 = [tree2.out_degree(v) for v in range(tree2.n)]
    if t_end is None:
        theta = solve_malthusian(spec, 1e-9).theta
        t_end = math.log(max(1e4 / min(tree1.n, tree2.n), 2.0)) / theta
    wins = 0.0
    for i in range(trials):
        p1 = run_population(
            spec, initial_out_degrees=degs1, t_end=t_end, rng=derived_rng(master_seed, i, 0)
        ).final_population
        p2 = run_population(
            spec, initial_out_degrees=degs2, t_end=t_end, rng=derived_rng(master_seed, i, 1)
        ).final_population
        if p1 > p2:
            wins += 1.0
        elif p1 == p2:
            wins += 0.5
    win_prob = wins / trials
    return RaceResult(
        shape1=_shape_label(shape1),
        shape2=_shape_label(shape2),
        t_end=float(t_end),
        trials=trials,
        wins=wins,
        win_prob=win_prob,
        std_error=math.sqrt(win_prob * (1.0 - win_prob) / trials),
    )


# ------------------------------------------------------------------ dominance


@dataclass(frozen=True)
class DominanceReport:
    """Shifted-root process versus a sum of d+1 fresh independent processes."""

    d: int
    alpha: float
    t_end: float
    trials: int
    mean_shifted_root: float
    mean_independent_sum: float
    sd_shifted_root: float
    sd_independent_sum: float
    deciles_shifted_root: tuple[float, ...]
    deciles_independent_sum: tuple[float, ...]


def dominance_check(
    d: int,
    alpha: float,
    t_end: float,
    trials: int,
    master_seed: int,
) -> DominanceReport:
    """Compare a root birthing at f(i + d) against d+1 independent singletons.

    The theory says the independent sum stochastically dominates the
    shifted-root population, so its mean and quantiles should sit at or
    above.  A population seeded with d+1 fresh vertices is exactly the sum
    of d+1 independent single-vertex runs, by the branching property.
    """
    if d < 0:
        raise ValueError(f"d must be nonnegative, got {d}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if t_end <= 0.0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    spec = alpha_sublinear(alpha)
    shifted = np.empty(trials, dtype=np.int64)
    summed = np.empty(trials, dtype=np.int64)
    for i in range(trials):
        shifted[i] = run_population(
            spec,
            initial_out_degrees=[0],
            root_shift=d,
            t_end=t_end,
            rng=derived_rng(master_seed, i, 0),
        ).final_population
        summed[i] = run_population(
            spec,
            initial_out_degrees=[0] * (d + 1),
            t_end=t_end,
            rng=derived_rng(master_seed, i, 1),
        ).final_population
    qs = np.arange(0.1, 0.91, 0.1)
    ddof = 1 if trials > 1 else 0
    return DominanceReport(
        d=d,
        alpha=alpha,
        t_end=t_end,
        trials=trials,
        mean_shifted_root=float(np.mean(shifted)),
        mean_independent_sum=float(np.mean(summed)),
        sd_shifted_root=float(np.std(shifted, ddof=ddof)),
        sd_independent_sum=float(np.std(summed, ddof=ddof)),
        deciles_shifted_root=tuple(float(q) for q in np.quantile(shifted, qs)),
        deciles_independent_sum=tuple(float(q) for q in np.quantile(summed, qs)),
    )


# ------------------------------------------------------------ hoeffding probe


@dataclass(frozen=True)
class HoeffdingRow:
    n: int
    trials: int
    empirical: float
    analytic: float  # exact value 2^-n
    bound: float  # the 1/n^2 envelope


def hoeffding_probe(n_list, trials: int, master_seed: int) -> tuple[HoeffdingRow, ...]:
    """P(sum of n unit exponentials <= one unit exponential), measured vs exact.

    The exact value is E[exp(-sum X_i)] = 2^{-n}, which falls under 1/n^2
    from n = 7 on; the probe checks the Monte Carlo estimate against both.
    Row j draws from spawn key (j,).
    """
    sizes = [int(n) for n in n_list]
    if not sizes:
        raise ValueError("n_list must not be empty")
    if any(n < 1 for n in sizes):
        raise ValueError("n values must be at least 1")
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    rows = []
    for j, n in enumerate(sizes):
        rng = derived_rng(master_seed, j)
        sums = rng.standard_gamma(n, trials)
        y = rng.standard_exponential(trials)
        rows.append(
            HoeffdingRow(
                n=n,
                trials=trials,
                empirical=float(np.mean(sums <= y)),
                analytic=0.5**n,
                bound=1.0 / (n * n),
            )
        )
    return tuple(rows)
