"""Population-level continuous-time simulation on out-degree classes.

Birth rates depend on a vertex only through its out-degree and every
newborn starts at out-degree 0, so the vector of class counts (number
of vertices at each out-degree) is itself Markov and its jump chain is
the discrete attachment law.  Statistics that ignore tree structure
(population sizes, event times, degree extremes) can therefore be
simulated without building a tree, which is what trajectories, races,
dominance checks, and max-degree scans need.

Vertex 0 of the seed is tracked separately so that (a) an additive rate
shift can be applied to it alone (it births at f(out-degree + shift)),
and (b) its out-degree stays available exactly, since the root has no
parent edge and its total degree equals its out-degree.

The inner loop is a numba-compiled Gillespie chain fed with pre-drawn
arrays from a numpy Generator, so runs are deterministic per seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .attraction import AttractionSpec, evaluate, evaluate_many
from .growth import DEFAULT_POPULATION_CAP, GrowthCapError

__all__ = ["PopulationRun", "run_population"]

_DONE_TARGET = 0
_DONE_TEND = 1
_NEED_RNG = 2
_NEED_TABLE = 3
_HIT_CAP = 4

# refresh the cached total weight from exact per-class weights this often
_RECOMPUTE_EVERY = 1 << 20
_CHUNK0 = 4096
_CHUNK_MAX = 1 << 20
_TABLE_HEADROOM = 4096


@njit(cache=True)
def _gillespie(counts, weights, f_table, state_i, state_f, t_end, target_pop, cap, exps, unis, out_times):
    """Advance the birth chain until a stop, rng exhaustion, or a table edge.

    state_i = [root_class, root_shift, nr_max, pop, births, since_recompute],
    state_f = [t, W].  One exponential and one uniform are consumed per
    event.  A NEED_TABLE break happens before the event is committed or
    its draws consumed, so rerunning with a longer table replays it.
    """
    root_class = state_i[0]
    shift = state_i[1]
    nr_max = state_i[2]
    pop = state_i[3]
    births = state_i[4]
    since = state_i[5]
    t = state_f[0]
    W = state_f[1]
    table_len = f_table.shape[0]
    budget = exps.shape[0]
    i = 0
    n_rec = 0
    status = _NEED_RNG
    need_idx = -1
    while True:
        if target_pop >= 0 and pop >= target_pop:
            status = _DONE_TARGET
            break
        if i >= budget:
            status = _NEED_RNG
            break
        if since >= _RECOMPUTE_EVERY:
            W = f_table[root_class + shift]
            for k in range(nr_max + 1):
                W += weights[k]
            since = 0
        t_next = t + exps[i] / W
        if t_end >= 0.0 and t_next > t_end:
            i += 1
            status = _DONE_TEND
            break
        if pop >= cap:
            status = _HIT_CAP
            break
        u = unis[i] * W
        w_root = f_table[root_class + shift]
        if pop == 1 or u < w_root:
            if root_class + shift + 1 >= table_len:
                status = _NEED_TABLE
                need_idx = root_class + shift + 1
                break
            W += f_table[root_class + shift + 1] - w_root
            root_class += 1
        else:
            u -= w_root
            chosen = -1
            k = 0
            while k <= nr_max:
                if counts[k] > 0 and u < weights[k]:
                    chosen = k
                    break
                u -= weights[k]
                k += 1
            if chosen < 0:
                # float drift pushed u past the last bucket; take the
                # highest populated class instead
                k = nr_max
                while k > 0 and counts[k] == 0:
                    k -= 1
                chosen = k
            if chosen + 1 >= table_len:
                status = _NEED_TABLE
                need_idx = chosen + 1
                break
            counts[chosen] -= 1
            weights[chosen] = counts[chosen] * f_table[chosen]
            counts[chosen + 1] += 1
            weights[chosen + 1] = counts[chosen + 1] * f_table[chosen + 1]
            if chosen + 1 > nr_max:
                nr_max = chosen + 1
            W += f_table[chosen + 1] - f_table[chosen]
        t = t_next
        i += 1
        counts[0] += 1
        weights[0] = counts[0] * f_table[0]
        W += f_table[0]
        pop += 1
        births += 1
        since += 1
        out_times[n_rec] = t
        n_rec += 1
    state_i[0] = root_class
    state_i[2] = nr_max
    state_i[3] = pop
    state_i[4] = births
    state_i[5] = since
    state_f[0] = t
    state_f[1] = W
    return status, i, need_idx


@dataclass(frozen=True)
class PopulationRun:
    """Outcome of a degree-class run: event times plus degree extremes."""

    event_times: np.ndarray
    initial_population: int
    final_population: int
    final_time: float
    births: int
    root_out_degree: int
    max_out_degree_nonroot: int  # -1 when the run holds no non-root vertex


def _build_table(spec: AttractionSpec, length: int) -> np.ndarray:
    return evaluate_many(spec, np.arange(length, dtype=np.int64))


def run_population(
    spec: AttractionSpec,
    *,
    initial_out_degrees=None,
    root_shift: int = 0,
    n_max: int | None = None,
    t_end: float | None = None,
    rng: np.random.Generator,
    population_cap: int = DEFAULT_POPULATION_CAP,
) -> PopulationRun:
    """Simulate the out-degree-class birth chain from a seed degree list.

    ``initial_out_degrees[0]`` belongs to the tracked root vertex; with
    ``root_shift = d`` it births at rate f(out-degree + d).  Exactly one
    of ``n_max`` (total population target) and ``t_end`` must be given.
    Matches the tree engine's law vertex-for-vertex in distribution, and
    its cap and stop conventions exactly.
    """
    if (n_max is None) == (t_end is None):
        raise ValueError("exactly one stop condition (n_max or t_end) must be given")
    if t_end is not None and t_end < 0.0:
        raise ValueError("t_end must be nonnegative")
    if root_shift < 0:
        raise ValueError("root_shift must be nonnegative")
    degs = np.asarray(
        initial_out_degrees if initial_out_degrees is not None else [0], dtype=np.int64
    )
    if degs.ndim != 1 or degs.size < 1:
        raise ValueError("initial_out_degrees must be a nonempty 1-d sequence")
    if degs.min() < 0:
        raise ValueError("out-degrees must be nonnegative")
    pop0 = int(degs.size)
    if n_max is not None and n_max < pop0:
        raise ValueError(f"n_max = {n_max} is below the initial population {pop0}")

    root_class = int(degs[0])
    nonroot = degs[1:]
    nr_max = int(nonroot.max()) if nonroot.size else 0

    defined_len = len(spec.values) if spec.kind == "table" and spec.tail == "reject" else None
    current_need = max(root_class + root_shift, nr_max) + 1
    if defined_len is not None and current_need > defined_len:
        evaluate(spec, current_need - 1)  # raises UndefinedDegreeError
    if n_max is not None:
        desired = current_need + 1 + (n_max - pop0)
    else:
        desired = current_need + 1 + _TABLE_HEADROOM
    table_len = desired if defined_len is None else min(desired, defined_len)
    f_table = _build_table(spec, table_len)

    counts = np.zeros(table_len, dtype=np.int64)
    for d in nonroot:
        counts[d] += 1
    weights = counts.astype(np.float64) * f_table

    state_i = np.array([root_class, root_shift, nr_max, pop0, 0, 0], dtype=np.int64)
    w_total = float(weights[: nr_max + 1].sum() + f_table[root_class + root_shift])
    state_f = np.array([0.0, w_total], dtype=np.float64)

    target = np.int64(n_max if n_max is not None else -1)
    horizon = np.float64(t_end if t_end is not None else -1.0)
    cap = np.int64(population_cap)

    time_chunks: list[np.ndarray] = []
    chunk = (n_max - pop0) if n_max is not None else _CHUNK0
    pending_exp: np.ndarray | None = None
    pending_uni: np.ndarray | None = None
    while True:
        if pending_exp is not None:
            exps, unis = pending_exp, pending_uni
            pending_exp = pending_uni = None
        else:
            exps = rng.standard_exponential(chunk)
            unis = rng.random(chunk)
            chunk = min(max(chunk, _CHUNK0) * 2, _CHUNK_MAX)
        out_times = np.empty(exps.size, dtype=np.float64)
        births_before = int(state_i[4])
        status, used, need_idx = _gillespie(
            counts, weights, f_table, state_i, state_f, horizon, target, cap, exps, unis, out_times
        )
        got = int(state_i[4]) - births_before
        if got:
            time_chunks.append(out_times[:got].copy())
        if status == _NEED_TABLE:
            if defined_len is not None and need_idx >= defined_len:
                evaluate(spec, int(need_idx))  # raises UndefinedDegreeError
            pending_exp, pending_uni = exps[used:], unis[used:]
            new_len = int(need_idx) + 1 + _TABLE_HEADROOM
            if defined_len is not None:
                new_len = min(new_len, defined_len)
            f_table = _build_table(spec, new_len)
            grown = np.zeros(new_len, dtype=np.int64)
            grown[:table_len] = counts
            counts = grown
            grown_w = np.zeros(new_len, dtype=np.float64)
            grown_w[:table_len] = weights
            weights = grown_w
            table_len = new_len
            continue
        if status == _NEED_RNG:
            continue
        if status == _HIT_CAP:
            raise GrowthCapError(
                f"population cap {population_cap} exceeded at time {state_f[0]:g}"
            )
        break

    event_times = (
        np.concatenate(time_chunks) if time_chunks else np.empty(0, dtype=np.float64)
    )
    births = int(state_i[4])
    if t_end is not None:
        final_time = float(t_end)
    else:
        final_time = float(event_times[-1]) if births else 0.0

    top = -1
    for k in range(int(state_i[2]), -1, -1):
        if counts[k] > 0:
            top = k
            break
    return PopulationRun(
        event_times=event_times,
        initial_population=pop0,
        final_population=int(state_i[3]),
        final_time=final_time,
        births=births,
        root_out_degree=int(state_i[0]),
        max_out_degree_nonroot=top,
    )
