"""Attraction functions for preferential attachment growth.

An attraction function f maps the out-degree k of a vertex to the weight
f(k) with which new vertices attach to it.  The sublinear family of
interest is characterised by three conditions:

  1. f is nondecreasing,
  2. f(k) >= 1 for all k and f is not identically 1,
  3. there is an exponent a in (0, 1) with f(k) <= (k + 1)^a for all k.

``validate`` reports which of these a given spec violates.  Growth and
series code accepts any spec whose values are positive; the sublinear
conditions matter for the theory-backed experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AttractionSpec",
    "UndefinedDegreeError",
    "ValidationReport",
    "uniform",
    "linear",
    "alpha_sublinear",
    "table",
    "evaluate",
    "evaluate_many",
    "validate",
    "max_increment_beyond",
    "spec_to_dict",
    "spec_from_dict",
]

KINDS = ("uniform", "linear", "alpha_sublinear", "table")
TAIL_RULES = ("constant-last", "reject")


class UndefinedDegreeError(KeyError):
    """A table spec with the reject tail rule was asked beyond its last entry."""


@dataclass(frozen=True)
class AttractionSpec:
    """Immutable description of an attraction function.

    Use the module-level constructors (``uniform()``, ``linear()``,
    ``alpha_sublinear(a)``, ``table(values, ...)``) rather than building
    instances by hand; they check the arguments.
    """

    kind: str
    alpha: float | None = None
    values: tuple[float, ...] | None = None
    tail: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown attraction kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "alpha_sublinear":
            if self.alpha is None or not (0.0 < self.alpha < 1.0):
                raise ValueError(f"alpha must lie in the open interval (0, 1), got {self.alpha!r}")
        if self.kind == "table":
            if not self.values:
                raise ValueError("table spec needs at least one value")
            if any(v <= 0.0 or not math.isfinite(v) for v in self.values):
                raise ValueError("table values must be finite and positive")
            if self.tail not in TAIL_RULES:
                raise ValueError(f"table tail rule must be one of {TAIL_RULES}, got {self.tail!r}")
            if self.alpha is not None and not (0.0 < self.alpha < 1.0):
                raise ValueError(f"declared alpha must lie in (0, 1), got {self.alpha!r}")

    def describe(self) -> str:
        """Short human-readable form, used in CSV cells and error messages."""
        if self.kind == "alpha_sublinear":
            return f"alpha_sublinear({self.alpha:g})"
        if self.kind == "table":
            body = ",".join(f"{v:g}" for v in self.values)
            alpha = f",alpha={self.alpha:g}" if self.alpha is not None else ""
            return f"table([{body}],{self.tail}{alpha})"
        return self.kind


def uniform() -> AttractionSpec:
    """f(k) = 1: every vertex equally attractive (random recursive tree)."""
    return AttractionSpec(kind="uniform")


def linear() -> AttractionSpec:
    """f(k) = k + 1: classical linear preferential attachment."""
    return AttractionSpec(kind="linear")


def alpha_sublinear(alpha: float) -> AttractionSpec:
    """f(k) = (k + 1)^alpha with alpha in (0, 1)."""
    return AttractionSpec(kind="alpha_sublinear", alpha=float(alpha))


def table(
    values: "list[float] | tuple[float, ...]",
    tail: str = "constant-last",
    alpha: float | None = None,
) -> AttractionSpec:
    """Explicit lookup table f(0), f(1), ...

    ``tail`` controls degrees past the last entry: ``"constant-last"``
    extends the final value, ``"reject"`` raises ``UndefinedDegreeError``.
    ``alpha`` optionally declares the exponent used by ``validate`` for
    the sublinear bound check.
    """
    vals = tuple(float(v) for v in values)
    return AttractionSpec(kind="table", values=vals, tail=tail, alpha=alpha)


def evaluate(spec: AttractionSpec, k: int) -> float:
    """Attraction weight of a vertex with out-degree ``k`` (k >= 0)."""
    if k < 0:
        raise ValueError(f"out-degree must be nonnegative, got {k}")
    if spec.kind == "uniform":
        return 1.0
    if spec.kind == "linear":
        return float(k + 1)
    if spec.kind == "alpha_sublinear":
        return float(k + 1) ** spec.alpha
    # table
    if k < len(spec.values):
        return spec.values[k]
    if spec.tail == "constant-last":
        return spec.values[-1]
    raise UndefinedDegreeError(
        f"undefined degree {k}: table spec has {len(spec.values)} entries and tail rule 'reject'"
    )


def evaluate_many(spec: AttractionSpec, ks: np.ndarray) -> np.ndarray:
    """Vectorised ``evaluate`` over an integer array of out-degrees."""
    ks = np.asarray(ks)
    if ks.size and ks.min() < 0:
        raise ValueError("out-degrees must be nonnegative")
    if spec.kind == "uniform":
        return np.ones(ks.shape, dtype=np.float64)
    if spec.kind == "linear":
        return (ks + 1).astype(np.float64)
    if spec.kind == "alpha_sublinear":
        return np.power((ks + 1).astype(np.float64), spec.alpha)
    vals = np.asarray(spec.values, dtype=np.float64)
    if spec.tail == "constant-last":
        return vals[np.minimum(ks, len(vals) - 1)]
    if ks.size and ks.max() >= len(vals):
        raise UndefinedDegreeError(
            f"undefined degree {int(ks.max())}: table spec has {len(vals)} entries and tail rule 'reject'"
        )
    return vals[ks]


def max_increment_beyond(spec: AttractionSpec, k: int) -> float:
    """Supremum of f(i) - f(i-1) over i > k.

    Used by the offspring-series tail enclosure.  Exact for every kind:
    uniform 0, linear 1, alpha-sublinear increments decrease in i, a
    table is flat past its last entry.
    """
    if spec.kind == "uniform":
        return 0.0
    if spec.kind == "linear":
        return 1.0
    if spec.kind == "alpha_sublinear":
        # increments of i^alpha are decreasing, so the first one bounds the rest
        return float(k + 2) ** spec.alpha - float(k + 1) ** spec.alpha
    vals = spec.values
    if spec.tail == "reject":
        raise UndefinedDegreeError("reject-tail table has no values beyond its last entry")
    hi = 0.0
    for i in range(max(1, k + 1), len(vals)):
        hi = max(hi, vals[i] - vals[i - 1])
    return hi


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the sublinear-family membership check."""

    valid: bool
    violations: tuple[str, ...] = field(default_factory=tuple)
    witness_alpha: float | None = None


def _checkable_prefix(spec: AttractionSpec, k_check: int) -> int:
    if spec.kind == "table" and spec.tail == "reject":
        return min(k_check, len(spec.values) - 1)
    return k_check


def validate(spec: AttractionSpec, k_check: int = 10_000) -> ValidationReport:
    """Check the three sublinear-family conditions.

    Parametric kinds are decided analytically; table kinds are checked on
    the prefix k in [0, k_check] intersected with their defined domain,
    plus the first tail entry for constant-last tables (the bound
    (k + 1)^a only gets easier further out).
    """
    if spec.kind == "uniform":
        return ValidationReport(False, ("f is identically 1",))
    if spec.kind == "linear":
        return ValidationReport(
            False,
            ("no exponent a in (0, 1) satisfies f(k) <= (k + 1)^a: f(1) = 2 > 2^a",),
        )
    if spec.kind == "alpha_sublinear":
        return ValidationReport(True, (), witness_alpha=spec.alpha)

    violations: list[str] = []
    last = _checkable_prefix(spec, k_check)
    ks = np.arange(0, last + 1)
    f = evaluate_many(spec, ks)

    drops = np.nonzero(np.diff(f) < 0.0)[0]
    if drops.size:
        i = int(drops[0])
        violations.append(f"not nondecreasing: f({i}) = {f[i]:g} > f({i + 1}) = {f[i + 1]:g}")

    below = np.nonzero(f < 1.0)[0]
    if below.size:
        i = int(below[0])
        violations.append(f"f({i}) = {f[i]:g} < 1")
    elif np.all(f == 1.0):
        violations.append("f is identically 1 on the checked range")

    # condition 3: existence (or declared-alpha check) of the sublinear bound
    witness: float | None = None
    if spec.alpha is not None:
        bound = np.power((ks + 1).astype(np.float64), spec.alpha)
        bad = np.nonzero(f > bound)[0]
        if bad.size:
            i = int(bad[0])
            violations.append(
                f"f({i}) = {f[i]:g} exceeds (k + 1)^alpha = {bound[i]:g} for declared alpha = {spec.alpha:g}"
            )
        else:
            witness = spec.alpha
    else:
        if f[0] > 1.0:
            violations.append(f"f(0) = {f[0]:g} > 1 = (0 + 1)^a rules out every exponent")
        else:
            with np.errstate(divide="ignore"):
                need = np.log(f[1:]) / np.log(ks[1:] + 1.0)
            alpha_min = float(need.max(initial=0.0))
            if alpha_min >= 1.0:
                i = int(np.argmax(need)) + 1
                violations.append(
                    f"no exponent a in (0, 1) satisfies f(k) <= (k + 1)^a: f({i}) = {f[i]:g} needs a >= {alpha_min:g}"
                )
            else:
                witness = float(min(1.0, alpha_min + (1.0 - alpha_min) / 2.0)) if alpha_min > 0 else None
                if witness is None:
                    # all-ones prefix already flagged above when truly constant
                    witness = 0.5

    return ValidationReport(not violations, tuple(violations), witness_alpha=witness if not violations else None)


def spec_to_dict(spec: AttractionSpec) -> dict:
    """JSON-ready dict; inverse of ``spec_from_dict``."""
    out: dict = {"kind": spec.kind}
    if spec.kind == "alpha_sublinear":
        out["alpha"] = spec.alpha
    if spec.kind == "table":
        out["values"] = list(spec.values)
        out["tail"] = spec.tail
        if spec.alpha is not None:
            out["alpha"] = spec.alpha
    return out


def spec_from_dict(data: dict) -> AttractionSpec:
    """Build a spec from a JSON-style dict, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ValueError(f"attraction spec must be an object, got {type(data).__name__}")
    if "kind" not in data:
        raise ValueError("attraction spec is missing the 'kind' key")
    kind = data["kind"]
    allowed = {
        "uniform": {"kind"},
        "linear": {"kind"},
        "alpha_sublinear": {"kind", "alpha"},
        "table": {"kind", "values", "tail", "alpha"},
    }
    if kind not in allowed:
        raise ValueError(f"unknown attraction kind {kind!r}; expected one of {KINDS}")
    extra = set(data) - allowed[kind]
    if extra:
        raise ValueError(f"unknown keys for {kind} spec: {sorted(extra)}")
    if kind == "uniform":
        return uniform()
    if kind == "linear":
        return linear()
    if kind == "alpha_sublinear":
        if "alpha" not in data:
            raise ValueError("alpha_sublinear spec needs an 'alpha' key")
        return alpha_sublinear(data["alpha"])
    if "values" not in data:
        raise ValueError("table spec needs a 'values' key")
    return table(data["values"], tail=data.get("tail", "constant-last"), alpha=data.get("alpha"))
