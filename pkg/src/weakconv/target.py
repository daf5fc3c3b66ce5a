"""Finite-dimensional target spaces: Banach and Frechet instances.

A target space is R^D equipped with a monotone family of seminorms
p_1 <= p_2 <= ... that clamps at a finite depth.  Banach targets use a
constant single-level family (the norm); Frechet targets use genuinely
increasing families.  Two Frechet families are built in:

* truncated max:   p_n(x) = max_{k <= min(n, D)} |x_k|
* cumulative l1:   p_n(x) = sum_{k <= min(n, D)} |x_k|

The paranorm combines the levels as sum_n 2^-n p_n(x)/(1 + p_n(x)).
Because the levels clamp at the family depth, the geometric tail has a
closed form and the paranorm is evaluated exactly (no series truncation):

    sum_{n<depth} 2^-n phi(p_n(x)) + 2^-(depth-1) phi(p_depth(x)),

with phi(t) = t/(1+t).  Convergence in the paranorm is equivalent to
convergence in every seminorm level, which is what the equivalence
report checks numerically.

A Schauder base is a nonsingular set of D vectors; expansion coefficients
are recovered by a dense LU factorisation with partial pivoting, and the
coordinate functionals are the biorthogonal rows.  Levels and coordinate
functionals are 1-indexed throughout, matching the usual math convention.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .errors import DomainError, UnsupportedError

# relative pivot threshold below which a base matrix counts as singular
_RANK_TOL = 1e-10


# ---------------------------------------------------------------------------
# seminorm families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeminormFamily:
    """Monotone family of seminorms on R^D, clamped at ``depth`` levels.

    ``level_fn(n, X)`` evaluates the (already clamped) level ``n`` on the
    last axis of ``X``.  ``vector_lip_fn(n, L)`` transfers per-coordinate
    Lipschitz constants L_k of a vector function to a Lipschitz constant
    of its level-n seminorm composition; it is what certifies integral
    gap bounds without sampling.
    """

    name: str
    depth: int
    level_fn: Callable[[int, np.ndarray], np.ndarray]
    vector_lip_fn: Callable[[int, np.ndarray], float]
    norm_at_depth: bool = True

    def level(self, n: int, x: np.ndarray) -> np.ndarray:
        if n < 1:
            raise DomainError("seminorm levels are 1-indexed")
        return self.level_fn(min(n, self.depth), np.asarray(x, dtype=float))


def constant_lp_family(dim: int, p) -> SeminormFamily:
    """Single-level family: the lp norm (p in {1, 2, inf})."""
    if p not in (1, 2, np.inf, "inf"):
        raise UnsupportedError(f"unsupported norm exponent {p!r}")
    ord_ = np.inf if p in (np.inf, "inf") else p

    def level(n, x):
        return np.linalg.norm(x, ord=ord_, axis=-1)

    def vlip(n, lips):
        return float(np.linalg.norm(lips, ord=ord_))

    tag = "inf" if ord_ == np.inf else str(int(ord_))
    return SeminormFamily(name=f"lp:{tag}", depth=1, level_fn=level, vector_lip_fn=vlip)


def omega_max_family(dim: int) -> SeminormFamily:
    """Truncated-max levels p_n(x) = max_{k <= min(n, D)} |x_k|."""

    def level(n, x):
        return np.max(np.abs(x[..., :n]), axis=-1)

    def vlip(n, lips):
        return float(np.max(lips[:n]))

    return SeminormFamily(name="omega_max", depth=dim, level_fn=level, vector_lip_fn=vlip)


def cumulative_l1_family(dim: int) -> SeminormFamily:
    """Cumulative-l1 levels p_n(x) = sum_{k <= min(n, D)} |x_k|."""

    def level(n, x):
        return np.sum(np.abs(x[..., :n]), axis=-1)

    def vlip(n, lips):
        return float(np.sum(lips[:n]))

    return SeminormFamily(name="cumulative_l1", depth=dim, level_fn=level, vector_lip_fn=vlip)


_FAMILY_BUILDERS = {
    "lp:1": lambda d: constant_lp_family(d, 1),
    "lp:2": lambda d: constant_lp_family(d, 2),
    "lp:inf": lambda d: constant_lp_family(d, np.inf),
    "omega_max": omega_max_family,
    "cumulative_l1": cumulative_l1_family,
}


# ---------------------------------------------------------------------------
# Schauder bases
# ---------------------------------------------------------------------------


class SchauderBase:
    """D independent vectors with cached LU solve for expansions."""

    def __init__(self, vectors: np.ndarray):
        mat = np.asarray(vectors, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DomainError("a base needs exactly D vectors of dimension D")
        self.matrix = mat.copy()  # column j is base vector x_{j+1}
        with warnings.catch_warnings():
            # singularity is detected below via the pivot magnitudes
            warnings.simplefilter("ignore", LinAlgWarning)
            lu, piv = lu_factor(self.matrix)
        pivots = np.abs(np.diag(lu))
        if pivots.min() < _RANK_TOL * max(pivots.max(), 1e-300):
            raise DomainError("base vectors are numerically dependent")
        self._lu = (lu, piv)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def vector(self, i: int) -> np.ndarray:
        """Base vector x_i (1-indexed)."""
        if not 1 <= i <= self.dim:
            raise DomainError(f"base index {i} out of range")
        return self.matrix[:, i - 1].copy()

    def expand(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DomainError("vector dimension does not match the base")
        return lu_solve(self._lu, x.T).T

    def functional_matrix(self) -> np.ndarray:
        """Rows are the biorthogonal coordinate functionals."""
        return lu_solve(self._lu, np.eye(self.dim))


def coordinate_base(dim: int) -> SchauderBase:
    return SchauderBase(np.eye(dim))


# ---------------------------------------------------------------------------
# target spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TargetSpace:
    """R^D with a seminorm family and an optional Schauder base."""

    kind: str  # "banach" | "frechet"
    dim: int
    family: SeminormFamily
    base: Optional[SchauderBase] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("banach", "frechet"):
            raise DomainError(f"unknown target kind {self.kind!r}")
        if self.kind == "banach" and self.family.depth != 1:
            raise DomainError("banach targets use a single-level family")
        if self.base is not None and self.base.dim != self.dim:
            raise DomainError("base dimension does not match the target")

    def to_json(self) -> dict:
        out = {"kind": self.kind, "dim": self.dim, "family": self.family.name}
        if self.base is None:
            out["base"] = None
        elif np.array_equal(self.base.matrix, np.eye(self.dim)):
            out["base"] = "coordinate"
        else:
            out["base"] = self.base.matrix.T.tolist()
        return out


def seminorm(space: TargetSpace, n: int, x: np.ndarray) -> float:
    """Level-n seminorm p_n(x); levels beyond the family depth repeat."""
    val = space.family.level(n, x)
    return float(val)


def paranorm(space: TargetSpace, x: np.ndarray) -> float:
    """Exact paranorm via the clamped geometric tail (always < 1)."""
    depth = space.family.depth
    x = np.asarray(x, dtype=float)
    total = 0.0
    for n in range(1, depth):
        pn = float(space.family.level_fn(n, x))
        total += 2.0 ** (-n) * pn / (1.0 + pn)
    pd = float(space.family.level_fn(depth, x))
    total += 2.0 ** (-(depth - 1)) * pd / (1.0 + pd)
    return total


def gap_value(space: TargetSpace, v: np.ndarray) -> float:
    """The magnitude the certification machinery assigns to a difference."""
    if space.kind == "banach":
        return seminorm(space, 1, v)
    return paranorm(space, v)


def expand(space: TargetSpace, x: np.ndarray) -> np.ndarray:
    if space.base is None:
        raise UnsupportedError("target has no base; cannot expand")
    return space.base.expand(x)


def coordinate_functional(space: TargetSpace, i: int, x: np.ndarray) -> float:
    """x'_i(x), 1-indexed: the i-th expansion coefficient."""
    coeffs = expand(space, x)
    if not 1 <= i <= space.dim:
        raise DomainError(f"functional index {i} out of range")
    return float(coeffs[i - 1])


def reconstruct(space: TargetSpace, coeffs: np.ndarray) -> np.ndarray:
    if space.base is None:
        raise UnsupportedError("target has no base; cannot reconstruct")
    return space.base.matrix @ np.asarray(coeffs, dtype=float)


# -- built-in instances ------------------------------------------------------


def _resolve_base(dim: int, base) -> Optional[SchauderBase]:
    if base is None:
        return None
    if isinstance(base, SchauderBase):
        return base
    if isinstance(base, str):
        if base == "coordinate":
            return coordinate_base(dim)
        raise DomainError(f"unknown base spec {base!r}")
    return SchauderBase(np.asarray(base, dtype=float).T)


def banach_space(dim: int, p=2, base="coordinate") -> TargetSpace:
    """R^dim with an lp norm (p in {1, 2, inf})."""
    return TargetSpace(kind="banach", dim=dim, family=constant_lp_family(dim, p),
                       base=_resolve_base(dim, base))


def omega_space(dim: int, base="coordinate") -> TargetSpace:
    """Frechet instance with truncated-max levels (a finite slice of omega)."""
    return TargetSpace(kind="frechet", dim=dim, family=omega_max_family(dim),
                       base=_resolve_base(dim, base))


def cumulative_l1_space(dim: int, base="coordinate") -> TargetSpace:
    """Frechet instance with cumulative-l1 levels."""
    return TargetSpace(kind="frechet", dim=dim, family=cumulative_l1_family(dim),
                       base=_resolve_base(dim, base))


def target_from_json(node: dict) -> TargetSpace:
    try:
        kind = node["kind"]
        dim = int(node["dim"])
        family = node["family"]
    except (KeyError, TypeError) as exc:
        raise DomainError(f"bad target spec: {exc}") from exc
    if family not in _FAMILY_BUILDERS:
        raise DomainError(f"unknown seminorm family {family!r}")
    fam = _FAMILY_BUILDERS[family](dim)
    base = _resolve_base(dim, node.get("base", "coordinate"))
    kind_expected = "banach" if fam.depth == 1 else "frechet"
    if kind != kind_expected:
        raise DomainError(f"family {family!r} implies kind {kind_expected!r}")
    return TargetSpace(kind=kind, dim=dim, family=fam, base=base)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParanormAxiomsReport:
    ok: bool
    samples: int
    monotone_levels: bool
    subadditive: bool
    symmetric: bool
    definite: Optional[bool]  # None when definiteness is not claimed
    scalar_limits_ok: bool
    tail_values: tuple
    violations: tuple


def paranorm_axioms_report(space: TargetSpace, samples: int = 1000,
                           seed: int = 0) -> ParanormAxiomsReport:
    """Numerically exercise the paranorm axioms on seeded samples.

    Checked: level monotonicity p_n <= p_{n+1}; zero at the origin;
    positivity off the origin (only when the deepest level is a norm);
    symmetry under negation (exact, since every level uses |x_k|);
    subadditivity; and the two scalar-limit schedules, which must decay
    monotonically below 1e-6 within 40 dyadic steps.
    """
    rng = np.random.default_rng(seed)
    dim = space.dim
    fam = space.family
    violations: list[str] = []

    xs = rng.standard_normal((samples, dim)) * rng.choice([0.1, 1.0, 10.0], size=(samples, 1))
    ys = rng.standard_normal((samples, dim))

    monotone = True
    for n in range(1, fam.depth):
        pn = fam.level_fn(n, xs)
        pn1 = fam.level_fn(n + 1, xs)
        if np.any(pn > pn1 + 1e-12):
            monotone = False
            violations.append(f"level {n} exceeds level {n + 1}")
            break

    para_x = np.array([paranorm(space, x) for x in xs])
    para_neg = np.array([paranorm(space, -x) for x in xs])
    symmetric = bool(np.array_equal(para_x, para_neg))
    if not symmetric:
        violations.append("paranorm changed under negation")

    para_sum = np.array([paranorm(space, x + y) for x, y in zip(xs, ys)])
    para_y = np.array([paranorm(space, y) for y in ys])
    subadditive = bool(np.all(para_sum <= para_x + para_y + 1e-12))
    if not subadditive:
        violations.append("subadditivity violated on a sampled pair")

    definite: Optional[bool] = None
    if fam.norm_at_depth:
        definite = paranorm(space, np.zeros(dim)) == 0.0
        nonzero = xs[np.linalg.norm(xs, axis=1) > 1e-9]
        if nonzero.size and np.any([paranorm(space, x) <= 0 for x in nonzero]):
            definite = False
        if not definite:
            violations.append("definiteness violated")

    # axiom (d): ||alpha_k x|| -> 0 for fixed x, and ||alpha x_k|| -> 0
    # for x_k -> 0; both along the dyadic schedule alpha_k = 2^-k
    ks = np.arange(1, 41)
    scalar_ok = True
    tail = ()
    for x in xs[: min(16, samples)]:
        vals = np.array([paranorm(space, (2.0 ** -k) * x) for k in ks])
        if np.any(np.diff(vals) > 1e-15) or vals[-1] > 1e-6:
            scalar_ok = False
            violations.append("scalar-limit schedule failed to decay")
            break
        tail = tuple(vals[-4:])
    if scalar_ok:
        alpha = 3.7  # arbitrary fixed scalar for the second schedule
        for x in xs[: min(8, samples)]:
            vals = np.array([paranorm(space, alpha * (2.0 ** -k) * x) for k in ks])
            if np.any(np.diff(vals) > 1e-15) or vals[-1] > 1e-6:
                scalar_ok = False
                violations.append("vanishing-vector schedule failed to decay")
                break

    ok = monotone and symmetric and subadditive and scalar_ok and definite is not False
    return ParanormAxiomsReport(ok=ok, samples=samples, monotone_levels=monotone,
                                subadditive=subadditive, symmetric=symmetric,
                                definite=definite, scalar_limits_ok=scalar_ok,
                                tail_values=tail, violations=tuple(violations))


@dataclass(frozen=True)
class BaseCriterionReport:
    passed: bool
    worst_ratio: float
    worst_coeffs: tuple
    worst_pair: tuple  # (m, n)
    samples: int


def base_criterion_report(space: TargetSpace, p_level: int, q_level: int,
                          bound: float = 1.0, samples: int = 1000,
                          seed: int = 0) -> BaseCriterionReport:
    """Check the partial-sum inequality p(S_m) <= M * q(S_n) for m <= n.

    S_m is the m-term partial sum of the base expansion.  Coefficient
    vectors are seeded random draws plus deterministic probes: the
    expansions of the standard unit vectors, which catch near-degenerate
    bases that random sampling can miss.
    """
    if space.base is None:
        raise UnsupportedError("base criterion needs a base")
    rng = np.random.default_rng(seed)
    dim = space.dim
    probes = [space.base.expand(e) for e in np.eye(dim)]
    coeff_sets = list(rng.standard_normal((samples, dim))) + probes

    worst = 0.0
    worst_coeffs: tuple = ()
    worst_pair = (0, 0)
    for alpha in coeff_sets:
        # partials[:, m-1] = sum_{i<=m} alpha_i x_i
        partials = np.cumsum(space.base.matrix * alpha[None, :], axis=1)
        p_vals = np.array([seminorm(space, p_level, partials[:, m]) for m in range(dim)])
        q_vals = np.array([seminorm(space, q_level, partials[:, n]) for n in range(dim)])
        for m in range(dim):
            for n in range(m, dim):
                q = q_vals[n]
                p = p_vals[m]
                ratio = p / q if q > 1e-300 else (0.0 if p <= 1e-300 else np.inf)
                if ratio > worst:
                    worst = float(ratio)
                    worst_coeffs = tuple(float(a) for a in alpha)
                    worst_pair = (m + 1, n + 1)
    return BaseCriterionReport(passed=bool(worst <= bound + 1e-9), worst_ratio=worst,
                               worst_coeffs=worst_coeffs, worst_pair=worst_pair,
                               samples=len(coeff_sets))


@dataclass(frozen=True)
class SequenceRecord:
    paranorm_tail: float
    worst_level_tail: float
    by_paranorm: bool
    by_levels: bool

    @property
    def agree(self) -> bool:
        return self.by_paranorm == self.by_levels


@dataclass(frozen=True)
class ConvergenceEquivalenceReport:
    records: tuple
    all_agree: bool


def convergence_equivalence_report(space: TargetSpace,
                                   sequences: Sequence[tuple],
                                   tol: float = 1e-6) -> ConvergenceEquivalenceReport:
    """Compare the two numeric convergence criteria on vector sequences.

    Each entry is ``(prefix, limit)`` with ``prefix`` an array of iterates.
    Criterion (paranorm): the paranorm of the final residual is below tol.
    Criterion (levels): every seminorm level of the final residual is
    below tol.  The two must agree away from the threshold band; this is
    the executable face of paranorm convergence being equivalent to
    levelwise convergence for monotone clamped families.
    """
    records = []
    for prefix, limit in sequences:
        prefix = np.asarray(prefix, dtype=float)
        limit = np.asarray(limit, dtype=float)
        resid = prefix[-1] - limit
        para_tail = paranorm(space, resid)
        level_tails = [seminorm(space, n, resid) for n in range(1, space.family.depth + 1)]
        worst_level = float(max(level_tails))
        records.append(SequenceRecord(paranorm_tail=para_tail,
                                      worst_level_tail=worst_level,
                                      by_paranorm=bool(para_tail <= tol),
                                      by_levels=bool(worst_level <= tol)))
    return ConvergenceEquivalenceReport(records=tuple(records),
                                        all_agree=all(r.agree for r in records))


@dataclass(frozen=True)
class BaseContinuityProbe:
    ok: bool
    max_final_residual: float
    steps: int


def base_continuity_probe(space: TargetSpace, samples: int = 100,
                          seed: int = 0, steps: int = 40) -> BaseContinuityProbe:
    """Probe continuity of the coordinate functionals along x + 2^-k v.

    In finite dimension the expansion map is linear and bounded, so the
    functional values along a convergent sequence must converge at the
    same dyadic rate; the probe checks the final residual is tiny.
    """
    if space.base is None:
        raise UnsupportedError("continuity probe needs a base")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        x = rng.standard_normal(space.dim)
        v = rng.standard_normal(space.dim)
        base_coeffs = space.base.expand(x)
        final = space.base.expand(x + (2.0 ** -steps) * v)
        worst = max(worst, float(np.max(np.abs(final - base_coeffs))))
    return BaseContinuityProbe(ok=worst <= 1e-9, max_final_residual=worst, steps=steps)
