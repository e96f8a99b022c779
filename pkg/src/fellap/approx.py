"""Approximation-property witnesses, defects, and convexification.

A witness is a finitely supported map from the group into the unit fiber.
Its quality is measured two ways: the bound ``|sum_r a(r)* a(r)|`` must stay
capped along a family, and for each target b in the fiber over t the defect

    | b - sum_r a(tr)* b a(r) |

must become small.  ``convexify`` implements the translate-and-mix step that
turns a family of witnesses with convex weights into a single witness whose
inner product and defect sums split exactly over the inputs; the split is an
algebraic consequence of support disjointness, so its residuals double as a
certificate that the chosen translates really are disjoint.

Norm convergence is the only mode certified here.  Weak-topology variants
are documented as out of scope: a norm-small defect implies the weak one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .algebra import FdElement, PartialAction, op_norm
from .bundles import FellBundle, fiber_norm
from .groups import Elem, Group, LatticeGroup, UnsupportedGroupError


class TranslateSearchError(RuntimeError):
    """No disjoint translate found inside the search ball."""


class APWitness:
    """Finitely supported map from the group into the unit fiber."""

    __slots__ = ("bundle", "data")

    def __init__(self, bundle: FellBundle, data: Mapping[Elem, FdElement]):
        alg = bundle.coeff_algebra
        clean: Dict[Elem, FdElement] = {}
        for r, a in data.items():
            bundle.group.check(r)
            if a.algebra is not alg:
                raise ValueError("witness value from a foreign algebra")
            if any(np.abs(m).max(initial=0.0) > 0.0 for m in a.mats):
                clean[r] = a
        self.bundle = bundle
        self.data = clean

    @staticmethod
    def zero(bundle: FellBundle) -> "APWitness":
        return APWitness(bundle, {})

    def value(self, r: Elem) -> FdElement:
        got = self.data.get(r)
        return got if got is not None else self.bundle.coeff_algebra.zero()

    def support(self) -> List[Elem]:
        return list(self.data.keys())

    def translated(self, r: Elem) -> "APWitness":
        """Right translate s -> a(s r^{-1})."""
        g = self.bundle.group
        return APWitness(self.bundle, {g.mul(s, r): a for s, a in self.data.items()})

    def scaled(self, lam: complex) -> "APWitness":
        return APWitness(self.bundle, {s: lam * a for s, a in self.data.items()})

    def merged(self, other: "APWitness") -> "APWitness":
        data = dict(self.data)
        for s, a in other.data.items():
            data[s] = data[s] + a if s in data else a
        return APWitness(self.bundle, data)


def witness_gram(a: APWitness) -> FdElement:
    """The unit-fiber element sum_r a(r)* a(r)."""
    total = a.bundle.coeff_algebra.zero()
    for v in a.data.values():
        total = total + v.star() * v
    return total


def witness_bound(a: APWitness) -> float:
    return op_norm(witness_gram(a))


def defect_sum(a: APWitness, t: Elem, b: FdElement) -> FdElement:
    """sum_r a(tr)* b a(r), evaluated in the bundle; lies in the fiber over t."""
    bundle = a.bundle
    g = bundle.group
    e = g.identity
    total = bundle.coeff_algebra.zero()
    for r, ar in a.data.items():
        left = a.data.get(g.mul(t, r))
        if left is None:
            continue
        mid = bundle.mul(e, left.star(), t, b)
        total = total + bundle.mul(t, mid, e, ar)
    return total


def ap_defect(a: APWitness, t: Elem, b: FdElement) -> float:
    """Defect | b - sum_r a(tr)* b a(r) | of the witness at one target."""
    bundle = a.bundle
    if not bundle.fiber_ideal(t).contains(b, tol=1e-9):
        raise ValueError("target lies outside the fiber over t")
    return fiber_norm(bundle, t, b - defect_sum(a, t, b))


def ap_defect_partial(
    pa: PartialAction,
    witness: Union[APWitness, Mapping[Elem, FdElement]],
    t: Elem,
    b: FdElement,
) -> float:
    """Defect evaluated through the partial action alone.

    Computes | b - sum_s a(ts)* alpha_t(alpha_{t^-1}(b) a(s)) | with plain
    algebra products; no bundle structure is touched, so the value serves
    as an independent route against ap_defect over the semidirect bundle.
    """
    data = witness.data if isinstance(witness, APWitness) else dict(witness)
    g = pa.group
    if not pa.domain(t).contains(b, tol=1e-9):
        raise ValueError("target lies outside the domain ideal at t")
    pulled = pa.apply(g.inv(t), b)
    total = pa.algebra.zero()
    for s, a_s in data.items():
        left = data.get(g.mul(t, s))
        if left is None:
            continue
        total = total + left.star() * pa.apply(t, pulled * a_s)
    return op_norm(b - total)


def _box(group: LatticeGroup, n: int) -> List[Elem]:
    if n < 1:
        raise ValueError("box side must be at least 1")
    coords = [()]
    for _ in range(group.dim):
        coords = [c + (i,) for c in coords for i in range(n)]
    return [group.vector(c) for c in coords]


def folner_witness(bundle: FellBundle, n: int = 1) -> APWitness:
    """Normalized indicator witness over a Folner-style set.

    Finite groups use the whole group; lattices use the box {0..n-1}^d.
    Free groups are rejected: no Folner sets exist there, use the witness
    nets built from the boundary action instead.
    """
    g = bundle.group
    if g.is_finite:
        window = list(g.elements())
    elif isinstance(g, LatticeGroup):
        window = _box(g, n)
    else:
        raise UnsupportedGroupError(
            f"no Folner witness for {g.label}; use boundary-action witnesses"
        )
    scale = 1.0 / np.sqrt(len(window))
    one = bundle.coeff_algebra.one()
    return APWitness(bundle, {r: scale * one for r in window})


def uniform_witness(bundle: FellBundle) -> APWitness:
    """Whole-group normalized unit witness; finite groups only."""
    if not bundle.group.is_finite:
        raise UnsupportedGroupError("uniform witness needs a finite group")
    return folner_witness(bundle)


@dataclass(frozen=True)
class Target:
    t: Elem
    b: FdElement
    label: str


def default_targets(bundle: FellBundle, radius: int = 1, max_per_fiber: int = 0) -> List[Target]:
    """Basis targets of every nonzero fiber over the ball of the given radius."""
    out: List[Target] = []
    g = bundle.group
    for t in g.ball(radius):
        basis = bundle.fiber_ideal(t).basis()
        if max_per_fiber > 0:
            basis = basis[:max_per_fiber]
        for i, b in enumerate(basis):
            out.append(Target(t, b, f"{g.format_elem(t)}#b{i}"))
    return out


@dataclass(frozen=True)
class ConvexCertificate:
    """Record of a successful convexification.

    The two residuals are exact-zero identities granted by translate
    disjointness; anything visibly nonzero means the translates overlap.
    """

    translates: Tuple[Elem, ...]
    gram_residual: float
    defect_residuals: Tuple[float, ...]
    bound: float


def convexify(
    witnesses: Sequence[Tuple[APWitness, float]],
    targets: Sequence[Target],
    search_radius: int = 4,
) -> Tuple[APWitness, ConvexCertificate]:
    """Mix witnesses with convex weights after moving them apart.

    The combined support set F and its translates by the target inverses
    form F'; the greedy scan walks the deterministic ball order and keeps
    the first translates r_k making the sets F' r_k pairwise disjoint.
    The returned witness is s -> sum_k sqrt(lambda_k) a_k(s r_k^{-1}).

    Raises TranslateSearchError when the ball is exhausted; retry with a
    larger radius.  Finite groups are rejected: there is no room to move.
    """
    if not witnesses:
        raise ValueError("need at least one witness")
    bundle = witnesses[0][0].bundle
    g = bundle.group
    if g.is_finite:
        raise UnsupportedGroupError("convexification needs an infinite group")
    lams = [float(lam) for _, lam in witnesses]
    if any(lam < 0 for lam in lams) or sum(lams) > 1.0 + 1e-12:
        raise ValueError("weights must be nonnegative with sum at most 1")
    for a, _ in witnesses:
        if a.bundle is not bundle:
            raise ValueError("witnesses live over different bundles")

    support: set = set()
    for a, _ in witnesses:
        support.update(a.data.keys())
    fprime = set(support)
    for tgt in targets:
        tinv = g.inv(tgt.t)
        fprime.update(g.mul(tinv, s) for s in support)

    chosen: List[Elem] = []
    occupied: set = set()
    for r in g.ball(search_radius):
        moved = {g.mul(s, r) for s in fprime}
        if moved & occupied:
            continue
        chosen.append(r)
        occupied |= moved
        if len(chosen) == len(witnesses):
            break
    if len(chosen) < len(witnesses):
        raise TranslateSearchError(
            f"found {len(chosen)} of {len(witnesses)} disjoint translates "
            f"within radius {search_radius}"
        )

    mixed = APWitness.zero(bundle)
    for (a, lam), r in zip(witnesses, chosen):
        mixed = mixed.merged(a.scaled(np.sqrt(lam)).translated(r))

    gram_target = bundle.coeff_algebra.zero()
    for (a, lam) in witnesses:
        gram_target = gram_target + lam * witness_gram(a)
    gram_res = op_norm(witness_gram(mixed) - gram_target)
    defect_res = []
    for tgt in targets:
        want = bundle.coeff_algebra.zero()
        for (a, lam) in witnesses:
            want = want + lam * defect_sum(a, tgt.t, tgt.b)
        defect_res.append(fiber_norm(bundle, tgt.t, defect_sum(mixed, tgt.t, tgt.b) - want))
    cert = ConvexCertificate(
        translates=tuple(chosen),
        gram_residual=gram_res,
        defect_residuals=tuple(defect_res),
        bound=witness_bound(mixed),
    )
    return mixed, cert


@dataclass(frozen=True)
class APRow:
    index: int
    t_label: str
    target_label: str
    bound: float
    defect: float


@dataclass(frozen=True)
class APReport:
    """Defect table for one witness: its bound plus one row per target."""

    bound: float
    rows: Tuple[Tuple[str, str, float], ...]


def ap_report(a: APWitness, targets: Sequence[Target]) -> APReport:
    g = a.bundle.group
    bound = witness_bound(a)
    rows = tuple(
        (g.format_elem(tgt.t), tgt.label, ap_defect(a, tgt.t, tgt.b)) for tgt in targets
    )
    return APReport(bound=bound, rows=rows)


@dataclass(frozen=True)
class APVerdict:
    rows: Tuple[APRow, ...]
    passed: bool
    tolerance: float
    bound_cap: float

    def final_defects(self) -> Dict[str, float]:
        last = max((r.index for r in self.rows), default=-1)
        return {r.target_label: r.defect for r in self.rows if r.index == last}


def ap_certify(
    bundle: FellBundle,
    witness_family: Sequence[APWitness],
    targets: Optional[Sequence[Target]] = None,
    tolerance: float = 1e-8,
    bound_cap: float = 1.0 + 1e-8,
) -> APVerdict:
    """Evaluate a witness family against targets and give a verdict.

    Emits the full defect trace, one row per (witness index, target); the
    verdict passes when every bound stays at or below the cap and the last
    witness meets the tolerance on every target.  No extrapolation: only
    the computed values speak.
    """
    if targets is None:
        targets = default_targets(bundle)
    g = bundle.group
    rows: List[APRow] = []
    bounds_ok = True
    for i, a in enumerate(witness_family):
        bound = witness_bound(a)
        bounds_ok = bounds_ok and bound <= bound_cap
        for tgt in targets:
            rows.append(
                APRow(
                    index=i,
                    t_label=g.format_elem(tgt.t),
                    target_label=tgt.label,
                    bound=bound,
                    defect=ap_defect(a, tgt.t, tgt.b),
                )
            )
    last = len(witness_family) - 1
    final_ok = last >= 0 and all(
        r.defect <= tolerance for r in rows if r.index == last
    )
    return APVerdict(
        rows=tuple(rows),
        passed=bool(bounds_ok and final_ok),
        tolerance=tolerance,
        bound_cap=bound_cap,
    )


def fit_weights(
    witnesses: Sequence[APWitness], targets: Sequence[Target]
) -> np.ndarray:
    """Heuristic convex weights by least squares; no optimality claimed.

    Stacks the defect sums of each witness at each target and solves for
    the weight vector bringing the mix closest to the targets, then clips
    to the simplex.  Useful as plumbing when no principled weights exist.
    """
    if not witnesses:
        return np.zeros(0)
    cols = []
    rhs = []
    for tgt in targets:
        rhs.append(tgt.b.flat())
    rhs_vec = np.concatenate(rhs) if rhs else np.zeros(0, dtype=complex)
    for a in witnesses:
        parts = [defect_sum(a, tgt.t, tgt.b).flat() for tgt in targets]
        cols.append(np.concatenate(parts) if parts else np.zeros(0, dtype=complex))
    mat = np.stack(cols, axis=1)
    lam, *_ = np.linalg.lstsq(mat, rhs_vec, rcond=None)
    lam = np.clip(lam.real, 0.0, None)
    total = lam.sum()
    if total > 1.0:
        lam = lam / total
    return lam
