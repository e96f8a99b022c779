"""Fell bundles over discrete groups with finite-dimensional fibers.

A bundle here is a family of fibers B_t indexed by group elements, each
realized as an ideal of one coefficient block algebra, together with a
bilinear product B_s x B_t -> B_st and an involution B_t -> B_{t^-1}.
Two constructions are provided: the semidirect bundle of a partial action,
with product (a d_s)(b d_t) = gamma_s(gamma_s^-1(a) b) d_st, and its twisted
refinement, whose product picks up the unitary corner multiplier
omega(s, t) on the right:

    (a d_s)(b d_t) = gamma_s(gamma_s^-1(a) b) omega(s, t) d_st
    (a d_t)*       = omega(t^-1, t)* gamma_{t^-1}(a*) d_{t^-1}

Right placement of omega is forced: associativity of this product reduces
exactly to the cocycle law gamma_s(omega(t, u)) omega(s, tu) =
omega(s, t) omega(st, u), while left placement demands an identity the
cocycle conditions do not grant (the difference is invisible for central
twists and fatal for matrix-valued ones). Note also that the product uses
the inverse of the map gamma_s, which for a genuinely twisted family is not
the map attached to s^-1; conflating the two is the classic sign error this
module's validator is designed to catch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .algebra import (
    ActionReport,
    FdAlgebra,
    FdElement,
    Ideal,
    IdealIso,
    PartialAction,
    identity_action,
    op_norm,
)
from .groups import Elem, Group

__all__ = [
    "FellBundle",
    "TwistedBundle",
    "Twist",
    "Section",
    "SubBundle",
    "SpectralAction",
    "make_semidirect",
    "make_twisted",
    "group_bundle",
    "trivial_twist",
    "validate_twist",
    "validate_bundle",
    "fiber_norm",
    "canonical_expectation",
    "central_partial_action",
    "spectral_partial_action",
    "restrict_to_subgroup",
    "full_sub_bundle",
    "subgroup_sub_bundle",
    "mask_sub_bundle",
    "trace_sub_bundle",
]


class FellBundle:
    """Interface shared by all bundle implementations.

    Fibers are ideals of ``coeff_algebra``; a fiber element is an FdElement
    supported on that ideal, tagged externally by its group coordinate.
    """

    group: Group
    coeff_algebra: FdAlgebra

    def fiber_ideal(self, t: Elem) -> Ideal:
        raise NotImplementedError

    def mul(self, s: Elem, a: FdElement, t: Elem, b: FdElement) -> FdElement:
        """Coefficient of (a d_s)(b d_t), an element of the fiber at st."""
        raise NotImplementedError

    def star(self, t: Elem, a: FdElement) -> FdElement:
        """Coefficient of (a d_t)*, an element of the fiber at t^-1."""
        raise NotImplementedError

    def fiber_dim(self, t: Elem) -> int:
        return self.fiber_ideal(t).dim()


def fiber_norm(bundle: FellBundle, t: Elem, a: FdElement) -> float:
    """Norm of a d_t in the bundle; equals the coefficient operator norm."""
    return op_norm(bundle.fiber_ideal(t).project(a))


class Twist:
    """Unitary corner multipliers omega(s, t), lazily evaluated and cached.

    omega(s, t) must be a unitary of the corner ideal A_s n A_st of the
    underlying family; validate_twist checks that together with the cocycle
    laws.
    """

    def __init__(self, fn: Callable[[Elem, Elem], FdElement]):
        self._fn = fn
        self._cache: dict[tuple[Elem, Elem], FdElement] = {}

    def omega(self, s: Elem, t: Elem) -> FdElement:
        key = (s, t)
        got = self._cache.get(key)
        if got is None:
            got = self._fn(s, t)
            self._cache[key] = got
        return got


def trivial_twist(pa: PartialAction) -> Twist:
    """The twist whose every value is the unit of the relevant corner."""

    def fn(s: Elem, t: Elem) -> FdElement:
        g = pa.group
        corner = pa.domain(s).intersect(pa.domain(g.mul(s, t)))
        return corner.unit()

    return Twist(fn)


class TwistedBundle(FellBundle):
    """Semidirect bundle of a (possibly twisted) family of ideal isos.

    With the trivial twist this is the plain semidirect bundle of a partial
    action. The family need not satisfy the untwisted composition law on its
    own; the twist is what repairs it, and validate_twist is the check.
    """

    def __init__(self, family: PartialAction, twist: Twist):
        self.family = family
        self.twist = twist
        self.group = family.group
        self.coeff_algebra = family.algebra

    def fiber_ideal(self, t: Elem) -> Ideal:
        return self.family.domain(t)

    def mul(self, s: Elem, a: FdElement, t: Elem, b: FdElement) -> FdElement:
        iso_s = self.family.iso(s)
        pulled = iso_s.inverse().apply(a)
        return iso_s.apply(pulled * b) * self.twist.omega(s, t)

    def star(self, t: Elem, a: FdElement) -> FdElement:
        g = self.group
        tinv = g.inv(t)
        return self.twist.omega(tinv, t).star() * self.family.iso(tinv).apply(a.star())


def make_semidirect(pa: PartialAction) -> TwistedBundle:
    """The Fell bundle of a partial action, fibers B_t = A_t d_t."""
    return TwistedBundle(pa, trivial_twist(pa))


def make_twisted(family: PartialAction, twist: Twist) -> TwistedBundle:
    return TwistedBundle(family, twist)


def group_bundle(group: Group, algebra: FdAlgebra) -> TwistedBundle:
    """Constant-fiber bundle of a group over one algebra, trivial action."""
    return make_semidirect(identity_action(group, algebra))


def restrict_to_subgroup(bundle: TwistedBundle, member: Callable[[Elem], bool]) -> TwistedBundle:
    """Bundle over the same group with fibers zeroed outside a subgroup.

    ``member`` must pick out a subgroup; products and stars of surviving
    fibers then never leave the subgroup, so the result is a Fell bundle.
    """
    family = bundle.family
    alg = family.algebra
    zero = alg.zero_ideal()
    zero_iso = IdealIso(zero, zero, {}, {})

    def fn(t: Elem) -> IdealIso:
        return family.iso(t) if member(t) else zero_iso

    return TwistedBundle(PartialAction(family.group, alg, fn), bundle.twist)


def validate_twist(
    family: PartialAction,
    twist: Twist,
    window: int = 2,
    tol: float = 1e-10,
) -> ActionReport:
    """Check the twisted partial action conditions on a ball.

    Covered: identity behaviour of the family and the twist, domain
    compatibility gamma_s(A_{s^-1} n A_t) = A_s n A_st, unitarity of each
    omega(s, t) on its corner, the composition law gamma_s gamma_t =
    Ad(omega(s, t)) gamma_st, and the cocycle relation
    gamma_r(a omega(s, t)) omega(r, st) = gamma_r(a) omega(r, s) omega(rs, t).
    """
    g = family.group
    rep = ActionReport()
    ball = g.ball(window)
    e = g.identity

    iso_e = family.iso(e)
    full = family.algebra.full_ideal()
    if iso_e.source.block_set != full.block_set:
        rep.add("identity-domain", "e", float("inf"), tol)
    rep.add("identity-map", "e", iso_e.map_distance(IdealIso.identity_on(full)), tol)

    def corner(s: Elem, t: Elem) -> Ideal:
        return family.domain(s).intersect(family.domain(g.mul(s, t)))

    for t in ball:
        rep.add(
            "twist-unit-left",
            g.format_elem(t),
            op_norm(twist.omega(e, t) - corner(e, t).unit()),
            tol,
        )
        rep.add(
            "twist-unit-right",
            g.format_elem(t),
            op_norm(twist.omega(t, e) - corner(t, e).unit()),
            tol,
        )

    for s in ball:
        iso_s = family.iso(s)
        rep.add("unitarity", g.format_elem(s), iso_s.unitarity_residual(), tol)
        for t in ball:
            st = g.mul(s, t)
            ctx = f"(s={g.format_elem(s)}, t={g.format_elem(t)})"
            om = twist.omega(s, t)
            cn = corner(s, t)
            rep.add(
                "twist-unitary",
                ctx,
                max(
                    op_norm(om.star() * om - cn.unit()),
                    op_norm(om * om.star() - cn.unit()),
                    op_norm(om - cn.project(om)),
                ),
                tol,
            )
            # domain compatibility at the block level
            src = family.domain(g.inv(s)).block_set & family.domain(t).block_set
            image = {family.iso(s).phi[j] for j in src}
            expect = family.domain(s).block_set & family.domain(st).block_set
            if image != expect:
                rep.add("domain-compat", ctx, float("inf"), tol)
                continue
            # composition through the twist
            iso_t = family.iso(t)
            iso_st = family.iso(st)
            dom = family.domain(g.inv(t)).intersect(family.domain(g.inv(st)))
            for x in dom.basis():
                lhs = iso_s.apply(iso_t.apply(x))
                rhs = om * iso_st.apply(x) * om.star()
                rep.add("composition", ctx, op_norm(lhs - rhs), tol)

    for r in ball:
        iso_r = family.iso(r)
        for s in ball:
            for t in ball:
                st = g.mul(s, t)
                rs = g.mul(r, s)
                dom = (
                    family.domain(g.inv(r))
                    .intersect(family.domain(s))
                    .intersect(family.domain(st))
                )
                if not dom.block_set:
                    continue
                om_st = twist.omega(s, t)
                om_r_st = twist.omega(r, st)
                om_rs = twist.omega(r, s)
                om_rst = twist.omega(rs, t)
                ctx = (
                    f"(r={g.format_elem(r)}, s={g.format_elem(s)}, "
                    f"t={g.format_elem(t)})"
                )
                for x in dom.basis():
                    lhs = iso_r.apply(x * om_st) * om_r_st
                    rhs = iso_r.apply(x) * om_rs * om_rst
                    rep.add("cocycle", ctx, op_norm(lhs - rhs), tol)
    return rep


def validate_bundle(
    bundle: FellBundle,
    window: int = 2,
    samples: int = 2,
    seed: int = 0,
    tol: float = 1e-10,
) -> ActionReport:
    """Sampled check of the Fell bundle axioms on a ball.

    Random fiber elements exercise: products landing in the correct fiber,
    associativity, the anti-multiplicative involution, submultiplicativity
    of the norm, the C* identity on each fiber, and positivity of a* a in
    the unit fiber. Structural failures score inf; numerical ones report
    their residual.
    """
    g = bundle.group
    rng = np.random.default_rng(seed)
    rep = ActionReport()
    ball = g.ball(window)
    alg = bundle.coeff_algebra

    def sample(t: Elem) -> FdElement:
        raw = FdElement(
            alg,
            [
                rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
                for d in alg.blocks
            ],
        )
        return bundle.fiber_ideal(t).project(raw)

    for s in ball:
        for t in ball:
            st = g.mul(s, t)
            ctx = f"(s={g.format_elem(s)}, t={g.format_elem(t)})"
            for _ in range(samples):
                a, b = sample(s), sample(t)
                ab = bundle.mul(s, a, t, b)
                if not bundle.fiber_ideal(st).contains(ab, tol):
                    rep.add("fiber-support", ctx, float("inf"), tol)
                rep.add(
                    "submultiplicative",
                    ctx,
                    max(0.0, op_norm(ab) - op_norm(a) * op_norm(b)),
                    tol,
                )
                rep.add(
                    "involution-antihom",
                    ctx,
                    op_norm(
                        bundle.star(st, ab)
                        - bundle.mul(g.inv(t), bundle.star(t, b), g.inv(s), bundle.star(s, a))
                    ),
                    tol,
                )
            u = g.mul(s, t)
            for _ in range(samples):
                a, b, c = sample(s), sample(t), sample(u)
                left = bundle.mul(g.mul(s, t), bundle.mul(s, a, t, b), u, c)
                right = bundle.mul(s, a, g.mul(t, u), bundle.mul(t, b, u, c))
                rep.add("associativity", ctx, op_norm(left - right), tol)

    for t in ball:
        tinv = g.inv(t)
        for _ in range(samples):
            a = sample(t)
            rep.add(
                "involutive",
                g.format_elem(t),
                op_norm(bundle.star(tinv, bundle.star(t, a)) - a),
                tol,
            )
            aa = bundle.mul(tinv, bundle.star(t, a), t, a)
            rep.add(
                "cstar-identity",
                g.format_elem(t),
                abs(op_norm(aa) - op_norm(a) ** 2),
                max(tol, tol * op_norm(a) ** 2),
            )
            if not bundle.fiber_ideal(g.identity).contains(aa, tol):
                rep.add("positivity-support", g.format_elem(t), float("inf"), tol)
            wmin = min(
                (float(np.linalg.eigvalsh(m).min()) for m in aa.mats if m.size),
                default=0.0,
            )
            rep.add("positivity", g.format_elem(t), max(0.0, -wmin), tol)
    return rep


class Section:
    """Finitely supported section of a bundle: one coefficient per element.

    Entries are expected to lie in their fibers; nothing is projected
    silently. Convolution is the algebraic crossed-product multiplication.
    """

    __slots__ = ("bundle", "data")

    def __init__(self, bundle: FellBundle, data: Mapping[Elem, FdElement]):
        self.bundle = bundle
        self.data = dict(data)

    @staticmethod
    def zero(bundle: FellBundle) -> "Section":
        return Section(bundle, {})

    @staticmethod
    def delta(bundle: FellBundle, t: Elem, a: FdElement) -> "Section":
        return Section(bundle, {t: a})

    def value(self, t: Elem) -> FdElement:
        got = self.data.get(t)
        return got if got is not None else self.bundle.coeff_algebra.zero()

    def support(self) -> list[Elem]:
        return list(self.data.keys())

    def __add__(self, other: "Section") -> "Section":
        data = dict(self.data)
        for t, a in other.data.items():
            data[t] = data[t] + a if t in data else a
        return Section(self.bundle, data)

    def __sub__(self, other: "Section") -> "Section":
        return self + (-1.0) * other

    def __rmul__(self, scalar) -> "Section":
        return Section(self.bundle, {t: complex(scalar) * a for t, a in self.data.items()})

    def conv(self, other: "Section") -> "Section":
        g = self.bundle.group
        acc: dict[Elem, FdElement] = {}
        for s, a in self.data.items():
            for t, b in other.data.items():
                r = g.mul(s, t)
                term = self.bundle.mul(s, a, t, b)
                acc[r] = acc[r] + term if r in acc else term
        return Section(self.bundle, acc)

    def star(self) -> "Section":
        g = self.bundle.group
        return Section(
            self.bundle, {g.inv(t): self.bundle.star(t, a) for t, a in self.data.items()}
        )

    def right_mul(self, b: FdElement) -> "Section":
        """Right action of a unit-fiber element: (f b)(t) = f(t) b."""
        g = self.bundle.group
        e = g.identity
        return Section(
            self.bundle,
            {t: self.bundle.mul(t, a, e, b) for t, a in self.data.items()},
        )

    def inner(self, other: "Section") -> FdElement:
        """Unit-fiber valued inner product, sum of f(t)* g(t) in the bundle."""
        g = self.bundle.group
        out = self.bundle.coeff_algebra.zero()
        for t, a in self.data.items():
            b = other.data.get(t)
            if b is None:
                continue
            out = out + self.bundle.mul(g.inv(t), self.bundle.star(t, a), t, b)
        return out

    def sup_norm(self) -> float:
        return max((op_norm(a) for a in self.data.values()), default=0.0)


def canonical_expectation(f: Section) -> FdElement:
    """Coefficient at the identity, the usual expectation onto B_e."""
    return f.value(f.bundle.group.identity)


@dataclass
class SubBundle:
    """A sub-Fell-bundle given by a fiberwise conditional expectation.

    ``project`` must be idempotent, contractive, and a bimodule map over the
    surviving fibers; the standard examples below all qualify.
    """

    bundle: FellBundle
    member: Callable[[Elem], bool]
    project: Callable[[Elem, FdElement], FdElement]

    def expect(self, t: Elem, a: FdElement) -> FdElement:
        if not self.member(t):
            return self.bundle.coeff_algebra.zero()
        return self.project(t, a)


def full_sub_bundle(bundle: FellBundle) -> SubBundle:
    return SubBundle(bundle, lambda t: True, lambda t, a: a)


def subgroup_sub_bundle(bundle: FellBundle, member: Callable[[Elem], bool]) -> SubBundle:
    """Fibers over a subgroup survive whole; everything else dies."""
    return SubBundle(bundle, member, lambda t, a: a)


def mask_sub_bundle(bundle: FellBundle, masks: list[np.ndarray]) -> SubBundle:
    """Entrywise mask expectation, e.g. onto block-diagonal subalgebras.

    ``masks`` holds one 0/1 matrix per coefficient block; the mask pattern
    must be closed under multiplication and contain the diagonal for the
    compression to be a conditional expectation.
    """

    def project(t: Elem, a: FdElement) -> FdElement:
        return FdElement(a.algebra, [m * w for m, w in zip(a.mats, masks)])

    return SubBundle(bundle, lambda t: True, project)


def trace_sub_bundle(bundle: FellBundle, member: Callable[[Elem], bool]) -> SubBundle:
    """Normalized-trace expectation onto scalars in each surviving fiber."""

    def project(t: Elem, a: FdElement) -> FdElement:
        mats = []
        for m in a.mats:
            d = m.shape[0]
            mats.append(np.trace(m) / d * np.eye(d, dtype=complex) if d else m)
        return FdElement(a.algebra, mats)

    return SubBundle(bundle, member, project)


# ---------------------------------------------------------------------------
# Actions recovered from a bundle.
# ---------------------------------------------------------------------------


def _generated_ideal_blocks(bundle: FellBundle, t: Elem) -> frozenset[int]:
    """Blocks of the ideal spanned by B_t B_t* inside the unit fiber."""
    g = bundle.group
    tinv = g.inv(t)
    blocks: set[int] = set()
    basis = bundle.fiber_ideal(t).basis()
    for a in basis:
        prod = bundle.mul(t, a, tinv, bundle.star(t, a))
        for j, m in enumerate(prod.mats):
            if np.abs(m).max(initial=0.0) > 1e-12:
                blocks.add(j)
    return frozenset(blocks)


def central_partial_action(
    bundle: FellBundle, window: int = 2, tol: float = 1e-9
) -> PartialAction:
    """Partial action on the center of the unit fiber induced by the bundle.

    The ideal I_t is generated by B_t B_t*; the map sends a central z of
    I_{t^-1} to the unique central element z' of I_t with m z = z' m for all
    m in B_t. On block algebras both centers are spanned by block units and
    the map is a block permutation, recovered here by least squares with a
    residual gate.
    """
    g = bundle.group
    alg = bundle.coeff_algebra
    z_alg = FdAlgebra([1] * alg.nblocks)
    e = g.identity

    def solve(t: Elem) -> IdealIso:
        if t == e:
            return IdealIso.identity_on(z_alg.full_ideal())
        src = sorted(_generated_ideal_blocks(bundle, g.inv(t)))
        tgt = sorted(_generated_ideal_blocks(bundle, t))
        fiber_basis = bundle.fiber_ideal(t).basis()
        phi: dict[int, int] = {}
        for j in src:
            p_j = alg.zero()
            p_j.mats[j] = np.eye(alg.blocks[j], dtype=complex)
            rhs = np.concatenate([bundle.mul(t, m, e, p_j).flat() for m in fiber_basis])
            cols = []
            for k in tgt:
                p_k = alg.zero()
                p_k.mats[k] = np.eye(alg.blocks[k], dtype=complex)
                cols.append(
                    np.concatenate([bundle.mul(e, p_k, t, m).flat() for m in fiber_basis])
                )
            mat = np.stack(cols, axis=1)
            c, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
            resid = float(np.linalg.norm(mat @ c - rhs))
            if resid > tol:
                raise ArithmeticError(
                    f"no central intertwiner at {g.format_elem(t)} block {j}: "
                    f"residual {resid:.3e}"
                )
            hits = [k for k, ck in zip(tgt, c) if abs(ck) > 0.5]
            if len(hits) != 1 or abs(c[tgt.index(hits[0])] - 1.0) > 1e-6:
                raise ArithmeticError(
                    f"central action at {g.format_elem(t)} is not a block permutation"
                )
            phi[j] = hits[0]
        unis = {j: np.ones((1, 1), dtype=complex) for j in phi}
        return IdealIso(
            Ideal(z_alg, phi.keys()), Ideal(z_alg, phi.values()), phi, unis
        )

    return PartialAction(g, z_alg, solve)


@dataclass
class SpectralAction:
    """Partial bijections of the finite spectrum of a commutative unit fiber."""

    group: Group
    npoints: int
    action: PartialAction

    def domain(self, t: Elem) -> frozenset[int]:
        """Points on which t^-1 ... t moves: the source of theta_t."""
        return frozenset(self.action.iso(t).phi.keys())

    def theta(self, t: Elem) -> dict[int, int]:
        return dict(self.action.iso(t).phi)


def spectral_partial_action(bundle: FellBundle, window: int = 2) -> SpectralAction:
    """Point-level partial action on the spectrum of a commutative B_e.

    Each block of the coefficient algebra must be one-dimensional; the
    underlying function moves are exactly the central block permutations.
    """
    alg = bundle.coeff_algebra
    if any(d != 1 for d in alg.blocks):
        raise ValueError("spectral action needs a commutative unit fiber")
    central = central_partial_action(bundle, window)
    return SpectralAction(bundle.group, alg.nblocks, central)
