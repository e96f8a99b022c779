"""Bundle products, twists, sections, sub-bundle expectations, and the
actions a bundle induces on the center and spectrum of its unit fiber.

Frozen oracle facts, computed by hand first:

* Translation of Z3 on C^3, semidirect product: with a = (1,2,3) at 1 and
  b = (4,5,6) at 1, the product coefficient is (6,8,15) at 2, and the
  adjoint of a d_1 has coefficient (2,3,1) at 2.
* Z2 with the sign twist omega(1,1) = -1 on C: (1 d_1)(1 d_1) = -1 d_0.
* The scalar twist omega(1,1) = i over Z2 satisfies the cocycle law (it is
  the coboundary of b(1) = exp(i pi/4)); the same assignment over Z3 fails
  it at (r, s, t) = (1, 1, 2).
* For a semidirect bundle the central action's block permutation at t is
  exactly the block permutation of the underlying partial action at t.
"""

from __future__ import annotations

import numpy as np
import pytest

from fellap.algebra import (
    FdAlgebra,
    FdElement,
    Ideal,
    PartialAction,
    identity_action,
    op_norm,
    restrict_action,
    translation_action,
    unit_identity_residual,
)
from fellap.bundles import (
    Section,
    Twist,
    TwistedBundle,
    canonical_expectation,
    central_partial_action,
    fiber_norm,
    group_bundle,
    make_semidirect,
    make_twisted,
    mask_sub_bundle,
    restrict_to_subgroup,
    spectral_partial_action,
    subgroup_sub_bundle,
    trace_sub_bundle,
    validate_bundle,
    validate_twist,
)
from fellap.groups import FreeGroup, LatticeGroup, cyclic_group
from fellap.testing import (
    matrix_twist,
    random_element,
    random_fell_bundle,
    random_global_action,
    random_infinite_partial_action,
    random_partial_action,
    random_section,
    scalar_coboundary_twist,
)

TOL = 1e-10


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def scalar_twist_on(group, values: dict[tuple[int, int], complex]) -> tuple[PartialAction, Twist]:
    """Identity family on C with prescribed scalar twist values (default 1)."""
    pa = identity_action(group, FdAlgebra([1]))

    def fn(s, t):
        w = values.get((s.data, t.data), 1.0)
        return pa.algebra.element([np.array([[w]], dtype=complex)])

    return pa, Twist(fn)


class TestSemidirectProducts:
    def test_cyclic_shift_product_oracle(self):
        z3 = cyclic_group(3)
        bundle = make_semidirect(translation_action(z3, FdAlgebra([1])))
        alg = bundle.coeff_algebra

        def vec(*vals):
            return alg.element([np.array([[v]], dtype=complex) for v in vals])

        a, b = vec(1, 2, 3), vec(4, 5, 6)
        t1 = z3.elem(1)
        prod = bundle.mul(t1, a, t1, b)
        assert op_norm(prod - vec(6, 8, 15)) <= 1e-14
        adj = bundle.star(t1, a)
        assert op_norm(adj - vec(2, 3, 1)) <= 1e-14

    def test_sign_twist_oracle(self):
        z2 = cyclic_group(2)
        pa, twist = scalar_twist_on(z2, {(1, 1): -1.0})
        assert validate_twist(pa, twist).passed
        bundle = make_twisted(pa, twist)
        one = pa.algebra.one()
        g1 = z2.elem(1)
        prod = bundle.mul(g1, one, g1, one)
        assert op_norm(prod + one) <= 1e-14  # equals -1 at the identity fiber

    def test_fiber_norm_is_coefficient_norm(self):
        pa = random_partial_action(rng_for(1))
        bundle = make_semidirect(pa)
        t = pa.group.elem(1 % pa.group.order)
        a = bundle.fiber_ideal(t).project(random_element(rng_for(2), pa.algebra))
        assert fiber_norm(bundle, t, a) == pytest.approx(op_norm(a), abs=1e-14)


class TestTwistValidation:
    def test_i_twist_over_z2_passes(self):
        pa, twist = scalar_twist_on(cyclic_group(2), {(1, 1): 1j})
        rep = validate_twist(pa, twist)
        assert rep.passed, rep.render()

    def test_i_twist_over_z3_fails_cocycle(self):
        pa, twist = scalar_twist_on(cyclic_group(3), {(1, 1): 1j})
        rep = validate_twist(pa, twist)
        assert not rep.passed
        axioms = {a for a, _, _ in rep.rows}
        assert axioms == {"cocycle"}
        contexts = {ctx for a, ctx, _ in rep.rows}
        assert "(r=1, s=1, t=2)" in contexts

    def test_scalar_coboundaries_pass(self):
        for seed in range(3):
            pa = random_partial_action(rng_for(seed))
            twist = scalar_coboundary_twist(pa, salt=seed)
            assert validate_twist(pa, twist).passed

    def test_matrix_twists_pass(self):
        for seed in (5, 6):
            glob = random_global_action(rng_for(seed))
            family, twist = matrix_twist(glob, salt=seed)
            rep = validate_twist(family, twist)
            assert rep.passed, rep.render()

    def test_matrix_family_with_trivial_twist_fails(self):
        glob = random_global_action(rng_for(7), cyclic_group(3), [2])
        family, _ = matrix_twist(glob, salt=7)
        from fellap.bundles import trivial_twist

        rep = validate_twist(family, trivial_twist(family))
        assert not rep.passed
        assert "composition" in {a for a, _, _ in rep.rows}

    def test_corrupted_twist_unitary_flagged(self):
        pa = random_global_action(rng_for(8), cyclic_group(3))
        good = scalar_coboundary_twist(pa, salt=8)

        def fn(s, t):
            w = good.omega(s, t)
            if s.data == 1 and t.data == 1:
                return 1.1 * w
            return w

        rep = validate_twist(pa, Twist(fn))
        assert not rep.passed
        assert "twist-unitary" in {a for a, _, _ in rep.rows}


class _WrongInverseBundle(TwistedBundle):
    """Deliberately wrong twisted product: pulls a back along the map at
    s^-1 instead of the inverse of the map at s."""

    def mul(self, s, a, t, b):
        g = self.group
        pulled = self.family.iso(g.inv(s)).apply(a)
        return self.twist.omega(s, t) * self.family.iso(s).apply(pulled * b)


class TestBundleValidation:
    def test_random_bundles_pass(self):
        for seed in range(10):
            bundle, label = random_fell_bundle(rng_for(seed))
            window = 2 if bundle.group.is_finite else 1
            rep = validate_bundle(bundle, window=window, samples=2, seed=seed)
            assert rep.passed, f"{label}: {rep.render()}"

    def test_wrong_inverse_convention_is_caught(self):
        glob = random_global_action(rng_for(11), cyclic_group(3), [2])
        family, twist = matrix_twist(glob, salt=11)
        good = make_twisted(family, twist)
        assert validate_bundle(good, window=2, seed=1).passed
        bad = _WrongInverseBundle(family, twist)
        rep = validate_bundle(bad, window=2, seed=1)
        assert not rep.passed
        assert rep.max_residual > 1e-6

    def test_scaled_product_breaks_associativity(self):
        pa = random_partial_action(rng_for(12), cyclic_group(3))
        base = make_semidirect(pa)

        class Scaled(TwistedBundle):
            def mul(self, s, a, t, b):
                out = TwistedBundle.mul(self, s, a, t, b)
                return 1.01 * out if s.data == 1 else out

        rep = validate_bundle(Scaled(pa, base.twist), window=2, seed=2)
        assert not rep.passed
        axioms = {a for a, _, _ in rep.rows}
        assert axioms & {"associativity", "involution-antihom", "cstar-identity"}

    def test_group_bundle_over_free_group(self):
        bundle = group_bundle(FreeGroup(2), FdAlgebra([2]))
        rep = validate_bundle(bundle, window=1, samples=1, seed=3)
        assert rep.passed

    def test_subgroup_restriction(self):
        z4 = cyclic_group(4)
        bundle = group_bundle(z4, FdAlgebra([2]))
        sub = restrict_to_subgroup(bundle, lambda t: t.data % 2 == 0)
        assert validate_bundle(sub, window=2, samples=2, seed=4).passed
        assert sub.fiber_ideal(z4.elem(1)).block_set == frozenset()
        assert sub.fiber_ideal(z4.elem(2)).block_set == frozenset({0})


class TestSections:
    def test_conv_against_manual_sum(self):
        rng = rng_for(20)
        bundle, _ = random_fell_bundle(rng, cyclic_group(4), "semidirect")
        g = bundle.group
        f = random_section(rng, bundle, g.elements())
        h = random_section(rng, bundle, g.elements())
        prod = f.conv(h)
        for r in g.elements():
            manual = bundle.coeff_algebra.zero()
            for s in g.elements():
                t = g.mul(g.inv(s), r)
                manual = manual + bundle.mul(s, f.value(s), t, h.value(t))
            assert op_norm(prod.value(r) - manual) <= 1e-12

    def test_star_is_involutive(self):
        rng = rng_for(21)
        bundle, _ = random_fell_bundle(rng, cyclic_group(3), "matrix-twist")
        f = random_section(rng, bundle, bundle.group.elements())
        assert (f.star().star() - f).sup_norm() <= 1e-12

    def test_expectation_of_star_conv_is_inner(self):
        rng = rng_for(22)
        for flavor in ("semidirect", "scalar-twist", "matrix-twist"):
            bundle, _ = random_fell_bundle(rng, cyclic_group(4), flavor)
            f = random_section(rng, bundle, bundle.group.elements())
            lhs = canonical_expectation(f.star().conv(f))
            rhs = f.inner(f)
            assert op_norm(lhs - rhs) <= 1e-12
            evs = [w for m in rhs.mats if m.size for w in np.linalg.eigvalsh(m)]
            assert min(evs, default=0.0) >= -1e-12

    def test_section_arithmetic(self):
        rng = rng_for(23)
        bundle, _ = random_fell_bundle(rng, cyclic_group(3), "semidirect")
        f = random_section(rng, bundle, bundle.group.elements())
        g2 = 2.0 * f
        assert (g2 - f - f).sup_norm() <= 1e-13
        assert Section.zero(bundle).sup_norm() == 0.0


class TestSubBundles:
    def test_fiberwise_expectations_are_contractive_idempotent(self):
        rng = rng_for(30)
        z2 = cyclic_group(2)
        bundle = group_bundle(z2, FdAlgebra([2, 1]))
        subs = [
            subgroup_sub_bundle(bundle, lambda t: t.data == 0),
            mask_sub_bundle(
                bundle, [np.eye(2), np.eye(1)]
            ),
            trace_sub_bundle(bundle, lambda t: True),
        ]
        for sub in subs:
            for t in z2.elements():
                a = bundle.fiber_ideal(t).project(
                    random_element(rng, bundle.coeff_algebra)
                )
                ea = sub.expect(t, a)
                assert op_norm(ea) <= op_norm(a) + 1e-12
                assert op_norm(sub.expect(t, ea) - ea) <= 1e-12

    def test_mask_expectation_is_bimodular(self):
        rng = rng_for(31)
        z3 = cyclic_group(3)
        bundle = group_bundle(z3, FdAlgebra([2]))
        sub = mask_sub_bundle(bundle, [np.eye(2)])
        g = bundle.group
        s, t, u = (z3.elem(k) for k in (1, 2, 0))
        a = bundle.fiber_ideal(t).project(random_element(rng, bundle.coeff_algebra))
        n1 = sub.expect(s, random_element(rng, bundle.coeff_algebra))
        n2 = sub.expect(u, random_element(rng, bundle.coeff_algebra))
        lhs = sub.expect(
            g.mul(g.mul(s, t), u),
            bundle.mul(g.mul(s, t), bundle.mul(s, n1, t, a), u, n2),
        )
        rhs = bundle.mul(
            g.mul(s, t), bundle.mul(s, n1, t, sub.expect(t, a)), u, n2
        )
        assert op_norm(lhs - rhs) <= 1e-12


class TestInducedActions:
    def test_central_action_matches_family_blocks(self):
        for seed in range(40, 44):
            pa = random_partial_action(rng_for(seed))
            bundle = make_semidirect(pa)
            central = central_partial_action(bundle)
            for t in pa.group.elements():
                assert dict(central.iso(t).phi) == dict(pa.iso(t).phi)

    def test_central_action_on_matrix_twisted_bundle(self):
        glob = random_global_action(rng_for(45), cyclic_group(4), [1, 2])
        family, twist = matrix_twist(glob, salt=45)
        bundle = make_twisted(family, twist)
        central = central_partial_action(bundle)
        for t in glob.group.elements():
            assert dict(central.iso(t).phi) == dict(glob.iso(t).phi)
        assert unit_identity_residual(central) <= 1e-12

    def test_central_units_satisfy_projection_identity(self):
        for seed in (46, 47):
            bundle, _ = random_fell_bundle(rng_for(seed), cyclic_group(6))
            central = central_partial_action(bundle)
            assert unit_identity_residual(central) <= 1e-12

    def test_spectral_action_points_and_function_relation(self):
        z4 = cyclic_group(4)
        glob = random_global_action(rng_for(48), z4, [1])
        pa = restrict_action(glob, Ideal(glob.algebra, [0, 1, 3]))
        bundle = make_semidirect(pa)
        spec = spectral_partial_action(bundle)
        assert spec.npoints == 3
        rng = rng_for(49)
        for t in z4.elements():
            assert spec.theta(t) == dict(pa.iso(t).phi)
            f = random_element(rng, bundle.coeff_algebra)
            b = bundle.fiber_ideal(t).project(random_element(rng, bundle.coeff_algebra))
            moved = spec.action.apply(t, f)
            lhs = bundle.mul(z4.identity, moved, t, b)
            rhs = bundle.mul(t, b, z4.identity, f)
            assert op_norm(lhs - rhs) <= 1e-12

    def test_spectral_rejects_matrix_fibers(self):
        bundle = group_bundle(cyclic_group(2), FdAlgebra([2]))
        with pytest.raises(ValueError):
            spectral_partial_action(bundle)

    def test_central_action_on_infinite_group_bundle(self):
        pa = random_infinite_partial_action(rng_for(50), FreeGroup(2))
        bundle = make_semidirect(pa)
        central = central_partial_action(bundle)
        for t in FreeGroup(2).ball(1):
            assert dict(central.iso(t).phi) == dict(pa.iso(t).phi)

    def test_central_action_lattice(self):
        pa = random_infinite_partial_action(rng_for(51), LatticeGroup(2))
        central = central_partial_action(make_semidirect(pa))
        ball = LatticeGroup(2).ball(1)
        assert unit_identity_residual(central, elements=ball) <= 1e-12
