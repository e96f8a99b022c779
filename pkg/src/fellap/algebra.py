"""Finite-dimensional C*-algebras as direct sums of complex matrix blocks,
their ideals and ideal isomorphisms, partial group actions on them, and the
finite-group globalization construction.

Every closed two-sided ideal of a block algebra is a union of whole blocks,
so ideals are stored as block-index sets and the unit projection of an ideal
is exact. A *-isomorphism between two such ideals is a block bijection plus
one unitary per block; this representation composes exactly and is closed
under inversion, which keeps partial-action arithmetic free of drift.
"""

from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .groups import Elem, FiniteGroup, Group, UnsupportedGroupError

__all__ = [
    "FdAlgebra",
    "FdElement",
    "Ideal",
    "IdealIso",
    "PartialAction",
    "ActionReport",
    "GlobalizationResult",
    "op_norm",
    "center_basis",
    "validate_partial_action",
    "trivial_partial_action",
    "identity_action",
    "translation_action",
    "pullback_action",
    "conjugate_action",
    "restrict_action",
    "globalize_finite",
    "unit_identity_residual",
]

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class FdAlgebra:
    """Direct sum of full matrix blocks; ``blocks`` lists the block sizes.

    The empty tuple is allowed and represents the zero algebra.
    """

    blocks: tuple[int, ...]

    def __init__(self, blocks: Iterable[int]):
        bl = tuple(int(d) for d in blocks)
        if any(d < 1 for d in bl):
            raise ValueError("block dimensions must be positive")
        object.__setattr__(self, "blocks", bl)

    @property
    def nblocks(self) -> int:
        return len(self.blocks)

    @property
    def dim(self) -> int:
        """Linear dimension, sum of squared block sizes."""
        return sum(d * d for d in self.blocks)

    def zero(self) -> "FdElement":
        return FdElement(self, [np.zeros((d, d), dtype=complex) for d in self.blocks])

    def one(self) -> "FdElement":
        return FdElement(self, [np.eye(d, dtype=complex) for d in self.blocks])

    def element(self, mats: Sequence[np.ndarray]) -> "FdElement":
        return FdElement(self, [np.asarray(m, dtype=complex) for m in mats])

    def basis(self) -> list["FdElement"]:
        """Matrix-unit basis, ordered by (block, row, column)."""
        out = []
        for j, d in enumerate(self.blocks):
            for p in range(d):
                for q in range(d):
                    x = self.zero()
                    x.mats[j][p, q] = 1.0
                    out.append(x)
        return out

    def full_ideal(self) -> "Ideal":
        return Ideal(self, frozenset(range(self.nblocks)))

    def zero_ideal(self) -> "Ideal":
        return Ideal(self, frozenset())


class FdElement:
    """One complex matrix per block of an :class:`FdAlgebra`.

    Arithmetic is blockwise; ``*`` is the algebra product, ``star()`` the
    adjoint, and ``norm()`` the operator norm (max block spectral norm).
    Instances are treated as immutable after construction.
    """

    __slots__ = ("algebra", "mats")

    def __init__(self, algebra: FdAlgebra, mats: Sequence[np.ndarray]):
        if len(mats) != algebra.nblocks:
            raise ValueError("block count mismatch")
        for m, d in zip(mats, algebra.blocks):
            if m.shape != (d, d):
                raise ValueError(f"block shape {m.shape} does not match dimension {d}")
        self.algebra = algebra
        self.mats = [np.asarray(m, dtype=complex) for m in mats]

    def _like(self, mats) -> "FdElement":
        return FdElement(self.algebra, mats)

    def _check(self, other: "FdElement") -> None:
        if other.algebra != self.algebra:
            raise ValueError("elements of different algebras")

    def __add__(self, other: "FdElement") -> "FdElement":
        self._check(other)
        return self._like([a + b for a, b in zip(self.mats, other.mats)])

    def __sub__(self, other: "FdElement") -> "FdElement":
        self._check(other)
        return self._like([a - b for a, b in zip(self.mats, other.mats)])

    def __mul__(self, other) -> "FdElement":
        if isinstance(other, FdElement):
            self._check(other)
            return self._like([a @ b for a, b in zip(self.mats, other.mats)])
        return self._like([complex(other) * a for a in self.mats])

    def __rmul__(self, scalar) -> "FdElement":
        return self._like([complex(scalar) * a for a in self.mats])

    def __neg__(self) -> "FdElement":
        return self._like([-a for a in self.mats])

    def star(self) -> "FdElement":
        return self._like([a.conj().T for a in self.mats])

    def norm(self) -> float:
        return op_norm(self)

    def frobenius(self) -> float:
        return float(np.sqrt(sum(float(np.sum(np.abs(a) ** 2)) for a in self.mats)))

    def flat(self) -> np.ndarray:
        """All block entries concatenated into one vector (fixed order)."""
        if not self.mats:
            return np.zeros(0, dtype=complex)
        return np.concatenate([a.ravel() for a in self.mats])

    def copy(self) -> "FdElement":
        return self._like([a.copy() for a in self.mats])

    def __repr__(self) -> str:
        return f"FdElement(blocks={self.algebra.blocks}, norm={self.norm():.4g})"


def fd_from_flat(algebra: FdAlgebra, vec: np.ndarray) -> FdElement:
    mats = []
    pos = 0
    for d in algebra.blocks:
        mats.append(np.asarray(vec[pos : pos + d * d], dtype=complex).reshape(d, d))
        pos += d * d
    return FdElement(algebra, mats)


def op_norm(x: FdElement) -> float:
    """C*-norm of a block element: the largest singular value over blocks."""
    if not x.mats:
        return 0.0
    return max(float(np.linalg.norm(m, ord=2)) for m in x.mats)


def fd_close(x: FdElement, y: FdElement, tol: float = DEFAULT_TOL) -> bool:
    return op_norm(x - y) <= tol


def center_basis(algebra: FdAlgebra) -> list[FdElement]:
    """The block-unit projections; they span the center."""
    out = []
    for j in range(algebra.nblocks):
        p = algebra.zero()
        p.mats[j] = np.eye(algebra.blocks[j], dtype=complex)
        out.append(p)
    return out


@dataclass(frozen=True)
class Ideal:
    """Closed two-sided ideal, i.e. a subset of block indices."""

    algebra: FdAlgebra
    block_set: frozenset[int]

    def __init__(self, algebra: FdAlgebra, block_set: Iterable[int]):
        bs = frozenset(int(j) for j in block_set)
        if any(not (0 <= j < algebra.nblocks) for j in bs):
            raise ValueError("block index out of range")
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "block_set", bs)

    def unit(self) -> FdElement:
        u = self.algebra.zero()
        for j in self.block_set:
            u.mats[j] = np.eye(self.algebra.blocks[j], dtype=complex)
        return u

    def project(self, x: FdElement) -> FdElement:
        """Compression of ``x`` to the ideal (kill blocks outside it)."""
        mats = [
            m.copy() if j in self.block_set else np.zeros_like(m)
            for j, m in enumerate(x.mats)
        ]
        return FdElement(self.algebra, mats)

    def contains(self, x: FdElement, tol: float = DEFAULT_TOL) -> bool:
        return all(
            float(np.abs(m).max(initial=0.0)) <= tol
            for j, m in enumerate(x.mats)
            if j not in self.block_set
        )

    def basis(self) -> list[FdElement]:
        out = []
        for j in sorted(self.block_set):
            d = self.algebra.blocks[j]
            for p in range(d):
                for q in range(d):
                    x = self.algebra.zero()
                    x.mats[j][p, q] = 1.0
                    out.append(x)
        return out

    def dim(self) -> int:
        return sum(self.algebra.blocks[j] ** 2 for j in self.block_set)

    def intersect(self, other: "Ideal") -> "Ideal":
        return Ideal(self.algebra, self.block_set & other.block_set)

    def __le__(self, other: "Ideal") -> bool:
        return self.block_set <= other.block_set


def conjugation_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Distance between Ad(u) and Ad(v) as maps on matrices.

    The two conjugations agree exactly when w = v*u is a scalar phase, so the
    defect of w from its best scalar approximation measures the gap.
    """
    d = u.shape[0]
    w = v.conj().T @ u
    lam = np.trace(w) / d
    if abs(lam) > 0:
        lam = lam / abs(lam)
    return float(np.linalg.norm(w - lam * np.eye(d), ord=2))


@dataclass(frozen=True, eq=False)
class IdealIso:
    """A *-isomorphism between two ideals: block bijection ``phi`` plus one
    unitary per source block, acting by a_j -> U_j a_j U_j* into block phi(j).

    ``apply`` factors through the source projection, so feeding it an element
    with mass outside the source silently drops that mass; validators, not
    the arithmetic, are responsible for flagging ill-typed data.
    """

    source: Ideal
    target: Ideal
    phi: Mapping[int, int]
    unitaries: Mapping[int, np.ndarray]

    def __post_init__(self):
        s, t = self.source, self.target
        if s.algebra != t.algebra:
            raise ValueError("source and target must be ideals of the same algebra")
        if set(self.phi.keys()) != set(s.block_set):
            raise ValueError("phi must be defined exactly on the source blocks")
        if set(self.phi.values()) != set(t.block_set):
            raise ValueError("phi must be onto the target blocks")
        if len(set(self.phi.values())) != len(self.phi):
            raise ValueError("phi must be injective")
        for j, k in self.phi.items():
            dj, dk = s.algebra.blocks[j], s.algebra.blocks[k]
            if dj != dk:
                raise ValueError(f"phi maps block {j} (dim {dj}) to block {k} (dim {dk})")
            u = self.unitaries[j]
            if u.shape != (dj, dj):
                raise ValueError("unitary shape mismatch")

    @property
    def algebra(self) -> FdAlgebra:
        return self.source.algebra

    def apply(self, x: FdElement) -> FdElement:
        out = self.algebra.zero()
        for j, k in self.phi.items():
            u = self.unitaries[j]
            out.mats[k] = u @ x.mats[j] @ u.conj().T
        return out

    def inverse(self) -> "IdealIso":
        phi_inv = {k: j for j, k in self.phi.items()}
        unis = {k: self.unitaries[j].conj().T for j, k in self.phi.items()}
        return IdealIso(self.target, self.source, phi_inv, unis)

    def compose(self, other: "IdealIso") -> "IdealIso":
        """self after other, restricted to where the chain is defined."""
        src_blocks = {j for j in other.phi if other.phi[j] in self.phi}
        phi = {j: self.phi[other.phi[j]] for j in src_blocks}
        unis = {j: self.unitaries[other.phi[j]] @ other.unitaries[j] for j in src_blocks}
        alg = self.algebra
        return IdealIso(Ideal(alg, src_blocks), Ideal(alg, set(phi.values())), phi, unis)

    def restricted(self, src_blocks: Iterable[int]) -> "IdealIso":
        sb = set(src_blocks) & set(self.phi)
        phi = {j: self.phi[j] for j in sb}
        unis = {j: self.unitaries[j] for j in sb}
        alg = self.algebra
        return IdealIso(Ideal(alg, sb), Ideal(alg, set(phi.values())), phi, unis)

    def map_distance(self, other: "IdealIso") -> float:
        """How far apart two isos are as maps; infinite block structure
        mismatch is reported as inf."""
        if set(self.phi) != set(other.phi) or any(
            self.phi[j] != other.phi[j] for j in self.phi
        ):
            return float("inf")
        if not self.phi:
            return 0.0
        return max(
            conjugation_distance(self.unitaries[j], other.unitaries[j]) for j in self.phi
        )

    def unitarity_residual(self) -> float:
        res = 0.0
        for j, u in self.unitaries.items():
            d = u.shape[0]
            res = max(res, float(np.linalg.norm(u.conj().T @ u - np.eye(d), ord=2)))
        return res

    @staticmethod
    def identity_on(ideal: Ideal) -> "IdealIso":
        phi = {j: j for j in ideal.block_set}
        unis = {j: np.eye(ideal.algebra.blocks[j], dtype=complex) for j in ideal.block_set}
        return IdealIso(ideal, ideal, phi, unis)


class PartialAction:
    """A partial action of a group on a block algebra.

    ``iso(t)`` returns the isomorphism alpha_t from the ideal A_{t^-1} onto
    A_t. The map may be given as an explicit dict (finite groups) or as a
    callable (lazy, for infinite groups); results are cached either way.
    """

    def __init__(
        self,
        group: Group,
        algebra: FdAlgebra,
        iso_fn: Callable[[Elem], IdealIso] | Mapping[Elem, IdealIso],
    ):
        self.group = group
        self.algebra = algebra
        if isinstance(iso_fn, Mapping):
            table = dict(iso_fn)
            self._fn = lambda t: table[t]
        else:
            self._fn = iso_fn
        self._cache: dict[Elem, IdealIso] = {}

    def iso(self, t: Elem) -> IdealIso:
        self.group.check(t)
        got = self._cache.get(t)
        if got is None:
            got = self._fn(t)
            if got.algebra != self.algebra:
                raise ValueError("iso_fn returned an iso over the wrong algebra")
            self._cache[t] = got
        return got

    def domain(self, t: Elem) -> Ideal:
        """The ideal A_t, the range of alpha_t."""
        return self.iso(t).target

    def apply(self, t: Elem, x: FdElement) -> FdElement:
        return self.iso(t).apply(x)

    def unit(self, t: Elem) -> FdElement:
        """The unit projection 1_t of the ideal A_t."""
        return self.domain(t).unit()


@dataclass
class ActionReport:
    """Validation outcome: every violated axiom instance, with residuals."""

    rows: list[tuple[str, str, float]] = field(default_factory=list)
    checked: int = 0

    def add(self, axiom: str, context: str, residual: float, tol: float) -> None:
        self.checked += 1
        if residual > tol or residual != residual:
            self.rows.append((axiom, context, residual))

    @property
    def passed(self) -> bool:
        return not self.rows

    @property
    def max_residual(self) -> float:
        return max((r for _, _, r in self.rows), default=0.0)

    def render(self) -> str:
        if self.passed:
            return f"pass ({self.checked} checks)"
        lines = [f"FAIL ({len(self.rows)} violations / {self.checked} checks)"]
        for axiom, ctx, res in self.rows[:20]:
            lines.append(f"  {axiom} at {ctx}: residual {res:.3e}")
        return "\n".join(lines)


def validate_partial_action(
    pa: PartialAction, window: int = 2, tol: float = DEFAULT_TOL
) -> ActionReport:
    """Check the partial-action axioms on a ball of the group.

    Verified, for s, t in the window: the identity element acts as the
    identity on the whole algebra; alpha_{t^-1} inverts alpha_t; and the
    composition law: whenever a source block of alpha_t lands in the source
    of alpha_s, that block belongs to the source of alpha_{st} and the maps
    agree there. Unitarity of every stored block unitary is also checked.
    Violations are data in the report, not exceptions.
    """
    g = pa.group
    rep = ActionReport()
    ball = g.ball(window)

    e = g.identity
    iso_e = pa.iso(e)
    full = pa.algebra.full_ideal()
    if iso_e.source.block_set != full.block_set or iso_e.target.block_set != full.block_set:
        rep.add("identity-domain", "e", float("inf"), tol)
    rep.add("identity-map", "e", iso_e.map_distance(IdealIso.identity_on(full)), tol)

    for t in ball:
        iso_t = pa.iso(t)
        rep.add("unitarity", g.format_elem(t), iso_t.unitarity_residual(), tol)
        iso_tinv = pa.iso(g.inv(t))
        rep.add(
            "inverse-map",
            g.format_elem(t),
            iso_tinv.map_distance(iso_t.inverse()),
            tol,
        )

    for s in ball:
        iso_s = pa.iso(s)
        for t in ball:
            iso_t = pa.iso(t)
            st = g.mul(s, t)
            iso_st = pa.iso(st)
            ctx = f"(s={g.format_elem(s)}, t={g.format_elem(t)})"
            for j in iso_t.phi:
                k = iso_t.phi[j]
                if k not in iso_s.phi:
                    continue
                if j not in iso_st.phi:
                    rep.add("composition-domain", ctx + f" block {j}", float("inf"), tol)
                    continue
                if iso_st.phi[j] != iso_s.phi[k]:
                    rep.add("composition-block", ctx + f" block {j}", float("inf"), tol)
                    continue
                u_chain = iso_s.unitaries[k] @ iso_t.unitaries[j]
                rep.add(
                    "composition-map",
                    ctx + f" block {j}",
                    conjugation_distance(iso_st.unitaries[j], u_chain),
                    tol,
                )
    return rep


def identity_action(group: Group, algebra: FdAlgebra) -> PartialAction:
    """Globally defined action where every element acts as the identity."""
    iso = IdealIso.identity_on(algebra.full_ideal())
    return PartialAction(group, algebra, lambda t: iso)


def trivial_partial_action(group: Group, algebra: FdAlgebra) -> PartialAction:
    """Identity at the group identity, zero ideals everywhere else."""
    full = algebra.full_ideal()
    zero = algebra.zero_ideal()
    zero_iso = IdealIso(zero, zero, {}, {})
    id_iso = IdealIso.identity_on(full)

    def fn(t: Elem) -> IdealIso:
        return id_iso if t == group.identity else zero_iso

    return PartialAction(group, algebra, fn)


def translation_action(group: FiniteGroup, base: FdAlgebra) -> PartialAction:
    """Global action of a finite group on the |G|-fold sum of ``base`` by
    coordinate translation: the summand at position t moves to position st.

    Blocks are laid out grouped by group element, in element order, so block
    (t, j) sits at index t*nb + j with nb the block count of ``base``.
    """
    n = group.order
    nb = base.nblocks
    algebra = FdAlgebra(base.blocks * n)
    full = algebra.full_ideal()

    def fn(s: Elem) -> IdealIso:
        phi = {}
        unis = {}
        for t_idx in range(n):
            shifted = group.table[s.data][t_idx]
            for j in range(nb):
                phi[t_idx * nb + j] = shifted * nb + j
                unis[t_idx * nb + j] = np.eye(base.blocks[j], dtype=complex)
        return IdealIso(full, full, phi, unis)

    return PartialAction(group, algebra, fn)


def pullback_action(
    pa: PartialAction, hom: Callable[[Elem], Elem], group: Group
) -> PartialAction:
    """Pull a partial action back along a group homomorphism.

    ``hom`` must send ``group`` into ``pa.group`` multiplicatively; the
    pulled-back action is alpha'_t = alpha_{hom(t)} on the same algebra.
    """
    return PartialAction(group, pa.algebra, lambda t: pa.iso(hom(t)))


def conjugate_action(pa: PartialAction, w: FdElement) -> PartialAction:
    """Conjugate every alpha_t by a fixed unitary w of the algebra."""

    def fn(t: Elem) -> IdealIso:
        iso = pa.iso(t)
        phi = dict(iso.phi)
        unis = {
            j: w.mats[iso.phi[j]] @ iso.unitaries[j] @ w.mats[j].conj().T
            for j in iso.phi
        }
        return IdealIso(iso.source, iso.target, phi, unis)

    return PartialAction(pa.group, pa.algebra, fn)


def restrict_action(pa: PartialAction, J: Ideal) -> PartialAction:
    """Restriction of a partial action to an ideal.

    The carrier becomes the block algebra of J (blocks in sorted order); the
    new domains are J_t = J n alpha_t(A_{t^-1} n J), realized blockwise by
    keeping exactly the source blocks of alpha_t that lie in J and map into J.
    """
    if J.algebra != pa.algebra:
        raise ValueError("ideal belongs to a different algebra")
    old_blocks = sorted(J.block_set)
    new_index = {j: i for i, j in enumerate(old_blocks)}
    sub = FdAlgebra([pa.algebra.blocks[j] for j in old_blocks])

    def fn(t: Elem) -> IdealIso:
        iso = pa.iso(t)
        kept = [j for j in iso.phi if j in J.block_set and iso.phi[j] in J.block_set]
        phi = {new_index[j]: new_index[iso.phi[j]] for j in kept}
        unis = {new_index[j]: iso.unitaries[j] for j in kept}
        return IdealIso(
            Ideal(sub, phi.keys()), Ideal(sub, phi.values()), phi, unis
        )

    return PartialAction(pa.group, sub, fn)


def unit_identity_residual(pa: PartialAction, elements: Sequence[Elem] | None = None) -> float:
    """Max residual of alpha_t(1_{t^-1} 1_s) = 1_t 1_{ts} over the given
    elements (the whole group when omitted and finite)."""
    g = pa.group
    if elements is None:
        if not g.is_finite:
            raise UnsupportedGroupError("provide a window for infinite groups")
        elements = g.ball(0)
    res = 0.0
    for t in elements:
        u_tinv = pa.unit(g.inv(t))
        for s in elements:
            lhs = pa.apply(t, u_tinv * pa.unit(s))
            rhs = pa.unit(t) * pa.unit(g.mul(t, s))
            res = max(res, op_norm(lhs - rhs))
    return res


# ---------------------------------------------------------------------------
# Globalization for finite groups.
#
# The embedding iota(x)(t) = alpha_{t^-1}(1_t x) realizes the algebra inside
# the |G|-fold direct sum; the enveloping algebra is the *-algebra generated
# by the translates of the image, which in finite dimension is just the
# linear span once products are folded in. The block structure of that span
# is recovered numerically (center, minimal central projections, matrix
# units), and the translation action is transported to those coordinates.
# ---------------------------------------------------------------------------


@dataclass
class GlobalizationResult:
    action: PartialAction
    algebra: FdAlgebra
    ambient: FdAlgebra
    embed: Callable[[FdElement], FdElement]
    embed_ambient: Callable[[FdElement], FdElement]
    image_blocks: frozenset[int]
    block_of_input_block: dict[int, int]
    orbit_rank: int
    algebra_rank: int
    structure_residual: float

    @property
    def orbit_spans_all(self) -> bool:
        return self.orbit_rank == self.algebra_rank

    def image_ideal(self) -> Ideal:
        return Ideal(self.algebra, self.image_blocks)


class _SpanBasis:
    """Orthonormal basis of a linear span of ambient elements."""

    def __init__(self, ambient: FdAlgebra, vectors: list[FdElement], tol: float = 1e-9):
        self.ambient = ambient
        mat = np.stack([v.flat() for v in vectors])
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
        keep = s > tol * max(s[0], 1.0) if len(s) else np.zeros(0, dtype=bool)
        self.basis_flat = vh[keep]
        self.rank = int(keep.sum())

    def elements(self) -> list[FdElement]:
        return [fd_from_flat(self.ambient, row) for row in self.basis_flat]

    def coeffs(self, x: FdElement) -> np.ndarray:
        return self.basis_flat.conj() @ x.flat()

    def project_residual(self, x: FdElement) -> float:
        v = x.flat()
        proj = self.basis_flat.T @ (self.basis_flat.conj() @ v)
        return float(np.linalg.norm(v - proj))


def _solve_unit(basis: list[FdElement]) -> FdElement:
    """The unit of a *-closed span: solve u*b = b for all basis elements."""
    amb = basis[0].algebra
    cols = []
    rhs = []
    for b in basis:
        rows = [(u * b).flat() for u in basis]
        cols.append(np.stack(rows, axis=1))
        rhs.append(b.flat())
    lhs = np.concatenate(cols, axis=0)
    target = np.concatenate(rhs)
    c, *_ = np.linalg.lstsq(lhs, target, rcond=None)
    u = amb.zero()
    for ck, b in zip(c, basis):
        u = u + ck * b
    u = 0.5 * (u + u.star())
    return u


def _center_basis_of_span(basis: list[FdElement], tol: float = 1e-9) -> list[FdElement]:
    amb = basis[0].algebra
    rows = []
    for b in basis:
        block = np.stack([(z * b - b * z).flat() for z in basis], axis=1)
        rows.append(block)
    mat = np.concatenate(rows, axis=0)
    if mat.shape[0] == 0:
        mat = np.zeros((1, len(basis)), dtype=complex)
    u, s, vh = np.linalg.svd(mat, full_matrices=True)
    ns = [vh[i].conj() for i in range(len(s), vh.shape[0])] + [
        vh[i].conj() for i in range(len(s)) if s[i] <= tol * max(s[0], 1.0)
    ]
    out = []
    for coeff in ns:
        z = amb.zero()
        for ck, b in zip(coeff, basis):
            z = z + ck * b
        out.append(z)
    return out


def _eig_cluster(values: np.ndarray, gap: float) -> list[list[int]]:
    order = np.argsort(values)
    clusters: list[list[int]] = []
    for idx in order:
        if clusters and values[idx] - values[clusters[-1][-1]] <= gap:
            clusters[-1].append(int(idx))
        else:
            clusters.append([int(idx)])
    return clusters


def _ambient_eigh(x: FdElement) -> tuple[np.ndarray, list[tuple[int, np.ndarray]]]:
    """Eigendecomposition of a hermitian ambient element.

    Returns all eigenvalues plus (block, eigenvector) pairs in matching order.
    """
    vals = []
    vecs = []
    for j, m in enumerate(x.mats):
        w, v = np.linalg.eigh(m)
        for i in range(len(w)):
            vals.append(w[i])
            vecs.append((j, v[:, i]))
    return np.asarray(vals), vecs


def _spectral_projections(
    x: FdElement, support: FdElement, gap: float = 1e-5
) -> list[FdElement] | None:
    """Spectral projections of hermitian x within its support projection.

    Directions outside the support are pushed far away by a large shift so
    they never mix with genuine clusters. Returns None when clusters are not
    cleanly separated at the requested gap.
    """
    amb = x.algebra
    shift = 1e6 * (1.0 + op_norm(x))
    shifted = x + shift * (amb.one() - support)
    vals, vecs = _ambient_eigh(shifted)
    genuine = [i for i in range(len(vals)) if vals[i] < shift / 2]
    if not genuine:
        return []
    gvals = np.asarray([vals[i] for i in genuine])
    clusters = _eig_cluster(gvals, gap)
    # clusters must be tight and mutually separated
    for ci, cluster in enumerate(clusters):
        cv = gvals[cluster]
        if cv.max() - cv.min() > gap:
            return None
    centers = [float(np.mean(gvals[c])) for c in clusters]
    for a, b in itertools.combinations(centers, 2):
        if abs(a - b) < 10 * gap:
            return None
    projs = []
    for cluster in clusters:
        p = amb.zero()
        for local in cluster:
            j, v = vecs[genuine[local]]
            p.mats[j] = p.mats[j] + np.outer(v, v.conj())
        projs.append(p)
    return projs


def _random_hermitian_in(
    span: list[FdElement], rng: np.random.Generator
) -> FdElement:
    amb = span[0].algebra
    h = amb.zero()
    for b in span:
        c = rng.normal() + 1j * rng.normal()
        h = h + c * b
    return 0.5 * (h + h.star())


def _polar_isometry(x: FdElement, tol: float = 1e-8) -> FdElement:
    out = x.algebra.zero()
    for j, m in enumerate(x.mats):
        if m.shape[0] == 0 or np.abs(m).max(initial=0.0) <= tol:
            continue
        u, s, vh = np.linalg.svd(m)
        keep = s > tol * s[0]
        out.mats[j] = u[:, keep] @ vh[keep]
    return out


class _Summand:
    """One minimal central summand of the enveloping algebra, with matrix
    units giving explicit coordinates."""

    def __init__(self, q: FdElement, span: _SpanBasis, rng: np.random.Generator):
        amb = q.algebra
        raw = [fd_from_flat(amb, row) for row in span.basis_flat]
        compressed = [q * b * q for b in raw]
        local = _SpanBasis(amb, compressed)
        dim = local.rank
        n = int(round(np.sqrt(dim)))
        if n * n != dim:
            raise ArithmeticError(f"summand dimension {dim} is not a perfect square")
        self.n = n
        self.q = q
        basis_els = local.elements()

        units: list[FdElement] | None = None
        for _ in range(40):
            h = _random_hermitian_in(basis_els, rng)
            projs = _spectral_projections(h, q)
            if projs is not None and len(projs) == n:
                units = projs
                break
        if units is None:
            raise ArithmeticError("could not isolate minimal projections")
        # deterministic order: by trace then by first moments
        units.sort(key=lambda p: sum(float(np.real(np.trace(m))) for m in p.mats))
        self.mult = int(round(sum(float(np.real(np.trace(m))) for m in units[0].mats)))

        vs: list[FdElement] = [units[0]]
        for a in range(1, n):
            v = None
            for _ in range(40):
                x = _random_hermitian_in(basis_els, rng)
                cand = units[0] * x * units[a]
                iso = _polar_isometry(cand)
                if abs(iso.frobenius() ** 2 - self.mult) < 0.25:
                    v = iso
                    break
            if v is None:
                raise ArithmeticError("could not build matrix units")
            vs.append(v)
        # E[a][b] = v_a* v_b maps the b-th minimal projection onto the a-th
        self.E = [[vs[a].star() * vs[b] for b in range(n)] for a in range(n)]

    def coords(self, x: FdElement) -> np.ndarray:
        n = self.n
        out = np.zeros((n, n), dtype=complex)
        for a in range(n):
            for b in range(n):
                prod = self.E[b][a] * x
                out[a, b] = sum(np.trace(m) for m in prod.mats) / self.mult
        return out

    def from_coords(self, mat: np.ndarray) -> FdElement:
        amb = self.q.algebra
        out = amb.zero()
        for a in range(self.n):
            for b in range(self.n):
                out = out + mat[a, b] * self.E[a][b]
        return out

    def structure_residual(self) -> float:
        # E_{ab} E_{cd} = delta_{bc} E_{ad}
        res = 0.0
        n = self.n
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    for d in range(n):
                        prod = self.E[a][b] * self.E[c][d]
                        expect = self.E[a][d] if b == c else prod.algebra.zero()
                        res = max(res, op_norm(prod - expect))
        return res


def _unitary_from_conjugation(L: Callable[[np.ndarray], np.ndarray], n: int) -> np.ndarray:
    """Recover w (up to phase) from the map x -> w x w* on n x n matrices."""
    e11 = np.zeros((n, n), dtype=complex)
    e11[0, 0] = 1.0
    t = L(e11)
    w_vals, w_vecs = np.linalg.eigh(0.5 * (t + t.conj().T))
    v = w_vecs[:, np.argmax(w_vals)]
    cols = []
    for a in range(n):
        ea1 = np.zeros((n, n), dtype=complex)
        ea1[a, 0] = 1.0
        cols.append(L(ea1) @ v)
    w = np.stack(cols, axis=1)
    # re-unitarize to clean up float dust
    u, _, vh = np.linalg.svd(w)
    return u @ vh


def globalize_finite(
    pa: PartialAction, tol: float = DEFAULT_TOL, seed: int = 7
) -> GlobalizationResult:
    """Enveloping global action of a partial action of a finite group.

    Builds the embedding iota(x)(t) = alpha_{t^-1}(1_t x) into the |G|-fold
    direct sum, generates the *-algebra N from the translates of the image,
    recovers N's block structure numerically, and returns the translation
    action transported to those blocks together with the embedding and the
    block indices of the image ideal.
    """
    g = pa.group
    if not isinstance(g, FiniteGroup):
        raise UnsupportedGroupError("globalization is implemented for finite groups")
    A = pa.algebra
    if A.nblocks == 0:
        raise ValueError("cannot globalize an action on the zero algebra")
    els = g.elements()
    n = len(els)
    pos = {t: i for i, t in enumerate(els)}
    ambient = FdAlgebra(A.blocks * n)
    nb = A.nblocks

    def embed_ambient(x: FdElement) -> FdElement:
        out = ambient.zero()
        for t in els:
            y = pa.iso(g.inv(t)).apply(x)  # alpha_{t^-1}(1_t x), projection implicit
            base = pos[t] * nb
            for j in range(nb):
                out.mats[base + j] = y.mats[j]
        return out

    def tau(s: Elem, f: FdElement) -> FdElement:
        out = ambient.zero()
        for t in els:
            src = pos[g.mul(g.inv(s), t)] * nb
            dst = pos[t] * nb
            for j in range(nb):
                out.mats[dst + j] = f.mats[src + j]
        return out

    a_basis = A.basis()
    orbit_vectors: list[FdElement] = []
    for s in els:
        for b in a_basis:
            orbit_vectors.append(tau(s, embed_ambient(b)))
    orbit_span = _SpanBasis(ambient, orbit_vectors)
    orbit_rank = orbit_span.rank

    # fold in products until the span stabilizes
    span = orbit_span
    for _ in range(8):
        cur = span.elements()
        prods = [x * y for x, y in itertools.product(cur, repeat=2)]
        bigger = _SpanBasis(ambient, cur + prods + [x.star() for x in cur])
        if bigger.rank == span.rank:
            span = bigger
            break
        span = bigger

    basis_els = span.elements()
    rng = np.random.default_rng(seed)
    structure_residual = 0.0

    unit = _solve_unit(basis_els)
    structure_residual = max(structure_residual, op_norm(unit * unit - unit))

    center = _center_basis_of_span(basis_els)
    projs = None
    for _ in range(40):
        z0 = _random_hermitian_in(center, rng)
        projs = _spectral_projections(z0, unit)
        if projs is not None and len(projs) == len(center):
            break
        projs = None
    if projs is None:
        raise ArithmeticError("could not separate the central projections")
    total = projs[0].algebra.zero()
    for p in projs:
        structure_residual = max(structure_residual, op_norm(p * p - p))
        total = total + p
    structure_residual = max(structure_residual, op_norm(total - unit))

    summands = [_Summand(q, span, rng) for q in projs]
    # deterministic global ordering of blocks: by size then by mean position
    order = sorted(
        range(len(summands)),
        key=lambda i: (
            summands[i].n,
            [round(float(np.real(np.trace(m))), 6) for m in summands[i].q.mats],
        ),
    )
    summands = [summands[i] for i in order]
    projs = [s.q for s in summands]
    n_alg = FdAlgebra([s.n for s in summands])

    def to_coords(x: FdElement) -> FdElement:
        return FdElement(n_alg, [s.coords(x) for s in summands])

    def from_coords(y: FdElement) -> FdElement:
        out = ambient.zero()
        for ys, s in zip(y.mats, summands):
            out = out + s.from_coords(ys)
        return out

    # transported translation action
    iso_table: dict[Elem, IdealIso] = {}
    full = n_alg.full_ideal()
    for s_el in els:
        phi = {}
        unis = {}
        for i, summ in enumerate(summands):
            moved = tau(s_el, summ.q)
            dists = [op_norm(moved - p) for p in projs]
            k = int(np.argmin(dists))
            structure_residual = max(structure_residual, dists[k])
            phi[i] = k

            def L(x, i=i, k=k):
                return summands[k].coords(tau(s_el, summands[i].from_coords(x)))

            w = _unitary_from_conjugation(L, summ.n)
            # residual of Ad(w) against the transported map on a basis
            for p in range(summ.n):
                for q in range(summ.n):
                    epq = np.zeros((summ.n, summ.n), dtype=complex)
                    epq[p, q] = 1.0
                    structure_residual = max(
                        structure_residual,
                        float(np.linalg.norm(L(epq) - w @ epq @ w.conj().T, ord=2)),
                    )
            unis[i] = w
        iso_table[s_el] = IdealIso(full, full, phi, unis)

    global_action = PartialAction(g, n_alg, iso_table)

    def embed(x: FdElement) -> FdElement:
        return to_coords(embed_ambient(x))

    # image ideal and the block correspondence through the embedding
    unit_image = embed(A.one())
    image_blocks = frozenset(
        i for i in range(n_alg.nblocks) if np.abs(unit_image.mats[i]).max(initial=0.0) > 0.5
    )
    block_of: dict[int, int] = {}
    for j in range(A.nblocks):
        p = A.zero()
        p.mats[j] = np.eye(A.blocks[j], dtype=complex)
        img = embed(p)
        hits = [
            i
            for i in range(n_alg.nblocks)
            if np.abs(img.mats[i]).max(initial=0.0) > 0.5
        ]
        if len(hits) != 1:
            raise ArithmeticError("embedded block unit is not concentrated in one block")
        block_of[j] = hits[0]

    return GlobalizationResult(
        action=global_action,
        algebra=n_alg,
        ambient=ambient,
        embed=embed,
        embed_ambient=embed_ambient,
        image_blocks=image_blocks,
        block_of_input_block=block_of,
        orbit_rank=orbit_rank,
        algebra_rank=span.rank,
        structure_residual=structure_residual,
    )
