"""Finitely supported matrix kernels over a Fell bundle.

A kernel assigns to each pair (s, t) of group elements a coefficient in the
fiber over s t^{-1}; only finitely many entries are nonzero.  Kernels form a
*-algebra: the product is

    (h * k)(r, s) = sum_t k(r, t) h(t, s)

with k's entry written first inside each summand, and the involution is
k*(r, s) = k(s, r)*.  The convention makes the left regular representation

    (pi(k) f)(s) = sum_t k(s, t) f(t)

product reversing, pi(h * k) = pi(k) pi(h), while pi(k*) = pi(k)*.  The
reversal is deliberate and pinned by tests; do not "fix" the product order.

Every kernel supported in a finite window F of the group lives in the matrix
algebra M_F(B) of the bundle, and ``mf_embed_norm`` computes its genuine
C*-norm there by representing M_F(B) on a windowed Hilbert space built from
the unit fiber.  For an infinite group this windowed norm is the norm of the
kernel as an element of M_F(B); as an estimate for the full cross sectional
C*-algebra norm of pi(k) it is a lower bound that grows with the window.
"""

from __future__ import annotations

import weakref
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Tuple

import numpy as np

from .algebra import DEFAULT_TOL, FdElement
from .bundles import FellBundle, Section, SubBundle, fiber_norm
from .groups import Elem, Group


class Window:
    """Ordered finite list of distinct group elements.

    The order is part of the data: matrix representations index rows and
    columns by position in the window, and deterministic output (CSV rows,
    cached representations) relies on it.
    """

    __slots__ = ("group", "elements", "_index")

    def __init__(self, group: Group, elements: Iterable[Elem]):
        elems = tuple(elements)
        seen: Dict[Elem, int] = {}
        for pos, t in enumerate(elems):
            group.check(t)
            if t in seen:
                raise ValueError(f"window element repeated at positions {seen[t]} and {pos}")
            seen[t] = pos
        self.group = group
        self.elements = elems
        self._index = seen

    @staticmethod
    def ball(group: Group, radius: int) -> "Window":
        return Window(group, group.ball(radius))

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[Elem]:
        return iter(self.elements)

    def __contains__(self, t: Elem) -> bool:
        return t in self._index

    def index(self, t: Elem) -> int:
        try:
            return self._index[t]
        except KeyError:
            raise KeyError(f"{self.group.format_elem(t)} not in window") from None

    def covers(self, other: "Window") -> bool:
        """Whether every element of ``other`` belongs to this window."""
        return all(t in self._index for t in other.elements)

    def __repr__(self) -> str:
        names = ", ".join(self.group.format_elem(t) for t in self.elements)
        return f"Window[{names}]"


class Kernel:
    """Finitely supported map (s, t) -> fiber over s t^{-1}.

    Fiber membership of every entry is checked at construction; exact zero
    entries are dropped so that support bookkeeping stays meaningful.
    """

    __slots__ = ("bundle", "data")

    def __init__(
        self,
        bundle: FellBundle,
        entries: Mapping[Tuple[Elem, Elem], FdElement],
        project: bool = False,
    ):
        g = bundle.group
        data: Dict[Tuple[Elem, Elem], FdElement] = {}
        for (s, t), a in entries.items():
            g.check(s)
            g.check(t)
            fib = bundle.fiber_ideal(g.mul(s, g.inv(t)))
            if project:
                a = fib.project(a)
            elif not fib.contains(a, tol=1e-9):
                raise ValueError(
                    f"entry at ({g.format_elem(s)}, {g.format_elem(t)}) "
                    "lies outside its fiber"
                )
            if any(np.abs(m).max(initial=0.0) > 0.0 for m in a.mats):
                data[(s, t)] = a
        self.bundle = bundle
        self.data = data

    @staticmethod
    def zero(bundle: FellBundle) -> "Kernel":
        return Kernel(bundle, {})

    @staticmethod
    def single(bundle: FellBundle, s: Elem, t: Elem, a: FdElement) -> "Kernel":
        return Kernel(bundle, {(s, t): a})

    @staticmethod
    def diagonal_unit(bundle: FellBundle, window: Window) -> "Kernel":
        one = bundle.coeff_algebra.one()
        return Kernel(bundle, {(t, t): one for t in window})

    def value(self, s: Elem, t: Elem) -> FdElement:
        got = self.data.get((s, t))
        return got if got is not None else self.bundle.coeff_algebra.zero()

    def support(self) -> set:
        return set(self.data.keys())

    def __add__(self, other: "Kernel") -> "Kernel":
        data = dict(self.data)
        for key, a in other.data.items():
            data[key] = data[key] + a if key in data else a
        return Kernel(self.bundle, data)

    def __sub__(self, other: "Kernel") -> "Kernel":
        return self + (-1.0) * other

    def __rmul__(self, scalar) -> "Kernel":
        lam = complex(scalar)
        return Kernel(self.bundle, {key: lam * a for key, a in self.data.items()})


def k_mul(h: Kernel, k: Kernel) -> Kernel:
    """Kernel product (h * k)(r, s) = sum_t k(r, t) h(t, s).

    Inside each summand k's entry multiplies from the left in the bundle.
    The support of the result is contained in rows(k) x cols(h).
    """
    if h.bundle is not k.bundle:
        raise ValueError("kernel product needs a common bundle")
    bundle = h.bundle
    g = bundle.group
    by_col: Dict[Elem, List[Tuple[Elem, FdElement]]] = {}
    for (r, t), a in k.data.items():
        by_col.setdefault(t, []).append((r, a))
    by_row: Dict[Elem, List[Tuple[Elem, FdElement]]] = {}
    for (t, s), b in h.data.items():
        by_row.setdefault(t, []).append((s, b))
    acc: Dict[Tuple[Elem, Elem], FdElement] = {}
    for t, lefts in by_col.items():
        rights = by_row.get(t)
        if rights is None:
            continue
        tinv = g.inv(t)
        for r, a in lefts:
            rt = g.mul(r, tinv)
            for s, b in rights:
                term = bundle.mul(rt, a, g.mul(t, g.inv(s)), b)
                key = (r, s)
                acc[key] = acc[key] + term if key in acc else term
    return Kernel(bundle, acc)


def k_star(k: Kernel) -> Kernel:
    """Involution k*(r, s) = k(s, r)* taken in the bundle."""
    g = k.bundle.group
    out: Dict[Tuple[Elem, Elem], FdElement] = {}
    for (s, r), a in k.data.items():
        out[(r, s)] = k.bundle.star(g.mul(s, g.inv(r)), a)
    return Kernel(k.bundle, out)


def norm2(k: Kernel) -> float:
    """Hilbert-Schmidt style norm: square root of the sum of squared fiber norms."""
    g = k.bundle.group
    total = 0.0
    for (s, t), a in k.data.items():
        total += fiber_norm(k.bundle, g.mul(s, g.inv(t)), a) ** 2
    return float(np.sqrt(total))


def beta_act(t: Elem, k: Kernel) -> Kernel:
    """Right translation beta_t(k)(r, s) = k(r t, s t).

    Pure index arithmetic: entries are moved, never transformed, so norm2
    is preserved exactly and beta is a group action by *-automorphisms.
    """
    g = k.bundle.group
    g.check(t)
    tinv = g.inv(t)
    moved = {(g.mul(r, tinv), g.mul(s, tinv)): a for (r, s), a in k.data.items()}
    return Kernel(k.bundle, moved)


def rank_one(xi: Section, eta: Section) -> Kernel:
    """Rank one kernel k(s, t) = xi(s) eta(t)*."""
    if xi.bundle is not eta.bundle:
        raise ValueError("rank one kernel needs sections of one bundle")
    bundle = xi.bundle
    g = bundle.group
    entries: Dict[Tuple[Elem, Elem], FdElement] = {}
    for s, a in xi.data.items():
        for t, b in eta.data.items():
            entries[(s, t)] = bundle.mul(s, a, g.inv(t), bundle.star(t, b))
    return Kernel(bundle, entries)


def to_mf(k: Kernel, window: Window) -> List[List[FdElement]]:
    """Matrix of the kernel over the window, as a dense list of lists.

    Raises if any support pair falls outside window x window; use a larger
    window rather than silently truncating.
    """
    for (s, t) in k.data:
        if s not in window or t not in window:
            g = k.bundle.group
            raise ValueError(
                f"support pair ({g.format_elem(s)}, {g.format_elem(t)}) outside window"
            )
    return [[k.value(s, t) for t in window] for s in window]


def mf_dim(bundle: FellBundle, window: Window) -> int:
    """Linear dimension of the windowed matrix algebra M_F(B)."""
    g = bundle.group
    return sum(
        bundle.fiber_dim(g.mul(s, g.inv(t))) for s in window for t in window
    )


class _WindowRep:
    """Concrete *-representation of the windowed matrix algebra.

    The Hilbert space is built from columns f = (f(t))_{t in F} with
    f(t) in the fiber over t, carrying the unit fiber valued inner product
    <f, g> = sum_t f(t)* g(t), then composed with the defining block
    representation of the coefficient algebra and quotiented by null
    vectors.  Kernels act by (pi(k) f)(s) = sum_t k(s, t) f(t); on the
    resulting orthonormal basis the matrix of pi(k) is exact, so operator
    norms computed here are the C*-norms of M_F(B).
    """

    def __init__(self, bundle: FellBundle, window: Window):
        self.bundle = bundle
        self.window = window
        g = bundle.group
        alg = bundle.coeff_algebra
        self.vdim = sum(alg.blocks)

        def block_rep(x: FdElement) -> np.ndarray:
            out = np.zeros((self.vdim, self.vdim), dtype=complex)
            at = 0
            for d, m in zip(alg.blocks, x.mats):
                out[at : at + d, at : at + d] = m
                at += d
            return out

        self.fiber_basis: Dict[Elem, List[FdElement]] = {}
        self.raw_dims: Dict[Elem, int] = {}
        self.onb_maps: Dict[Elem, np.ndarray] = {}
        self.gram_onb: Dict[Elem, np.ndarray] = {}
        self.qdims: Dict[Elem, int] = {}
        for t in window:
            basis = bundle.fiber_ideal(t).basis()
            n = len(basis)
            self.fiber_basis[t] = basis
            self.raw_dims[t] = n * self.vdim
            if n == 0:
                self.onb_maps[t] = np.zeros((0, 0), dtype=complex)
                self.gram_onb[t] = np.zeros((0, 0), dtype=complex)
                self.qdims[t] = 0
                continue
            tinv = g.inv(t)
            gram = np.zeros((n * self.vdim, n * self.vdim), dtype=complex)
            for a_idx, ba in enumerate(basis):
                ba_star = bundle.star(t, ba)
                for b_idx, bb in enumerate(basis):
                    inner = bundle.mul(tinv, ba_star, t, bb)
                    gram[
                        a_idx * self.vdim : (a_idx + 1) * self.vdim,
                        b_idx * self.vdim : (b_idx + 1) * self.vdim,
                    ] = block_rep(inner)
            gram = 0.5 * (gram + gram.conj().T)
            vals, vecs = np.linalg.eigh(gram)
            top = float(vals.max(initial=0.0))
            cut = max(top * 1e-12, 1e-14)
            keep = vals > cut
            w = vecs[:, keep] / np.sqrt(vals[keep])
            self.onb_maps[t] = w
            self.gram_onb[t] = gram @ w
            self.qdims[t] = int(keep.sum())
        self.offsets: Dict[Elem, int] = {}
        at = 0
        for t in window:
            self.offsets[t] = at
            at += self.qdims[t]
        self.dim = at

    def _fiber_coords(self, t: Elem, x: FdElement) -> np.ndarray:
        """Coordinates of a fiber element in the matrix unit basis order."""
        alg = self.bundle.coeff_algebra
        blocks = sorted(self.bundle.fiber_ideal(t).block_set)
        coords = []
        for j in blocks:
            coords.append(x.mats[j].reshape(alg.blocks[j] ** 2))
        if not coords:
            return np.zeros(0, dtype=complex)
        return np.concatenate(coords)

    def matrix(self, k: Kernel) -> np.ndarray:
        g = self.bundle.group
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for (s, t), a in k.data.items():
            if s not in self.window or t not in self.window:
                raise ValueError("kernel support leaves the window")
            ns = len(self.fiber_basis[s])
            nt = len(self.fiber_basis[t])
            if ns == 0 or nt == 0 or self.qdims[s] == 0 or self.qdims[t] == 0:
                continue
            st = g.mul(s, g.inv(t))
            tmat = np.zeros((ns, nt), dtype=complex)
            for col, bt in enumerate(self.fiber_basis[t]):
                tmat[:, col] = self._fiber_coords(s, self.bundle.mul(st, a, t, bt))
            w_t = self.onb_maps[t].reshape(nt, self.vdim, self.qdims[t])
            moved = np.einsum("ab,bvq->avq", tmat, w_t).reshape(
                ns * self.vdim, self.qdims[t]
            )
            block = self.gram_onb[s].conj().T @ moved
            r0, c0 = self.offsets[s], self.offsets[t]
            out[r0 : r0 + self.qdims[s], c0 : c0 + self.qdims[t]] += block
        return out

    def norm(self, k: Kernel) -> float:
        if self.dim == 0:
            return 0.0
        return float(np.linalg.norm(self.matrix(k), ord=2))


_REP_CACHE: "weakref.WeakKeyDictionary[FellBundle, Dict[tuple, _WindowRep]]"
_REP_CACHE = weakref.WeakKeyDictionary()


def window_rep(bundle: FellBundle, window: Window) -> _WindowRep:
    """Cached representation of M_F(B) for the given bundle and window."""
    per_bundle = _REP_CACHE.get(bundle)
    if per_bundle is None:
        per_bundle = {}
        _REP_CACHE[bundle] = per_bundle
    key = window.elements
    rep = per_bundle.get(key)
    if rep is None:
        rep = _WindowRep(bundle, window)
        per_bundle[key] = rep
    return rep


def pi_matrix(k: Kernel, window: Window) -> np.ndarray:
    """Matrix of pi(k) on the windowed Hilbert space, in orthonormal coordinates.

    Row and column chunks follow the window order.  The map is linear in k,
    sends k_mul(h, k) to pi(k) pi(h), and sends k_star(k) to the conjugate
    transpose.
    """
    return window_rep(k.bundle, window).matrix(k)


def mf_embed_norm(k: Kernel, window: Window) -> float:
    """C*-norm of the kernel in the windowed matrix algebra M_F(B).

    Monotone under window enlargement.  For a finite group with F = G this
    is the full cross sectional norm; for infinite groups it is a certified
    lower bound for it.
    """
    return window_rep(k.bundle, window).norm(k)


def section_vector(f: Section, window: Window, v: np.ndarray) -> np.ndarray:
    """Orthonormal coordinates of the elementary tensor f (x) v.

    The windowed Hilbert space is spanned by tensors of a section with a
    vector of the block representation space; this returns the coordinate
    vector that ``pi_matrix`` acts on.  Support of ``f`` must lie in the
    window and ``v`` must have one entry per coefficient block dimension.
    """
    rep = window_rep(f.bundle, window)
    vv = np.asarray(v, dtype=complex).reshape(rep.vdim)
    out = np.zeros(rep.dim, dtype=complex)
    for t, a in f.data.items():
        if t not in window:
            raise ValueError("section support leaves the window")
        if rep.qdims[t] == 0:
            continue
        raw = np.kron(rep._fiber_coords(t, a), vv)
        r0 = rep.offsets[t]
        out[r0 : r0 + rep.qdims[t]] = rep.gram_onb[t].conj().T @ raw
    return out


def validate_sub_expectation(
    sub: SubBundle,
    window: Window,
    samples: int = 8,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> float:
    """Largest sampled violation of the conditional expectation laws.

    Checks, on random fiber elements with indices drawn from the window:
    idempotence P_g(P_g(b)) = P_g(b), star compatibility P_{g^-1}(b*) =
    P_g(b)*, and both module laws P_{gh}(b a) = P_g(b) a and
    P_{hg}(a b) = a P_g(b) for a in the expected range at h.
    """
    bundle = sub.bundle
    g = bundle.group
    rng = np.random.default_rng(seed)
    elems = list(window.elements)
    worst = 0.0

    def rand_fiber(t: Elem) -> FdElement:
        fib = bundle.fiber_ideal(t)
        x = bundle.coeff_algebra.zero()
        for j in fib.block_set:
            d = bundle.coeff_algebra.blocks[j]
            x.mats[j] = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        return x

    for _ in range(samples):
        gg = elems[rng.integers(len(elems))]
        hh = elems[rng.integers(len(elems))]
        b = rand_fiber(gg)
        pb = sub.expect(gg, b)
        worst = max(worst, fiber_norm(bundle, gg, sub.expect(gg, pb) - pb))
        worst = max(
            worst,
            fiber_norm(
                bundle, g.inv(gg), sub.expect(g.inv(gg), bundle.star(gg, b)) - bundle.star(gg, pb)
            ),
        )
        a = sub.expect(hh, rand_fiber(hh))
        gh = g.mul(gg, hh)
        lhs = sub.expect(gh, bundle.mul(gg, b, hh, a))
        rhs = bundle.mul(gg, pb, hh, a)
        worst = max(worst, fiber_norm(bundle, gh, lhs - rhs))
        hg = g.mul(hh, gg)
        lhs = sub.expect(hg, bundle.mul(hh, a, gg, b))
        rhs = bundle.mul(hh, a, gg, pb)
        worst = max(worst, fiber_norm(bundle, hg, lhs - rhs))
    return worst


def cond_expectation_pf(
    sub: SubBundle,
    k: Kernel,
    window: Window,
    validate: bool = True,
    samples: int = 8,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> Kernel:
    """Windowed conditional expectation: entrywise expectation then compression.

    Entries outside window x window are dropped (compression by the window
    projection); surviving entries pass through the sub-bundle expectation.
    Idempotent by construction.  When ``validate`` is set the module laws of
    the expectation are sampled first and a violation raises ValueError.
    """
    if validate:
        worst = validate_sub_expectation(sub, window, samples=samples, seed=seed, tol=tol)
        if worst > tol:
            raise ValueError(
                f"conditional expectation violates its module laws (residual {worst:.3e})"
            )
    g = sub.bundle.group
    out: Dict[Tuple[Elem, Elem], FdElement] = {}
    for (s, t), a in k.data.items():
        if s in window and t in window:
            out[(s, t)] = sub.expect(g.mul(s, g.inv(t)), a)
    return Kernel(sub.bundle, out)
