"""Boundary action of a free group on Cantor space, with its witness net.

Points of X = {1..n}^infinity are infinite letter streams; a function that
only depends on the first d letters is stored as a dense table of n^d
values, one per depth-d cylinder.  All arithmetic refines operands to a
common depth and is exact: refining replicates values, never approximates.

A group element acts iff its reduced word is ab^{-1} with a, b positive:
theta_g maps the cylinder X_b onto X_a by swapping the prefix.  Words with
a positive letter after a negative one act nowhere (zero domain ideal).

The witness net xi_i assigns (1/sqrt(i)) times the cylinder indicator to
every positive word of length 1..i.  Because each length layer partitions
X, the net has bound exactly 1, and the defect at a symbol g = ab^{-1}
comes out to a rational number with denominator i; the closed forms are
pinned in the tests and cross-checked against a brute-force pointwise
evaluator at small i.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .algebra import ActionReport
from .groups import Elem, FreeGroup

Word = Tuple[int, ...]


class CantorDomainError(ValueError):
    """Function support sticks out of the domain cylinder."""


def _word_index(n: int, word: Word) -> int:
    idx = 0
    for letter in word:
        idx = idx * n + (letter - 1)
    return idx


class CylFun:
    """Locally constant function on the letter stream space.

    depth counts the letters the function reads; the table holds one value
    per depth-length word, indexed with the first letter most significant.
    """

    __slots__ = ("n", "depth", "table")

    def __init__(self, n: int, depth: int, table: np.ndarray):
        if n < 2:
            raise ValueError("alphabet needs at least two letters")
        table = np.asarray(table, dtype=complex).reshape(n**depth)
        self.n = n
        self.depth = depth
        self.table = table

    @staticmethod
    def constant(n: int, value: complex = 0.0) -> "CylFun":
        return CylFun(n, 0, np.array([value], dtype=complex))

    def refine_to(self, depth: int) -> "CylFun":
        if depth < self.depth:
            raise ValueError("refinement only increases depth")
        if depth == self.depth:
            return self
        reps = self.n ** (depth - self.depth)
        return CylFun(self.n, depth, np.repeat(self.table, reps))

    def canonical(self) -> "CylFun":
        """Collapse exactly constant sibling blocks down to minimal depth."""
        tbl, d = self.table, self.depth
        while d > 0:
            grouped = tbl.reshape(-1, self.n)
            if not (grouped == grouped[:, :1]).all():
                break
            tbl = grouped[:, 0].copy()
            d -= 1
        return CylFun(self.n, d, tbl)

    def _pair(self, other: "CylFun") -> Tuple[np.ndarray, np.ndarray, int]:
        if not isinstance(other, CylFun):
            raise TypeError("expected a cylinder function")
        if other.n != self.n:
            raise ValueError("alphabet size mismatch")
        d = max(self.depth, other.depth)
        return self.refine_to(d).table, other.refine_to(d).table, d

    def __add__(self, other: "CylFun") -> "CylFun":
        x, y, d = self._pair(other)
        return CylFun(self.n, d, x + y)

    def __sub__(self, other: "CylFun") -> "CylFun":
        x, y, d = self._pair(other)
        return CylFun(self.n, d, x - y)

    def __mul__(self, other: "CylFun") -> "CylFun":
        x, y, d = self._pair(other)
        return CylFun(self.n, d, x * y)

    def __rmul__(self, scalar) -> "CylFun":
        return CylFun(self.n, self.depth, complex(scalar) * self.table)

    def conj(self) -> "CylFun":
        return CylFun(self.n, self.depth, self.table.conj())

    def sup_norm(self) -> float:
        return float(np.abs(self.table).max(initial=0.0))

    def value_on(self, word: Word) -> complex:
        """Value on the cylinder of the given word; needs len(word) >= depth."""
        if len(word) < self.depth:
            raise ValueError("word shorter than the table depth")
        return complex(self.table[_word_index(self.n, word[: self.depth])])


def cyl_indicator(n: int, word: Iterable[int]) -> CylFun:
    w = tuple(int(x) for x in word)
    if any(not (1 <= x <= n) for x in w):
        raise ValueError("letters must lie in 1..n")
    tbl = np.zeros(n ** len(w), dtype=complex)
    tbl[_word_index(n, w)] = 1.0
    return CylFun(n, len(w), tbl)


def cyl_close(f: CylFun, g: CylFun, tol: float = 1e-12) -> bool:
    return (f - g).sup_norm() <= tol


@dataclass(frozen=True)
class PartialSymbol:
    """Reduced decomposition g = a b^{-1} of a free group element.

    ``pos`` is a, ``neg`` is b, both positive words; ``domain_zero`` marks
    elements whose reduced word has a positive letter after a negative one,
    which act on the empty set.
    """

    group: FreeGroup
    elem: Elem
    pos: Word
    neg: Word
    domain_zero: bool

    def inverse(self) -> "PartialSymbol":
        return partial_symbol(self.group, self.group.inv(self.elem))

    def domain_indicator(self) -> CylFun:
        """Unit of D_g, the indicator of X_a."""
        if self.domain_zero:
            raise ValueError("symbol acts nowhere")
        return cyl_indicator(self.group.rank, self.pos)


def partial_symbol(group: FreeGroup, g: Elem) -> PartialSymbol:
    group.check(g)
    letters = g.data
    split = 0
    while split < len(letters) and letters[split] > 0:
        split += 1
    tail = letters[split:]
    if any(l > 0 for l in tail):
        return PartialSymbol(group, g, (), (), True)
    pos = tuple(letters[:split])
    neg = tuple(-l for l in reversed(tail))
    return PartialSymbol(group, g, pos, neg, False)


def theta_apply(sym: PartialSymbol, f: CylFun, tol: float = 1e-12) -> CylFun:
    """Push f through theta_g, the prefix swap X_b -> X_a.

    f must vanish outside X_b at its depth; the output depth shifts by
    |a| - |b| and the values are carried over unchanged.
    """
    if sym.domain_zero:
        raise ValueError("symbol acts nowhere")
    n = sym.group.rank
    if f.n != n:
        raise ValueError("alphabet size mismatch")
    a, b = sym.pos, sym.neg
    work = f.refine_to(max(f.depth, len(b)))
    width = n ** (work.depth - len(b))
    start = _word_index(n, b) * width
    outside = np.abs(
        np.concatenate([work.table[:start], work.table[start + width :]])
    )
    if outside.max(initial=0.0) > tol:
        raise CantorDomainError("support leaves the domain cylinder")
    inner = work.table[start : start + width]
    out_depth = work.depth - len(b) + len(a)
    out = np.zeros(n**out_depth, dtype=complex)
    out_start = _word_index(n, a) * width
    out[out_start : out_start + width] = inner
    return CylFun(n, out_depth, out)


def positive_words(n: int, length: int) -> Iterator[Word]:
    return itertools.product(range(1, n + 1), repeat=length)


@dataclass(frozen=True)
class CuntzWitness:
    """The net member xi_i: positive words up to length i, scaled indicators.

    The table of values is never materialized; ``value`` builds single
    indicators on demand and the defect evaluator walks the support by
    layers.  ``include_identity`` adds the empty word to the support with
    the same scale; it is off by default, which is what makes the bound
    come out to exactly 1 instead of (i+1)/i.
    """

    group: FreeGroup
    i: int
    include_identity: bool = False

    @property
    def scale(self) -> float:
        return 1.0 / float(np.sqrt(self.i))

    def min_length(self) -> int:
        return 0 if self.include_identity else 1

    def is_eligible(self, word: Word) -> bool:
        if any(l <= 0 for l in word):
            return False
        return self.min_length() <= len(word) <= self.i

    def value(self, g: Elem) -> CylFun:
        self.group.check(g)
        if not self.is_eligible(g.data):
            return CylFun.constant(self.group.rank, 0.0)
        return self.scale * cyl_indicator(self.group.rank, g.data)

    def support_size(self) -> int:
        n = self.group.rank
        return sum(n**k for k in range(self.min_length(), self.i + 1))

    def support_words(self) -> Iterator[Word]:
        n = self.group.rank
        for k in range(self.min_length(), self.i + 1):
            yield from positive_words(n, k)


def xi_witness(i: int, n: int, include_identity: bool = False) -> CuntzWitness:
    if i < 1:
        raise ValueError("witness index starts at 1")
    return CuntzWitness(FreeGroup(n), i, include_identity)


def cantor_witness_bound(w: CuntzWitness) -> float:
    """sup norm of sum_g xi(g)* xi(g), accumulated word by word.

    Every summand is (1/i) times an indicator, so the table is tallied in
    integer counts and divided once at the end; the result is the nearest
    float to the true rational value, with no accumulation drift.
    """
    n = w.group.rank
    depths: Dict[int, np.ndarray] = {}
    for k in range(w.min_length(), w.i + 1):
        tbl = np.zeros(n**k, dtype=np.int64)
        for word in positive_words(n, k):
            tbl[_word_index(n, word)] += 1
        depths[k] = tbl
    counts = _merge_counts(n, depths, 0)
    return float(counts.max(initial=0)) / float(w.i)


def _merge_counts(n: int, depths: Dict[int, np.ndarray], floor: int) -> np.ndarray:
    top = max(depths, default=floor)
    top = max(top, floor)
    total = np.zeros(n**top, dtype=np.int64)
    for d, tbl in depths.items():
        total += np.repeat(tbl, n ** (top - d))
    return total


def _cylinder_meet(u: Word, v: Word) -> Optional[Word]:
    # X_u and X_v are nested or disjoint; return the deeper word or None.
    short, longer = (u, v) if len(u) <= len(v) else (v, u)
    return longer if longer[: len(short)] == short else None


def cuntz_ap_defect(
    i: int,
    g: Union[Elem, PartialSymbol],
    group: Optional[FreeGroup] = None,
    include_identity: bool = False,
) -> float:
    """Defect sup|1_g - sum_h xi_i(h) theta_g(1_{g^-1} xi_i(g^-1 h))|.

    The sum is walked over s = g^{-1} h in the support of xi_i; each term
    is evaluated with exact index arithmetic (the indicators involved are
    single cylinders, so products and theta images are prefix bookkeeping)
    and tallied as an integer count per cylinder, every term carrying the
    same weight 1/i.  The final table i*1_g - counts is integer valued and
    one division yields the defect exactly, at whatever depth a refinement
    would have used.
    """
    if isinstance(g, PartialSymbol):
        sym = g
    else:
        if group is None:
            raise ValueError("group required when passing a raw element")
        sym = partial_symbol(group, g)
    if sym.domain_zero:
        raise ValueError("symbol acts nowhere; no defect to evaluate")
    grp = sym.group
    n = grp.rank
    a, b = sym.pos, sym.neg
    i = int(i)
    if i < 1:
        raise ValueError("witness index starts at 1")
    min_len = 0 if include_identity else 1
    acc: Dict[int, np.ndarray] = {}
    for k in range(min_len, i + 1):
        for s in positive_words(n, k):
            # h = g s by explicit cancellation of b against the prefix of s
            cut = 0
            while cut < len(b) and cut < k and b[cut] == s[cut]:
                cut += 1
            if cut < len(b):
                # cancellation stalls before b is used up: a negative letter
                # survives inside h, so xi_i(h) = 0
                continue
            h: Word = a + s[cut:]
            if not (min_len <= len(h) <= i):
                continue
            # 1_{X_b} 1_{X_s}: s extends b here, so the product is 1_{X_s};
            # theta_g turns it into the cylinder a + s-tail
            image: Word = a + s[cut:]
            meet = _cylinder_meet(h, image)
            if meet is None:
                continue
            depth = len(meet)
            slot = acc.get(depth)
            if slot is None:
                slot = np.zeros(n**depth, dtype=np.int64)
                acc[depth] = slot
            slot[_word_index(n, meet)] += 1
    counts = _merge_counts(n, acc, len(a))
    width = counts.size // (n ** len(a)) if a else counts.size
    start = _word_index(n, a) * width if a else 0
    numerator = -counts
    numerator[start : start + width] += i
    return float(np.abs(numerator).max(initial=0)) / float(i)


@dataclass(frozen=True)
class CuntzRow:
    i: int
    word: str
    defect: float
    predicted: float
    residual: float


def cuntz_defect_table(
    n: int,
    i_max: int,
    targets: Sequence[Elem],
    include_identity: bool = False,
) -> List[CuntzRow]:
    """Defect trace rows (i, word, defect, |word|/i prediction, residual).

    The |word|/i law holds for positive words and the identity once
    i >= |word|; rows outside its reach carry predicted = -1 and a zero
    residual so the applicable checks stay separable downstream.
    """
    grp = FreeGroup(n)
    rows: List[CuntzRow] = []
    for i in range(1, i_max + 1):
        for t in targets:
            sym = partial_symbol(grp, t)
            defect = cuntz_ap_defect(i, sym, include_identity=include_identity)
            length = grp.word_length(t)
            lawful = (
                (grp.is_positive(t) or t == grp.identity)
                and length <= i
                and not include_identity
            )
            predicted = length / i if lawful else -1.0
            rows.append(
                CuntzRow(
                    i=i,
                    word=grp.format_elem(t),
                    defect=defect,
                    predicted=predicted,
                    residual=defect - predicted if lawful else 0.0,
                )
            )
    return rows


def validate_cantor_action(
    n: int,
    window: int = 2,
    samples: int = 2,
    seed: int = 0,
    tol: float = 1e-12,
) -> ActionReport:
    """Axiom check of the prefix-swap action on ball(window).

    Identity, inverse round trips on random domain-supported functions,
    and the composition law theta_g(theta_h(f)) = theta_{gh}(f) whenever
    the left side is defined.
    """
    grp = FreeGroup(n)
    rng = np.random.default_rng(seed)
    report = ActionReport()
    ball = grp.ball(window)
    syms = [partial_symbol(grp, g) for g in ball]
    syms = [s for s in syms if not s.domain_zero]

    def random_in(prefix: Word, extra_depth: int = 2) -> CylFun:
        depth = len(prefix) + extra_depth
        tbl = rng.standard_normal(n**depth) + 1j * rng.standard_normal(n**depth)
        raw = CylFun(n, depth, tbl)
        unit = cyl_indicator(n, prefix) if prefix else CylFun.constant(n, 1.0)
        return raw * unit

    e_sym = partial_symbol(grp, grp.identity)
    for _ in range(samples):
        f = random_in(())
        report.add("identity-map", "e", (theta_apply(e_sym, f) - f).sup_norm(), tol)

    for sym in syms:
        label = grp.format_elem(sym.elem)
        for _ in range(samples):
            f = random_in(sym.neg)
            back = theta_apply(sym.inverse(), theta_apply(sym, f))
            report.add("inverse-map", label, (back - f).sup_norm(), tol)

    for s_g in syms:
        for s_h in syms:
            meet = _cylinder_meet(s_h.pos, s_g.neg)
            if meet is None:
                continue
            label = f"{grp.format_elem(s_g.elem)}∘{grp.format_elem(s_h.elem)}"
            for _ in range(samples):
                mid = random_in(meet)
                f = theta_apply(s_h.inverse(), mid)
                lhs = theta_apply(s_g, mid)
                gh = partial_symbol(grp, grp.mul(s_g.elem, s_h.elem))
                rhs = theta_apply(gh, f)
                report.add("composition-map", label, (lhs - rhs).sup_norm(), tol)
    return report


@dataclass(frozen=True)
class Arrow:
    """Coarsened groupoid arrow: a source cylinder and an acting symbol."""

    source: Word
    g: Elem


@dataclass(frozen=True)
class GroupoidTable:
    group: FreeGroup
    depth: int
    radius: int
    arrows: Tuple[Arrow, ...]

    def symbol(self, arrow: Arrow) -> PartialSymbol:
        return partial_symbol(self.group, arrow.g)

    def range_word(self, arrow: Arrow) -> Word:
        sym = self.symbol(arrow)
        return sym.pos + arrow.source[len(sym.neg) :]

    def is_unit(self, arrow: Arrow) -> bool:
        return arrow.g == self.group.identity

    def invert(self, arrow: Arrow) -> Arrow:
        return Arrow(self.range_word(arrow), self.group.inv(arrow.g))

    def unit_at(self, word: Word) -> Arrow:
        return Arrow(word, self.group.identity)

    def compose(self, first: Arrow, second: Arrow) -> Optional[Arrow]:
        """first . second, applying second's symbol first.

        Defined on representatives when the range word of ``second``
        matches the source of ``first`` exactly; the composite sits at
        second's source with the product symbol.
        """
        if self.range_word(second) != first.source:
            return None
        return Arrow(second.source, self.group.mul(first.g, second.g))


def spectral_groupoid(n: int, depth: int, radius: int) -> GroupoidTable:
    """Arrows of the truncated boundary groupoid at cylinder coarsening.

    One arrow per pair (depth-d cylinder inside X_b, symbol g = ab^{-1}
    with g in ball(radius)); the uncoarsened unit space is a Cantor set,
    so the table reports exactly what depth-d observables distinguish.
    """
    grp = FreeGroup(n)
    arrows: List[Arrow] = []
    for g in grp.ball(radius):
        sym = partial_symbol(grp, g)
        if sym.domain_zero or len(sym.neg) > depth:
            continue
        for word in positive_words(n, depth):
            if word[: len(sym.neg)] == sym.neg:
                arrows.append(Arrow(word, g))
    return GroupoidTable(group=grp, depth=depth, radius=radius, arrows=tuple(arrows))


def validate_groupoid(table: GroupoidTable) -> ActionReport:
    """Exhaustive axiom check on the enumerated arrow table."""
    report = ActionReport()
    grp = table.group
    for arrow in table.arrows:
        label = f"({''.join(map(str, arrow.source))},{grp.format_elem(arrow.g)})"
        inv = table.invert(arrow)
        double = table.invert(inv)
        report.add(
            "inversion-involutive", label, 0.0 if double == arrow else 1.0, 0.5
        )
        report.add(
            "inverse-source-is-range",
            label,
            0.0 if inv.source == table.range_word(arrow) else 1.0,
            0.5,
        )
        left_unit = table.unit_at(table.range_word(arrow))
        right_unit = table.unit_at(arrow.source)
        report.add(
            "unit-absorbs",
            label,
            0.0
            if table.compose(left_unit, arrow) == arrow
            and table.compose(arrow, right_unit) == arrow
            else 1.0,
            0.5,
        )
    composable = [
        (x, y)
        for x in table.arrows
        for y in table.arrows
        if table.compose(x, y) is not None
    ]
    for x, y in composable:
        xy = table.compose(x, y)
        for z in table.arrows:
            yz = table.compose(y, z)
            if yz is None:
                continue
            lhs = table.compose(xy, z)
            rhs = table.compose(x, yz)
            label = "assoc"
            report.add(
                "associativity",
                label,
                0.0 if lhs is not None and rhs is not None and lhs == rhs else 1.0,
                0.5,
            )
    return report
