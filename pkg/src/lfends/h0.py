"""Dimension-zero end cohomology as locally constant functions on ends.

A class is a function on one tower level, identified with its pullbacks to
deeper levels.  Its canonical form lives at the lowest level it factors
through.  Coefficients are exact integers, or residues modulo a prime ``p``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import DepthOutOfRange, ParseError, PrefixTooShallow, TowerMismatch
from .tower import EndPrefix, EndTower, TowerMap, check_prefix, tree_realization


@dataclass(frozen=True)
class Cochain:
    """Integer values on the sorted level ``tower.level(level)``."""

    tower: EndTower = field(repr=False)
    level: int
    values: tuple
    modulus: int | None = None

    def __post_init__(self):
        if not 1 <= self.level <= self.tower.depth:
            raise DepthOutOfRange(f"level {self.level} outside 1..{self.tower.depth}")
        if len(self.values) != len(self.tower.level(self.level)):
            raise ValueError("one value per component of the level is required")
        if self.modulus is not None:
            object.__setattr__(self, "values", tuple(v % self.modulus for v in self.values))

    def value(self, u) -> int:
        return self.values[self.tower.index(self.level, u)]

    def as_dict(self) -> dict:
        return dict(zip(self.tower.level(self.level), self.values))


class H0Class(Cochain):
    """A cochain in canonical form; equal classes compare equal."""

    def _other(self, other):
        if isinstance(other, int):
            return constant(self.tower, other, self.modulus)
        if self.tower != other.tower or self.modulus != other.modulus:
            raise TowerMismatch("classes live on different towers or coefficient rings")
        return other

    def __add__(self, other):
        return add(self, self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, scalar_mul(-1, self._other(other)))

    def __neg__(self):
        return scalar_mul(-1, self)

    def __mul__(self, other):
        if isinstance(other, int):
            return scalar_mul(other, self)
        return pointwise_mul(self, self._other(other))

    def __rmul__(self, other):
        return scalar_mul(other, self)

    def is_zero(self) -> bool:
        return self.level == 1 and not any(self.values)


def cochain(tower: EndTower, level: int, values, modulus: int | None = None) -> Cochain:
    """Cochain from a sequence aligned with the level or a dict (missing ids are 0)."""
    if isinstance(values, dict):
        values = tuple(values.get(u, 0) for u in tower.level(level))
    return Cochain(tower, level, tuple(int(v) for v in values), modulus)


def pullback(c: Cochain, to_level: int) -> Cochain:
    t = c.tower
    if not c.level <= to_level <= t.depth:
        raise DepthOutOfRange(f"cannot pull level {c.level} back to level {to_level}")
    vals = c.as_dict()
    out = tuple(vals[t.ancestor(to_level, u, c.level)] for u in t.level(to_level))
    return Cochain(t, to_level, out, c.modulus)


def normalize(c: Cochain) -> H0Class:
    """Push the cochain down through bonds while it is constant on every fibre."""
    t = c.tower
    level, vals = c.level, c.as_dict()
    while level > 1:
        below = {}
        ok = True
        for u, x in vals.items():
            p = t.parent(level, u)
            if below.setdefault(p, x) != x:
                ok = False
                break
        if not ok or len(below) != len(t.level(level - 1)):
            break
        level, vals = level - 1, below
    return H0Class(t, level, tuple(vals[u] for u in t.level(level)), c.modulus)


def constant(tower: EndTower, value: int = 1, modulus: int | None = None) -> H0Class:
    return H0Class(tower, 1, (value,) * len(tower.level(1)), modulus)


def indicator(tower: EndTower, level: int, u, modulus: int | None = None) -> H0Class:
    """Characteristic function of the ends through component ``u``."""
    vals = tuple(int(w == u) for w in tower.level(level))
    return normalize(Cochain(tower, level, vals, modulus))


def _common(xs):
    t, p = xs[0].tower, xs[0].modulus
    for x in xs[1:]:
        if x.tower != t or x.modulus != p:
            raise TowerMismatch("classes live on different towers or coefficient rings")
    lvl = max(x.level for x in xs)
    return t, p, lvl, [pullback(x, lvl).values for x in xs]


def add(*xs) -> H0Class:
    t, p, lvl, vs = _common(xs)
    return normalize(Cochain(t, lvl, tuple(map(sum, zip(*vs))), p))


def scalar_mul(a: int, x) -> H0Class:
    return normalize(Cochain(x.tower, x.level, tuple(a * v for v in x.values), x.modulus))


def pointwise_mul(*xs) -> H0Class:
    t, p, lvl, vs = _common(xs)
    out = []
    for col in zip(*vs):
        prod = 1
        for v in col:
            prod *= v
        out.append(prod)
    return normalize(Cochain(t, lvl, tuple(out), p))


def evaluate(x: Cochain, eps: EndPrefix) -> int:
    if eps.depth < x.level:
        raise PrefixTooShallow(f"class needs level {x.level}, prefix has depth {eps.depth}")
    return x.value(eps.at(x.level))


# -- bases ---------------------------------------------------------------------

@dataclass(frozen=True)
class H0Basis:
    """Indicators of ``(level, component)`` pairs forming a free basis.

    ``thread`` is set for the ray-preferring rule; ``reduced`` bases omit the
    thread's level-1 indicator.
    """

    tower: EndTower = field(repr=False)
    elements: tuple
    rule: str
    thread: tuple | None = None
    reduced: bool = False
    modulus: int | None = None

    def __len__(self):
        return len(self.elements)

    @property
    def depth(self) -> int:
        return self.tower.depth

    def classes(self) -> list[H0Class]:
        return [indicator(self.tower, i, u, self.modulus) for i, u in self.elements]

    def up_to(self, k: int) -> tuple:
        return tuple(e for e in self.elements if e[0] <= k)

    def representative(self, i: int, fiber) -> object:
        """Representative of a bond fibre in level ``i``."""
        if self.thread is not None and self.thread[i - 1] in fiber:
            return self.thread[i - 1]
        return min(fiber)


def _fibers(t: EndTower, i: int) -> dict:
    """Fibres of the bond ``U_i -> U_{i-1}``, keyed by the parent."""
    out = {}
    for w in t.level(i):
        out.setdefault(t.parent(i, w), []).append(w)
    return out


def _build_basis(t: EndTower, thread, reduced, modulus) -> H0Basis:
    rule = "min-id" if thread is None else "ray-preferring"
    B = H0Basis(t, (), rule, thread, reduced, modulus)
    elems = [(1, u) for u in t.level(1) if not (reduced and u == thread[0])]
    for i in range(2, t.depth + 1):
        for parent, fiber in sorted(_fibers(t, i).items()):
            r = B.representative(i, fiber)
            elems += [(i, w) for w in fiber if w != r]
    return H0Basis(t, tuple(elems), rule, thread, reduced, modulus)


def basis(t: EndTower, rule="min-id", modulus: int | None = None) -> H0Basis:
    """Level-1 indicators plus the non-representative members of every fibre.

    ``rule`` is ``"min-id"`` or an :class:`EndPrefix` for the ray-preferring
    choice.
    """
    if t.depth == 0:
        raise DepthOutOfRange("tower has no levels")
    thread = None
    if isinstance(rule, EndPrefix):
        thread = check_prefix(t, rule).thread
    elif rule != "min-id":
        raise ValueError(f"unknown representative rule {rule!r}")
    return _build_basis(t, thread, False, modulus)


def reduced_basis(t: EndTower, eps: EndPrefix, modulus: int | None = None) -> H0Basis:
    """Basis of the classes vanishing on ``eps``; size ``|U_n| - 1``."""
    check_prefix(t, eps)
    return _build_basis(t, eps.thread, True, modulus)


def expand_in_basis(x: Cochain, B: H0Basis) -> tuple:
    """Coefficients of ``x`` in ``B`` (aligned with ``B.elements``).

    Works top-down: the coefficient of a non-representative ``w`` is its value
    minus the value of its fibre's representative.
    """
    t = B.tower
    if x.tower != t:
        raise TowerMismatch("class and basis live on different towers")
    f = pullback(x, t.depth).as_dict()
    coeff = {}
    for i in range(t.depth, 1, -1):
        below = {}
        for parent, fiber in _fibers(t, i).items():
            r = B.representative(i, fiber)
            for w in fiber:
                if w != r:
                    coeff[(i, w)] = f[w] - f[r]
            below[parent] = f[r]
        f = below
    for u, v in f.items():
        coeff[(1, u)] = v
    if B.reduced:
        v = coeff.pop((1, B.thread[0]))
        if v % B.modulus if B.modulus else v:
            raise ValueError("class does not vanish on the base end")
    out = tuple(coeff[e] for e in B.elements)
    if B.modulus is not None:
        out = tuple(c % B.modulus for c in out)
    return out


def combine(coeffs, B: H0Basis) -> H0Class:
    """The class ``sum(c * element)``."""
    t = B.tower
    vals = {u: 0 for u in t.level(t.depth)}
    for c, (i, w) in zip(coeffs, B.elements):
        if c:
            for u in t.level(t.depth):
                if t.ancestor(t.depth, u, i) == w:
                    vals[u] += c
    return normalize(cochain(t, t.depth, vals, B.modulus))


def basis_matrix(B: H0Basis, k: int) -> list[list[int]]:
    """Rows: the basis elements of levels ``<= k`` pulled back to level ``k``."""
    t = B.tower
    cols = t.level(k)
    return [[int(t.ancestor(k, u, i) == w) for u in cols] for i, w in B.up_to(k)]


def determinant(matrix, modulus: int | None = None) -> int:
    """Exact determinant, over Z or modulo a prime."""
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise ValueError("matrix is not square")
    if modulus is not None:
        return _det_mod(matrix, modulus)
    return _det_int(matrix)


def _det_mod(matrix, p: int) -> int:
    n = len(matrix)
    M = [[v % p for v in row] for row in matrix]
    det = 1
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c]), None)
        if piv is None:
            return 0
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        det = det * M[c][c] % p
        inv = pow(M[c][c], -1, p)
        for r in range(c + 1, n):
            f = M[r][c] * inv % p
            if f:
                M[r] = [(a - f * b) % p for a, b in zip(M[r], M[c])]
    return det % p


def _det_int(matrix) -> int:
    # Unit pivots first: exact integer row operations that keep sparse rows
    # sparse.  Whatever block is left gets fraction-free Bareiss elimination.
    n = len(matrix)
    rows = [{j: v for j, v in enumerate(row) if v} for row in matrix]
    det = 1
    c = 0
    while c < n:
        piv = next((r for r in range(c, n) if rows[r].get(c) in (1, -1)), None)
        if piv is None:
            break
        if piv != c:
            rows[c], rows[piv] = rows[piv], rows[c]
            det = -det
        pr = rows[c]
        unit = pr[c]
        det *= unit
        for r in range(c + 1, n):
            f = rows[r].get(c)
            if f:
                f *= unit
                row = rows[r]
                for j, v in pr.items():
                    x = row.get(j, 0) - f * v
                    if x:
                        row[j] = x
                    else:
                        row.pop(j, None)
        c += 1
    rest = [[rows[r].get(j, 0) for j in range(c, n)] for r in range(c, n)]
    return det * _bareiss(rest)


def _bareiss(M) -> int:
    n = len(M)
    if n == 0:
        return 1
    M = [list(row) for row in M]
    sign, prev = 1, 1
    for c in range(n - 1):
        piv = next((r for r in range(c, n) if M[r][c]), None)
        if piv is None:
            return 0
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            sign = -sign
        for r in range(c + 1, n):
            for j in range(c + 1, n):
                M[r][j] = (M[r][j] * M[c][c] - M[r][c] * M[c][j]) // prev
            M[r][c] = 0
        prev = M[c][c]
    return sign * M[n - 1][n - 1]


def split_class(x: H0Class, eps: EndPrefix):
    """``(x(eps), x - x(eps)·1)``; the second part vanishes on ``eps``."""
    r = evaluate(x, eps)
    return r, x - constant(x.tower, r, x.modulus)


def induced_hom(m: TowerMap, x: Cochain) -> H0Class:
    """Pull a class on the target back along a tower map: ``x ∘ m``."""
    if x.level > m.depth:
        raise DepthOutOfRange(f"map has depth {m.depth}, class needs level {x.level}")
    vals = x.as_dict()
    lvl = m.maps[x.level - 1]
    out = tuple(vals[lvl[u]] for u in m.source.level(x.level))
    return normalize(Cochain(m.source, x.level, out, x.modulus))


def nobeling_basis(t: EndTower, modulus: int | None = None):
    """Free basis of locally constant functions on the space presented by ``t``.

    The tower is realized as a rooted tree first; returns ``(basis, realized
    tower)``.
    """
    _, _, realized = tree_realization(t)
    return basis(realized, "min-id", modulus), realized


def random_class(t: EndTower, level: int, rng: random.Random, lo=-9, hi=9, modulus=None) -> H0Class:
    vals = tuple(rng.randint(lo, hi) for _ in t.level(level))
    return normalize(Cochain(t, level, vals, modulus))


# -- h0 v1 -----------------------------------------------------------------------

def format_h0(x: Cochain) -> str:
    lines = ["h0 v1", f"level {x.level}"]
    lines += [f"val {k} {v}" for k, v in enumerate(x.values) if v]
    return "\n".join(lines) + "\n"


def parse_h0(text: str, tower: EndTower, modulus: int | None = None) -> H0Class:
    level = None
    vals = {}
    header = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if not header:
            if parts != ["h0", "v1"]:
                raise ParseError("expected 'h0 v1' header", lineno)
            header = True
            continue
        try:
            nums = [int(p) for p in parts[1:]]
        except ValueError:
            raise ParseError(f"non-integer field in {line!r}", lineno) from None
        if parts[0] == "level" and len(nums) == 1 and level is None:
            level = nums[0]
            if not 1 <= level <= tower.depth:
                raise ParseError(f"level {level} outside 1..{tower.depth}", lineno)
        elif parts[0] == "val" and len(nums) == 2 and level is not None:
            k, v = nums
            if not 0 <= k < len(tower.level(level)) or k in vals:
                raise ParseError(f"bad component index {k}", lineno)
            vals[k] = v
        else:
            raise ParseError(f"unrecognised line {line!r}", lineno)
    if level is None:
        raise ParseError("missing level line")
    values = tuple(vals.get(k, 0) for k in range(len(tower.level(level))))
    return normalize(Cochain(tower, level, values, modulus))
