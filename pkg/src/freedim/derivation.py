"""Derivative calculi for *-polynomials with values in the tensor algebra.

Elements of the tensor algebra are sums ``lam * (w (x) v) J^d`` with words
``w, v``. The right leg lives in the opposite algebra, so products read

    (a (x) b)(c (x) d) = ac (x) db

and the bimodule action is ``a . (u (x) v) . b = au (x) vb``. The flag ``d``
marks composition with the adjoint map ``J`` and only appears in the raw
(unsplit) derivative used for the real derivative of a polynomial map.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .ncpoly import (
    DROP_TOL, Letter, Polynomial, PolyTuple, free_reduce, is_selfadjoint,
    is_skewadjoint, sa_parts, word_key, word_star, word_str,
)

__all__ = [
    "TensorElement", "TensorMatrix", "LinnellWitness", "partial_deriv",
    "raw_deriv", "d_s", "d_sa", "m_f", "d_u", "d_u_blocks", "linnell_witness",
]

Key = tuple  # (w, v, d)


class TensorElement:
    """Reduced formal sum of ``lam (w (x) v) J^d``."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Key, complex] | Iterable = ()):
        acc: dict[Key, complex] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for (w, v, d), c in items:
            key = (tuple(w), tuple(v), int(d))
            acc[key] = acc.get(key, 0j) + complex(c)
        self._terms = {k: c for k, c in acc.items()
                       if abs(c.real) >= DROP_TOL or abs(c.imag) >= DROP_TOL}

    @classmethod
    def zero(cls) -> "TensorElement":
        return cls()

    @classmethod
    def one(cls) -> "TensorElement":
        return cls({((), (), 0): 1.0})

    @classmethod
    def simple(cls, w=(), v=(), c: complex = 1.0, d: int = 0) -> "TensorElement":
        return cls({(tuple(w), tuple(v), d): c})

    @classmethod
    def from_polys(cls, a: Polynomial, b: Polynomial) -> "TensorElement":
        """``a (x) b`` for polynomials, expanded bilinearly."""
        acc = {}
        for w, c1 in a.terms.items():
            for v, c2 in b.terms.items():
                acc[(w, v, 0)] = acc.get((w, v, 0), 0j) + c1 * c2
        return cls(acc)

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items(),
                      key=lambda t: (word_key(t[0][0]), word_key(t[0][1]), t[0][2]))

    def is_zero(self) -> bool:
        return not self._terms

    def is_split(self) -> bool:
        return all(d == 0 for (_, _, d) in self._terms)

    def __add__(self, other: "TensorElement") -> "TensorElement":
        acc = dict(self._terms)
        for k, c in other._terms.items():
            acc[k] = acc.get(k, 0j) + c
        return TensorElement(acc)

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, lam: complex) -> "TensorElement":
        return TensorElement({k: lam * c for k, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.scale(other)
        if not (self.is_split() and other.is_split()):
            raise ValueError("products are only defined for split elements (d=0)")
        acc: dict[Key, complex] = {}
        for (a, b, _), c1 in self._terms.items():
            for (c, d, _), c2 in other._terms.items():
                key = (a + c, d + b, 0)
                acc[key] = acc.get(key, 0j) + c1 * c2
        return TensorElement(acc)

    __rmul__ = scale

    def act(self, left: Polynomial | None = None, right: Polynomial | None = None) -> "TensorElement":
        """Bimodule action ``left . self . right`` = ``(left u) (x) (v right)``."""
        if left is None and right is None:
            return self
        return _act_unsplit(self, left, right)

    def map_words(self, fn) -> "TensorElement":
        acc: dict[Key, complex] = {}
        for (w, v, d), c in self._terms.items():
            key = (fn(w), fn(v), d)
            acc[key] = acc.get(key, 0j) + c
        return TensorElement(acc)

    def unitary_reduce(self) -> "TensorElement":
        """Apply ``X_j X_j' -> I`` and ``X_j' X_j -> I`` in both legs."""
        return self.map_words(free_reduce)

    def __eq__(self, other):
        if not isinstance(other, TensorElement):
            return NotImplemented
        return self._terms == other._terms

    def allclose(self, other: "TensorElement", tol: float = 1e-12) -> bool:
        return all(abs(c) < tol for c in (self - other)._terms.values())

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for (w, v, d), c in self.items():
            cs = "" if c == 1 else ("-" if c == -1 else f"({c.real:g}{c.imag:+g}i)"
                                    if c.imag else f"{c.real:g}")
            s = f"{cs}{'' if cs in ('', '-') else ' '}[{word_str(w)} (x) {word_str(v)}]"
            parts.append(s + (" J" if d else ""))
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__

    def to_json(self) -> dict:
        return {"terms": [{"w": word_str(w), "v": word_str(v), "d": d, "re": c.real, "im": c.imag}
                          for (w, v, d), c in self.items()]}


def _act_unsplit(t: TensorElement, left, right) -> TensorElement:
    acc = {}
    for (w, v, d), c in t.terms.items():
        ls = left.terms.items() if left is not None else [((), 1.0)]
        rs = right.terms.items() if right is not None else [((), 1.0)]
        for a, ca in ls:
            for b, cb in rs:
                key = (a + w, v + b, d)
                acc[key] = acc.get(key, 0j) + c * ca * cb
    return TensorElement(acc)


@dataclass
class TensorMatrix:
    """Rectangular array of tensor elements.

    ``block == "2x2"`` means rows and columns come in (sa, sk) pairs: the
    entry at ``(2i+a, 2j+b)`` is block ``(a, b)`` of the ``(i, j)`` pair.
    """

    entries: list
    block: str = "plain"

    def __post_init__(self):
        widths = {len(r) for r in self.entries}
        if len(widths) > 1:
            raise ValueError("ragged TensorMatrix")
        if self.block not in ("plain", "2x2"):
            raise ValueError(f"unknown block tag {self.block!r}")
        if self.block == "2x2" and (self.rows % 2 or self.cols % 2):
            raise ValueError("2x2 block matrices need even shape")

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    @classmethod
    def zeros(cls, rows: int, cols: int, block: str = "plain") -> "TensorMatrix":
        return cls([[TensorElement() for _ in range(cols)] for _ in range(rows)], block)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __matmul__(self, other: "TensorMatrix") -> "TensorMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = TensorElement()
                for l in range(self.cols):
                    if self.entries[i][l].is_zero() or other.entries[l][j].is_zero():
                        continue
                    acc = acc + self.entries[i][l] * other.entries[l][j]
                row.append(acc)
            out.append(row)
        return TensorMatrix(out, self.block if self.block == other.block else "plain")

    def map(self, fn) -> "TensorMatrix":
        return TensorMatrix([[fn(e) for e in r] for r in self.entries], self.block)

    def block_at(self, i: int, j: int) -> "TensorMatrix":
        return TensorMatrix([[self.entries[2 * i + a][2 * j + b] for b in range(2)] for a in range(2)], "2x2")

    def is_zero(self) -> bool:
        return all(e.is_zero() for r in self.entries for e in r)

    def __eq__(self, other):
        return isinstance(other, TensorMatrix) and self.entries == other.entries

    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols, "block": self.block,
                "entries": [[e.to_json() for e in r] for r in self.entries]}

    def __str__(self):
        return "\n".join(" | ".join(str(e) for e in r) for r in self.entries)


# ------------------------------------------------------------- derivatives

def _check_index(j: int, n: int):
    if not 1 <= j <= n:
        raise IndexError(f"variable index {j} outside 1..{n}")


def occurrences(w, j: int):
    """Yield ``(prefix, letter, suffix)`` for each occurrence of ``X_j^{+-}``."""
    for pos, l in enumerate(w):
        if l.gen == j:
            yield w[:pos], l, w[pos + 1:]


def raw_deriv(f: Polynomial, j: int) -> TensorElement:
    """Unsplit derivative: each occurrence gives ``prefix (x) suffix`` with ``d=1`` when starred."""
    _check_index(j, f.arity)
    acc = {}
    for w, c in f.terms.items():
        for pre, l, suf in occurrences(w, j):
            key = (pre, suf, int(l.starred))
            acc[key] = acc.get(key, 0j) + c
    return TensorElement(acc)


def partial_deriv(f: Polynomial, j: int, flavor: str = "sa") -> TensorElement:
    """Derivation in variable ``j``.

    ``sa``: X_j and X_j' both map to ``I (x) I``.
    ``sk``: X_j maps to ``I (x) I`` and X_j' to ``-I (x) I``.
    """
    if flavor not in ("sa", "sk"):
        raise ValueError(f"unknown flavor {flavor!r}")
    _check_index(j, f.arity)
    acc = {}
    for w, c in f.terms.items():
        for pre, l, suf in occurrences(w, j):
            sgn = -1.0 if (flavor == "sk" and l.starred) else 1.0
            key = (pre, suf, 0)
            acc[key] = acc.get(key, 0j) + sgn * c
    return TensorElement(acc)


def d_s(F: Sequence[Polynomial]) -> TensorMatrix:
    """S-derivative: a ``2m x 2n`` matrix of (sa, sk) blocks."""
    F = PolyTuple(F)
    n = F.arity
    out = TensorMatrix.zeros(2 * len(F), 2 * n, "2x2")
    for i, f in enumerate(F):
        parts = sa_parts(f)
        for a, g in enumerate(parts):
            for j in range(n):
                out.entries[2 * i + a][2 * j] = partial_deriv(g, j + 1, "sa")
                out.entries[2 * i + a][2 * j + 1] = partial_deriv(g, j + 1, "sk")
    return out


def d_sa(F: Sequence[Polynomial], identify_adjoints: bool = False) -> TensorMatrix:
    """Self-adjoint derivative ``[d_sa f_i / d X_j]``.

    Entries must satisfy ``f* = f`` or ``f* = -f``; multiplying by ``i`` turns
    one into the other without changing the kernel. With
    ``identify_adjoints`` every ``X_j'`` in the output is replaced by ``X_j``,
    which is the form the derivative takes on self-adjoint tuples.
    """
    F = PolyTuple(F)
    for f in F:
        if not (is_selfadjoint(f) or is_skewadjoint(f)):
            raise ValueError(f"entry is neither self-adjoint nor skew-adjoint: {f}")
    out = TensorMatrix([[partial_deriv(f, j + 1, "sa") for j in range(F.arity)] for f in F])
    if identify_adjoints:
        unstar = lambda w: tuple(Letter(l.gen, False) for l in w)
        out = out.map(lambda e: e.map_words(unstar))
    return out


def m_f(f: Polynomial) -> TensorMatrix:
    """Two-by-two matrix of left multiplication by ``f`` in (sa, sk) form."""
    one = Polynomial.const(1.0, f.arity)
    a = TensorElement.from_polys(f, one)
    b = TensorElement.from_polys(one, f.star())
    p = (a + b).scale(0.5)
    m = (a - b).scale(0.5)
    return TensorMatrix([[p, m], [m, p]], "2x2")


def d_u_blocks(f: Polynomial, j: int) -> TensorMatrix:
    """``m_{f*} . (S-derivative block) . m_{X_j}`` after unitary reduction."""
    blk = d_s([f]).block_at(0, j - 1)
    gen = Polynomial.gen(j, f.arity)
    prod = m_f(f.star()) @ blk @ m_f(gen)
    return prod.map(TensorElement.unitary_reduce)


def _remark_entry(w, j: int, arity: int) -> TensorElement:
    acc = {}
    for _pre, l, suf in occurrences(w, j):
        if not l.starred:
            key = (word_star(suf), suf, 0)
            c = 1.0
        else:
            x = Letter(j, False)
            key = (word_star(suf) + (x,), (x.adj(),) + suf, 0)
            c = -1.0
        acc[key] = acc.get(key, 0j) + c
    return TensorElement(acc)


def d_u(F: Sequence[Polynomial], route: str = "definition", reduce: bool = True) -> TensorMatrix:
    """Unitary derivative of a tuple of *-monomials.

    ``route="definition"`` takes the lower-right entry of the three-fold
    product in :func:`d_u_blocks`; ``route="remark_rule"`` sums one term per
    occurrence of ``X_j`` directly. With ``reduce`` both results are free
    reduced, which makes them comparable as formal sums.
    """
    F = PolyTuple(F)
    words = []
    for f in F:
        if not f.is_monomial():
            raise ValueError(f"d_u needs *-monomials, got {f}")
        words.append(f.single_word())
    n = F.arity
    rows = []
    for f, w in zip(F, words):
        row = []
        for j in range(1, n + 1):
            if route == "definition":
                e = d_u_blocks(f, j)[1, 1]
            elif route == "remark_rule":
                e = _remark_entry(w, j, n)
                if reduce:
                    e = e.unitary_reduce()
            else:
                raise ValueError(f"unknown route {route!r}")
            row.append(e)
        rows.append(row)
    return TensorMatrix(rows)


@dataclass
class LinnellWitness:
    signed_terms: list = field(default_factory=list)
    distinct: bool = True

    def to_json(self):
        return {"distinct": self.distinct,
                "terms": [{"sign": s, "left": word_str(a), "right": word_str(b)}
                          for s, a, b in self.signed_terms]}


def linnell_witness(w, j: int) -> LinnellWitness:
    """Signed suffix sum of the unitary derivative of the word ``w`` in ``X_j``.

    One term per occurrence; words are free reduced and the ``distinct``
    flag tells whether all (left, right) pairs differ.
    """
    if isinstance(w, Polynomial):
        w = w.single_word()
    w = tuple(Letter(*l) for l in w)
    if not w:
        raise ValueError("empty word")
    e = []
    for _pre, l, suf in occurrences(w, j):
        if not l.starred:
            e.append((1, free_reduce(word_star(suf)), free_reduce(suf)))
        else:
            x = Letter(j, False)
            e.append((-1, free_reduce(word_star(suf) + (x,)), free_reduce((x.adj(),) + suf)))
    if not e:
        raise ValueError(f"X{j} does not occur in {word_str(w)}")
    pairs = [(a, b) for _, a, b in e]
    return LinnellWitness(e, len(set(pairs)) == len(pairs))
