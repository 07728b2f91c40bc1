"""Noncommutative *-polynomials in ``n`` indeterminates.

A polynomial is a finite map from words to nonzero complex coefficients.
Words are tuples of :class:`Letter`; the empty tuple is the identity ``I``.

Text syntax (``'`` is the adjoint, ``*`` or whitespace is the product)::

    poly   := ["+"|"-"] term (("+"|"-") term)*
    term   := [coeff] factor* ["/" number]
    factor := "X" int "'"* ["^" int] | "(" poly ")" "'"* ["^" int] | "I"
    coeff  := number ["i"] | "i" | number ("+"|"-") number "i"   (no spaces)
"""

from __future__ import annotations

import re
from typing import Iterable, Mapping, NamedTuple, Sequence

__all__ = [
    "Letter", "Polynomial", "PolyTuple", "PolySyntaxError", "ArityError",
    "parse", "star", "arith", "sa_parts", "stats", "word_star",
    "word_str", "free_reduce", "is_selfadjoint", "is_skewadjoint", "random_word",
    "random_polynomial",
]

DROP_TOL = 1e-14


class PolySyntaxError(ValueError):
    """Raised for malformed polynomial text; ``pos`` is the character offset."""

    def __init__(self, msg: str, pos: int, text: str = ""):
        self.pos = pos
        self.text = text
        super().__init__(f"{msg} at position {pos}" + (f": {text!r}" if text else ""))


class ArityError(ValueError):
    pass


class Letter(NamedTuple):
    gen: int
    starred: bool = False

    def adj(self) -> "Letter":
        return Letter(self.gen, not self.starred)

    def __str__(self) -> str:
        return f"X{self.gen}" + ("'" if self.starred else "")


Word = tuple  # tuple[Letter, ...]


def word_star(w: Word) -> Word:
    return tuple(l.adj() for l in reversed(w))


def word_str(w: Word) -> str:
    return " ".join(str(l) for l in w) if w else "I"


def word_key(w: Word):
    return (len(w), tuple((l.gen, l.starred) for l in w))


def free_reduce(w: Word) -> Word:
    """Cancel adjacent ``X_j X_j'`` and ``X_j' X_j`` pairs (unitary relations)."""
    out: list[Letter] = []
    for l in w:
        if out and out[-1].gen == l.gen and out[-1].starred != l.starred:
            out.pop()
        else:
            out.append(l)
    return tuple(out)


def _clean(c: complex) -> bool:
    return abs(c.real) < DROP_TOL and abs(c.imag) < DROP_TOL


def _fmt_real(x: float) -> str:
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


class Polynomial:
    """Reduced-form *-polynomial. Immutable; compare with ``==``."""

    __slots__ = ("_terms", "arity")

    def __init__(self, terms: Mapping[Word, complex] | Iterable = (), arity: int = 1):
        acc: dict[Word, complex] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for w, c in items:
            w = tuple(Letter(*l) for l in w)
            for l in w:
                if not 1 <= l.gen <= arity:
                    raise ArityError(f"generator X{l.gen} outside arity {arity}")
            acc[w] = acc.get(w, 0j) + complex(c)
        self._terms = {w: c for w, c in acc.items() if not _clean(c)}
        self.arity = int(arity)

    # constructors
    @classmethod
    def zero(cls, arity: int) -> "Polynomial":
        return cls({}, arity)

    @classmethod
    def const(cls, c: complex, arity: int) -> "Polynomial":
        return cls({(): c}, arity)

    @classmethod
    def gen(cls, j: int, arity: int, starred: bool = False) -> "Polynomial":
        return cls({(Letter(j, starred),): 1.0}, arity)

    @classmethod
    def word(cls, w: Word, arity: int, coeff: complex = 1.0) -> "Polynomial":
        return cls({tuple(w): coeff}, arity)

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items(), key=lambda t: word_key(t[0]))

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((len(w) for w in self._terms), default=0)

    def is_monomial(self) -> bool:
        """True for a single word with coefficient 1."""
        if len(self._terms) != 1:
            return False
        (c,) = self._terms.values()
        return abs(c - 1) < DROP_TOL

    def single_word(self) -> Word:
        if not self.is_monomial():
            raise ValueError(f"not a *-monomial: {self}")
        return next(iter(self._terms))

    def _check(self, other: "Polynomial"):
        if self.arity != other.arity:
            raise ArityError(f"arity mismatch: {self.arity} vs {other.arity}")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, float, complex)):
            return Polynomial.const(other, self.arity)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self._terms)
        for w, c in other._terms.items():
            acc[w] = acc.get(w, 0j) + c
        return Polynomial(acc, self.arity)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, lam: complex) -> "Polynomial":
        return Polynomial({w: lam * c for w, c in self._terms.items()}, self.arity)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc: dict[Word, complex] = {}
        for w1, c1 in self._terms.items():
            for w2, c2 in other._terms.items():
                w = w1 + w2
                acc[w] = acc.get(w, 0j) + c1 * c2
        return Polynomial(acc, self.arity)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, m: int):
        if not isinstance(m, int) or m < 0:
            raise ValueError("only nonnegative integer powers")
        out = Polynomial.const(1.0, self.arity)
        for _ in range(m):
            out = out * self
        return out

    def star(self) -> "Polynomial":
        return Polynomial({word_star(w): c.conjugate() for w, c in self._terms.items()}, self.arity)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.arity == other.arity and self._terms == other._terms

    def __hash__(self):
        return hash((self.arity, frozenset(self._terms.items())))

    def allclose(self, other: "Polynomial", tol: float = 1e-12) -> bool:
        d = self - other
        return all(abs(c) < tol for c in d._terms.values())

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for w, c in self.items():
            ws = word_str(w) if w else ""
            if c.imag == 0.0:
                sign = "-" if c.real < 0 else "+"
                mag = abs(c.real)
                cs = "" if (mag == 1.0 and w) else _fmt_real(mag)
            else:
                sign = "+"
                re_s = _fmt_real(c.real)
                im_s = _fmt_real(abs(c.imag))
                cs = f"({re_s}{'-' if c.imag < 0 else '+'}{im_s}i)"
            body = " ".join(s for s in (cs, ws) if s) or "I"
            parts.append((sign, body))
        s0, b0 = parts[0]
        out = ("-" if s0 == "-" else "") + b0
        for s, b in parts[1:]:
            out += f" {s} {b}"
        return out

    def __repr__(self) -> str:
        return f"Polynomial({str(self)!r}, arity={self.arity})"

    def to_json(self) -> dict:
        return {"arity": self.arity, "text": str(self),
                "terms": [{"w": word_str(w), "re": c.real, "im": c.imag} for w, c in self.items()]}


class PolyTuple(tuple):
    """Nonempty tuple of polynomials with a common arity."""

    def __new__(cls, entries: Sequence[Polynomial]):
        entries = tuple(entries)
        if not entries:
            raise ValueError("PolyTuple must be nonempty")
        ar = {p.arity for p in entries}
        if len(ar) != 1:
            raise ArityError(f"entries have different arities {sorted(ar)}")
        return super().__new__(cls, entries)

    @property
    def arity(self) -> int:
        return self[0].arity

    def __str__(self):
        return "{" + "; ".join(str(p) for p in self) + "}"


# ---------------------------------------------------------------- parser

_NUM = re.compile(r"(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)")
_INT = re.compile(r"\d+")


class _Parser:
    def __init__(self, text: str, n: int):
        self.s = text
        self.n = n
        self.i = 0

    def err(self, msg):
        raise PolySyntaxError(msg, self.i, self.s)

    def ws(self):
        while self.i < len(self.s) and self.s[self.i].isspace():
            self.i += 1

    def peek(self) -> str:
        self.ws()
        return self.s[self.i] if self.i < len(self.s) else ""

    def poly(self) -> Polynomial:
        acc = Polynomial.zero(self.n)
        sign = 1.0
        c = self.peek()
        if c in "+-":
            sign = -1.0 if c == "-" else 1.0
            self.i += 1
        acc = acc + self.term(sign)
        while True:
            c = self.peek()
            if c in ("+", "-") and c:
                self.i += 1
                sign = -1.0 if c == "-" else 1.0
                acc = acc + self.term(sign)
            else:
                return acc

    def number(self):
        m = _NUM.match(self.s, self.i)
        if not m:
            return None
        self.i = m.end()
        return float(m.group(1))

    def coeff(self, sign: float = 1.0):
        """Complex literal or None; a preceding ``sign`` binds to the leading part only."""
        self.ws()
        re_part = self.number()
        if re_part is None:
            if self.s.startswith("i", self.i) and not self.s[self.i + 1:self.i + 2].isalnum():
                self.i += 1
                return sign * 1j
            return None
        re_part *= sign
        if self.s.startswith("i", self.i):
            self.i += 1
            return complex(0, re_part)
        # a+bi, no whitespace allowed inside the literal
        if self.i < len(self.s) and self.s[self.i] in "+-":
            save = self.i
            sgn = -1.0 if self.s[self.i] == "-" else 1.0
            self.i += 1
            im = self.number()
            if im is None:
                im = 1.0
            if self.s.startswith("i", self.i):
                self.i += 1
                return complex(re_part, sgn * im)
            self.i = save
        return complex(re_part)

    def term(self, sign: float = 1.0) -> Polynomial:
        pos = self.i
        c = self.coeff(sign)
        out = Polynomial.const(sign if c is None else c, self.n)
        nfac = 0
        while True:
            ch = self.peek()
            if ch == "*":
                self.i += 1
                ch = self.peek()
                if ch not in ("X", "(", "I"):
                    self.err("expected factor after '*'")
            if ch in ("X", "(", "I"):
                out = out * self.factor()
                nfac += 1
            else:
                break
        if c is None and nfac == 0:
            self.i = max(self.i, pos)
            self.err("expected term")
        if self.peek() == "/":
            self.i += 1
            self.ws()
            d = self.number()
            if d is None:
                self.err("expected number after '/'")
            if d == 0:
                self.err("division by zero")
            out = out.scale(1.0 / d)
        return out

    def postfix(self, p: Polynomial) -> Polynomial:
        while self.i < len(self.s) and self.s[self.i] == "'":
            self.i += 1
            p = p.star()
        if self.i < len(self.s) and self.s[self.i] == "^":
            self.i += 1
            if self.s.startswith("-", self.i):
                self.err("negative powers are not allowed")
            m = _INT.match(self.s, self.i)
            if not m or int(m.group()) < 1:
                self.err("expected positive integer power")
            self.i = m.end()
            p = p ** int(m.group())
        return p

    def factor(self) -> Polynomial:
        ch = self.peek()
        if ch == "X":
            pos = self.i
            self.i += 1
            m = _INT.match(self.s, self.i)
            if not m:
                self.err("expected generator index after 'X'")
            j = int(m.group())
            if not 1 <= j <= self.n:
                self.i = pos
                raise ArityError(f"generator X{j} outside arity {self.n} at position {pos}")
            self.i = m.end()
            return self.postfix(Polynomial.gen(j, self.n))
        if ch == "I":
            self.i += 1
            return self.postfix(Polynomial.const(1.0, self.n))
        if ch == "(":
            self.i += 1
            inner = self.poly()
            if self.peek() != ")":
                self.err("expected ')'")
            self.i += 1
            return self.postfix(inner)
        self.err("expected factor")


def parse(text: str, n: int) -> Polynomial:
    """Parse ``text`` into a reduced-form polynomial of arity ``n``.

    >>> str(parse("X1^2 + X1 X1", 1))
    '2 X1 X1'
    """
    if n < 1:
        raise ArityError("arity must be >= 1")
    p = _Parser(text, n)
    if not p.peek():
        p.err("empty input")
    out = p.poly()
    if p.peek():
        p.err(f"unexpected character {p.peek()!r}")
    return out


def star(p: Polynomial) -> Polynomial:
    return p.star()


def arith(p: Polynomial, q: Polynomial | None = None, op: str = "add", lam: complex = 1.0) -> Polynomial:
    """Binary *-algebra operation ``op`` in {add, sub, mul, scale}."""
    if op == "scale":
        return p.scale(lam)
    if q is None:
        raise ValueError(f"op {op!r} needs two operands")
    p._check(q)
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise ValueError(f"unknown op {op!r}")


def sa_parts(f: Polynomial) -> tuple[Polynomial, Polynomial]:
    """Self-adjoint and skew-adjoint parts ``((f+f*)/2, (f-f*)/2)``."""
    fs = f.star()
    return (f + fs).scale(0.5), (f - fs).scale(0.5)


def is_selfadjoint(f: Polynomial, tol: float = 1e-12) -> bool:
    return f.allclose(f.star(), tol)


def is_skewadjoint(f: Polynomial, tol: float = 1e-12) -> bool:
    return f.allclose(-f.star(), tol)


def stats(F: Sequence[Polynomial]) -> tuple[float, int]:
    """Size constant ``c`` and degree of a tuple.

    ``c`` is the max over entries of ``max({|c_i|, len(w_i)} U {#terms})``.
    """
    c = 0.0
    deg = 0
    for f in F:
        vals = [float(len(f))]
        for w, coef in f.items():
            vals += [abs(coef), float(len(w))]
        c = max(c, max(vals))
        deg = max(deg, f.degree())
    return c, deg


def parse_tuple(texts: Sequence[str] | str, n: int) -> PolyTuple:
    """Parse several polynomials; a single string may separate entries by ';'."""
    if isinstance(texts, str):
        texts = [t for t in texts.split(";") if t.strip()]
    return PolyTuple([parse(t, n) for t in texts])


def random_word(rng, n: int, length: int, star_prob: float = 0.5) -> Word:
    """Uniform word of the given length; ``rng`` is a numpy Generator."""
    gens = rng.integers(1, n + 1, size=length)
    stars = rng.random(length) < star_prob
    return tuple(Letter(int(g), bool(s)) for g, s in zip(gens, stars))


def random_polynomial(rng, n: int, max_deg: int, max_terms: int = 4,
                      star_prob: float = 0.5, integer_coeffs: bool = False) -> Polynomial:
    """Random *-polynomial with up to ``max_terms`` words of length ``<= max_deg``.

    Coefficients are complex Gaussian, or small Gaussian integers with
    ``integer_coeffs`` (handy when exact equality is wanted).
    """
    acc = {}
    for _ in range(int(rng.integers(1, max_terms + 1))):
        w = random_word(rng, n, int(rng.integers(0, max_deg + 1)), star_prob)
        if integer_coeffs:
            c = complex(int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))
        else:
            c = complex(rng.standard_normal(), rng.standard_normal())
        acc[w] = acc.get(w, 0j) + c
    return Polynomial(acc, n)
