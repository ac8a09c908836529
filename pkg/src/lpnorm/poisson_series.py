"""Double D'Alembert series in two action-angle pairs.

A term with key ``(n, m, p, q, kind)`` stands for

    c * I1**((n - m)/2) * I2**(m/2) * kind(p*phi1 + q*phi2)

where ``kind`` is ``"cos"`` or ``"sin"``.  Keys are stored in canonical form:
``p >= 0``, and ``q >= 0`` whenever ``p == 0``; negating ``(p, q)`` flips the
sign of a sine term and leaves a cosine unchanged.  Parity requires
``p = n - m (mod 2)``, ``p <= n - m``, ``q = m (mod 2)`` and ``|q| <= m``.

Angles advance as ``phi1' = omega1``, ``phi2' = -omega2``, so the time
derivative along the linear flow is ``D = omega1 d/dphi1 - omega2 d/dphi2``
and a harmonic ``(p, q)`` rotates at ``nu = p*omega1 - q*omega2``.
"""

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from lpnorm.errors import CriticalTermError, ParameterError, SmallDivisorError

COS = "cos"
SIN = "sin"
KINDS = (COS, SIN)

#: harmonics whose divisor vanishes identically
CRITICAL_HARMONICS = frozenset({(1, 0), (0, 1)})

TOL_DIV = 1e-8
TOL_RES = 1e-8
DEFAULT_MAX_DEGREE = 4


def _canonical(key, coeff):
    """Return ``(key, coeff)`` in canonical orientation, or ``None`` if the term vanishes."""
    n, m, p, q, kind = key
    if kind not in KINDS:
        raise ParameterError(f"kind must be 'cos' or 'sin', got {kind!r}")
    if p < 0 or (p == 0 and q < 0):
        p, q = -p, -q
        if kind == SIN:
            coeff = -coeff
    if kind == SIN and p == 0 and q == 0:
        return None
    if not 0 <= m <= n:
        raise ParameterError(f"need 0 <= m <= n, got n={n}, m={m}")
    if p > n - m or (p - (n - m)) % 2 or abs(q) > m or (q - m) % 2:
        raise ParameterError(f"key {(n, m, p, q, kind)} violates the parity rules")
    return (n, m, p, q, kind), coeff


def _build(terms):
    """Accumulate ``(key, coeff)`` pairs into a canonical dict without zeros."""
    out = {}
    for key, coeff in terms:
        canon = _canonical(key, float(coeff))
        if canon is None:
            continue
        k, c = canon
        out[k] = out.get(k, 0.0) + c
    return {k: c for k, c in out.items() if c != 0.0}


class DAlembertSeries:
    """Immutable sparse double D'Alembert series.

    Parameters
    ----------
    terms : mapping or iterable of (key, coeff), optional
        Keys ``(n, m, p, q, kind)`` in any orientation; they are
        canonicalized, merged and stripped of zero coefficients.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        if terms is None:
            items = ()
        elif isinstance(terms, dict):
            items = terms.items()
        else:
            items = terms
        object.__setattr__(self, "_terms", _build(items))

    def __setattr__(self, name, value):
        raise AttributeError("DAlembertSeries is immutable")

    @classmethod
    def _raw(cls, terms):
        obj = cls.__new__(cls)
        object.__setattr__(obj, "_terms", terms)
        return obj

    @classmethod
    def term(cls, n, m, p, q, kind, coeff=1.0):
        return cls({(n, m, p, q, kind): coeff})

    # mapping protocol -------------------------------------------------

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(sorted(self._terms))

    def __contains__(self, key):
        return key in self._terms

    def __getitem__(self, key):
        return self._terms[key]

    def get(self, key, default=0.0):
        """Coefficient at ``key`` after canonicalization (sign-aware for sines)."""
        canon = _canonical(key, 1.0)
        if canon is None:
            return default
        k, sign = canon
        return sign * self._terms[k] if k in self._terms else default

    def items(self):
        return sorted(self._terms.items())

    def keys(self):
        return sorted(self._terms)

    def harmonics(self):
        """Set of ``(p, q)`` pairs present."""
        return {(k[2], k[3]) for k in self._terms}

    def degree(self):
        """Largest total degree ``n``; ``-1`` for the empty series."""
        return max((k[0] for k in self._terms), default=-1)

    def degree_part(self, n):
        return DAlembertSeries._raw({k: c for k, c in self._terms.items() if k[0] == n})

    def is_zero(self):
        return not self._terms

    def __eq__(self, other):
        return isinstance(other, DAlembertSeries) and self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        body = ", ".join(f"{k}: {c!r}" for k, c in self.items())
        return f"DAlembertSeries({{{body}}})"

    # algebra ----------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1.0))

    def __neg__(self):
        return scale(self, -1.0)

    def __mul__(self, other):
        if isinstance(other, DAlembertSeries):
            return mul(self, other)
        return scale(self, other)

    __rmul__ = __mul__


def add(a, b):
    """Sum of two series."""
    out = dict(a._terms)
    for k, c in b._terms.items():
        out[k] = out.get(k, 0.0) + c
    return DAlembertSeries._raw({k: c for k, c in out.items() if c != 0.0})


def scale(a, c):
    """Series multiplied by the real scalar ``c``."""
    c = float(c)
    if c == 0.0:
        return DAlembertSeries()
    return DAlembertSeries._raw({k: v * c for k, v in a._terms.items() if v * c != 0.0})


def neg(a):
    return scale(a, -1.0)


def mul(a, b, max_degree=DEFAULT_MAX_DEGREE):
    """Product with product-to-sum identities; terms above ``max_degree`` are dropped."""
    terms = []
    for (n1, m1, p1, q1, k1), c1 in a._terms.items():
        for (n2, m2, p2, q2, k2), c2 in b._terms.items():
            n, m = n1 + n2, m1 + m2
            if max_degree is not None and n > max_degree:
                continue
            h = 0.5 * c1 * c2
            diff = (p1 - p2, q1 - q2)
            summ = (p1 + p2, q1 + q2)
            if k1 == COS and k2 == COS:
                terms += [((n, m, *diff, COS), h), ((n, m, *summ, COS), h)]
            elif k1 == SIN and k2 == SIN:
                terms += [((n, m, *diff, COS), h), ((n, m, *summ, COS), -h)]
            elif k1 == SIN:
                terms += [((n, m, *summ, SIN), h), ((n, m, *diff, SIN), h)]
            else:
                terms += [((n, m, *summ, SIN), h), ((n, m, *diff, SIN), -h)]
    return DAlembertSeries(terms)


def power(a, k, max_degree=DEFAULT_MAX_DEGREE):
    """``a**k`` for integer ``k >= 0``; ``a**0`` is the constant ``1`` of degree 0."""
    if k < 0:
        raise ParameterError("power needs k >= 0")
    out = DAlembertSeries.term(0, 0, 0, 0, COS)
    for _ in range(k):
        out = mul(out, a, max_degree)
    return out


def chop(a, tol):
    """Drop terms with ``|coeff| <= tol``."""
    return DAlembertSeries._raw({k: c for k, c in a._terms.items() if abs(c) > tol})


# linear-flow operators --------------------------------------------------


def harmonic_frequency(p, q, f):
    """``nu = p*omega1 - q*omega2``, the rate of ``p*phi1 + q*phi2``."""
    return p * f.omega1 - q * f.omega2


def apply_D(s, f):
    """``D = omega1 d/dphi1 - omega2 d/dphi2`` applied termwise."""
    terms = []
    for (n, m, p, q, kind), c in s._terms.items():
        nu = harmonic_frequency(p, q, f)
        if kind == COS:
            terms.append(((n, m, p, q, SIN), -nu * c))
        else:
            terms.append(((n, m, p, q, COS), nu * c))
    return DAlembertSeries(terms)


def apply_D2(s, f):
    """``D**2``: each harmonic times ``-nu**2``."""
    out = {}
    for k, c in s._terms.items():
        nu = harmonic_frequency(k[2], k[3], f)
        v = -nu * nu * c
        if v != 0.0:
            out[k] = v
    return DAlembertSeries._raw(out)


def delta_pq(p, q, f):
    """``[omega1**2 - nu**2] [omega2**2 - nu**2]`` with ``nu = p*omega1 - q*omega2``."""
    nu = harmonic_frequency(p, q, f)
    nu2 = nu * nu
    return (f.omega1 * f.omega1 - nu2) * (f.omega2 * f.omega2 - nu2)


def apply_delta12(s, f):
    """``(D**2 + omega1**2)(D**2 + omega2**2)`` applied termwise."""
    out = {}
    for k, c in s._terms.items():
        v = delta_pq(k[2], k[3], f) * c
        if v != 0.0:
            out[k] = v
    return DAlembertSeries._raw(out)


def critical_part(s):
    """The ``(p, q) in {(1, 0), (0, 1)}`` harmonics of ``s``."""
    return DAlembertSeries._raw(
        {k: c for k, c in s._terms.items() if (k[2], k[3]) in CRITICAL_HARMONICS}
    )


def invert_delta(s, f, tol_div=TOL_DIV):
    """Divide each harmonic by ``Delta_{p,q}``.

    Raises
    ------
    CriticalTermError
        If ``s`` has ``(1, 0)`` or ``(0, 1)`` harmonics; lists their keys.
    SmallDivisorError
        If any other harmonic has ``|Delta_{p,q}| < tol_div``.
    """
    critical = sorted(k for k in s._terms if (k[2], k[3]) in CRITICAL_HARMONICS)
    if critical:
        raise CriticalTermError(f"critical harmonics present: {critical}", keys=critical)
    small = []
    out = {}
    for k, c in s._terms.items():
        d = delta_pq(k[2], k[3], f)
        if abs(d) < tol_div:
            small.append(k)
            continue
        out[k] = c / d
    if small:
        small.sort()
        raise SmallDivisorError(f"|Delta_pq| < {tol_div} for keys {small}", keys=small)
    return DAlembertSeries._raw(out)


@dataclass(frozen=True)
class MoserResult:
    """Outcome of the low-order non-resonance check.

    ``witness`` is the integer pair minimizing ``|k1*omega1 + k2*omega2|``
    (oriented with ``k1 > 0``, or ``k1 == 0`` and ``k2 > 0``) and
    ``min_value`` that minimum.
    """

    satisfied: bool
    witness: tuple
    min_value: float

    def __bool__(self):
        return self.satisfied


def moser_condition(f, kmax=4, tol_res=TOL_RES):
    """Check ``k1*omega1 + k2*omega2 != 0`` for ``0 < |k1| + |k2| <= kmax``.

    Pairs are scanned by increasing ``|k1| + |k2|`` so the witness is the
    lowest-order pair attaining the minimum.
    """
    if not (f.omega1 > 0.0 and f.omega2 > 0.0):
        raise ParameterError("frequencies must be positive")
    best, witness = math.inf, None
    for order in range(1, kmax + 1):
        for k1 in range(0, order + 1):
            k2_abs = order - k1
            for k2 in sorted({k2_abs, -k2_abs}, reverse=True):
                if k1 == 0 and k2 <= 0:
                    continue
                v = abs(k1 * f.omega1 + k2 * f.omega2)
                if v < best:
                    best, witness = v, (k1, k2)
    return MoserResult(best > tol_res, witness, best)


# evaluation and norms ---------------------------------------------------


def evaluate(s, I1, I2, phi1, phi2):
    """Numeric value; broadcasts over array arguments."""
    I1 = np.asarray(I1, dtype=float)
    I2 = np.asarray(I2, dtype=float)
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    total = np.zeros(np.broadcast(I1, I2, phi1, phi2).shape)
    r1, r2 = np.sqrt(I1), np.sqrt(I2)
    for (n, m, p, q, kind), c in s._terms.items():
        trig = np.cos if kind == COS else np.sin
        total = total + c * r1 ** (n - m) * r2 ** m * trig(p * phi1 + q * phi2)
    return total if total.ndim else float(total)


def average(s):
    """Angle-independent part (the ``(0, 0)`` cosine terms)."""
    return DAlembertSeries._raw({k: c for k, c in s._terms.items() if k[2] == 0 and k[3] == 0})


def norm(s):
    """Largest absolute coefficient."""
    return max((abs(c) for c in s._terms.values()), default=0.0)


def allclose(a, b, rtol=1e-14, atol=0.0):
    """Coefficientwise ``|a - b| <= atol + rtol * max(|a|, |b|)``."""
    for k in set(a._terms) | set(b._terms):
        x, y = a._terms.get(k, 0.0), b._terms.get(k, 0.0)
        if abs(x - y) > atol + rtol * max(abs(x), abs(y)):
            return False
    return True


# text round trip --------------------------------------------------------


def dumps(s):
    """One term per line: ``n m p q kind coeff`` with 17 significant digits."""
    return "".join(f"{n} {m} {p} {q} {kind} {c:.17g}\n" for (n, m, p, q, kind), c in s.items())


def loads(text):
    """Inverse of :func:`dumps`; blank lines and ``#`` comments are ignored."""
    terms = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 6:
            raise ParameterError(f"line {lineno}: expected 6 fields, got {len(parts)}")
        try:
            n, m, p, q = (int(v) for v in parts[:4])
            coeff = float(parts[5])
        except ValueError as exc:
            raise ParameterError(f"line {lineno}: {exc}") from None
        terms.append(((n, m, p, q, parts[4]), coeff))
    return DAlembertSeries(terms)


def admissible_keys(n):
    """All canonical keys of total degree ``n``."""
    keys = []
    for m in range(n + 1):
        for p, q in product(range(n - m + 1), range(-m, m + 1)):
            if (p - (n - m)) % 2 or (q - m) % 2 or (p == 0 and q < 0):
                continue
            keys.append((n, m, p, q, COS))
            if (p, q) != (0, 0):
                keys.append((n, m, p, q, SIN))
    return keys
