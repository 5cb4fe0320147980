"""Truncated multivariate Taylor arithmetic.

A :class:`Jet` stores the plain monomial coefficients of a polynomial in
``num_vars`` variables, truncated at total order ``degree``.  The coefficient
of ``u0**k0 * u1**k1 * ...`` is stored as is, so the mixed partial derivative
is the coefficient times ``k0! * k1! * ...``.

Coefficients live in a dense array whose last axis is indexed by the graded
rank of the multi-index (all order-0 terms, then order 1, ...).  Leading axes
are a batch shape: a Jet with ``coeffs.shape == (3, 3, size)`` is a 3x3 array
of jets and every operation broadcasts over it like numpy does.
"""

import functools
import math
from fractions import Fraction
from itertools import combinations_with_replacement

import numpy as np

from .errors import JetShapeError, SingularityError

MAX_VARS = 6
MAX_DEGREE = 4


def _check_shape(num_vars, degree):
    if not (isinstance(num_vars, (int, np.integer)) and 1 <= num_vars <= MAX_VARS):
        raise JetShapeError(f"num_vars must be in 1..{MAX_VARS}, got {num_vars}")
    if not (isinstance(degree, (int, np.integer)) and 0 <= degree <= MAX_DEGREE):
        raise JetShapeError(f"degree must be in 0..{MAX_DEGREE}, got {degree}")


class _Layout:
    """Ranked multi-indices and the product/derivative tables for one shape."""

    def __init__(self, num_vars, degree):
        multis = []
        for k in range(degree + 1):
            for combo in combinations_with_replacement(range(num_vars), k):
                m = [0] * num_vars
                for v in combo:
                    m[v] += 1
                multis.append(tuple(m))
        self.num_vars = num_vars
        self.degree = degree
        self.multis = multis
        self.size = len(multis)
        self.index = {m: r for r, m in enumerate(multis)}
        self.order = np.array([sum(m) for m in multis], dtype=int)
        self.factorial = np.array(
            [math.prod(math.factorial(k) for k in m) for m in multis], dtype=float
        )

        pi, pj, pk = [], [], []
        for i, mi in enumerate(multis):
            for j, mj in enumerate(multis):
                if self.order[i] + self.order[j] <= degree:
                    pi.append(i)
                    pj.append(j)
                    pk.append(self.index[tuple(a + b for a, b in zip(mi, mj))])
        self.pair_i = np.array(pi, dtype=np.intp)
        self.pair_j = np.array(pj, dtype=np.intp)
        self.pair_k = np.array(pk, dtype=np.intp)
        scatter = np.zeros((len(pk), self.size))
        scatter[np.arange(len(pk)), self.pair_k] = 1.0
        self.scatter = scatter

        # d/du_v maps this layout onto the layout of degree - 1
        self.deriv_src = []
        self.deriv_fac = []
        if degree > 0:
            lower = [m for m in multis if sum(m) <= degree - 1]
            for v in range(num_vars):
                src, fac = [], []
                for m in lower:
                    up = list(m)
                    up[v] += 1
                    src.append(self.index[tuple(up)])
                    fac.append(float(up[v]))
                self.deriv_src.append(np.array(src, dtype=np.intp))
                self.deriv_fac.append(np.array(fac))


@functools.lru_cache(maxsize=None)
def layout(num_vars, degree):
    _check_shape(num_vars, degree)
    return _Layout(num_vars, degree)


def _bincount_product(a, b, lay):
    """Truncated product with a fixed (ascending pair rank) summation order."""
    prod = a[..., lay.pair_i] * b[..., lay.pair_j]
    batch = prod.shape[:-1]
    if not batch:
        return np.bincount(lay.pair_k, weights=prod, minlength=lay.size)
    nb = math.prod(batch)
    idx = (np.arange(nb)[:, None] * lay.size + lay.pair_k[None, :]).ravel()
    out = np.bincount(idx, weights=prod.reshape(-1), minlength=nb * lay.size)
    return out.reshape(batch + (lay.size,))


class Jet:
    """Truncated Taylor polynomial (or a numpy-shaped batch of them)."""

    __slots__ = ("coeffs", "num_vars", "degree")
    __array_priority__ = 100

    def __init__(self, coeffs, num_vars, degree):
        lay = layout(num_vars, degree)
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim == 0 or coeffs.shape[-1] != lay.size:
            raise JetShapeError(
                f"expected trailing axis of length {lay.size}, got shape {coeffs.shape}"
            )
        self.coeffs = coeffs
        self.num_vars = int(num_vars)
        self.degree = int(degree)

    # construction -----------------------------------------------------------

    @classmethod
    def constant(cls, value, num_vars, degree):
        lay = layout(num_vars, degree)
        value = np.asarray(value, dtype=float)
        coeffs = np.zeros(value.shape + (lay.size,))
        coeffs[..., 0] = value
        return cls(coeffs, num_vars, degree)

    @classmethod
    def zeros(cls, shape, num_vars, degree):
        return cls.constant(np.zeros(shape), num_vars, degree)

    def _like(self, coeffs, degree=None):
        return Jet(coeffs, self.num_vars, self.degree if degree is None else degree)

    # basic properties ---------------------------------------------------------

    @property
    def layout(self):
        return layout(self.num_vars, self.degree)

    @property
    def shape(self):
        return self.coeffs.shape[:-1]

    @property
    def ndim(self):
        return self.coeffs.ndim - 1

    @property
    def value(self):
        v = self.coeffs[..., 0]
        return float(v) if v.ndim == 0 else v.copy()

    def coefficient(self, multi):
        multi = tuple(int(k) for k in multi)
        if len(multi) != self.num_vars:
            raise JetShapeError(f"multi-index {multi} has wrong length for {self.num_vars} variables")
        r = self.layout.index.get(multi)
        if r is None:
            return np.zeros(self.shape) if self.shape else 0.0
        c = self.coeffs[..., r]
        return float(c) if c.ndim == 0 else c.copy()

    def derivative(self, multi):
        """Value of the mixed partial derivative described by ``multi``."""
        multi = tuple(int(k) for k in multi)
        return self.coefficient(multi) * math.prod(math.factorial(k) for k in multi)

    def gradient(self):
        """First partials, batch shape + (num_vars,)."""
        return self.coeffs[..., 1:1 + self.num_vars].copy()

    def hessian(self):
        """Second partials, batch shape + (num_vars, num_vars)."""
        nv = self.num_vars
        out = np.zeros(self.shape + (nv, nv))
        if self.degree < 2:
            return out
        lay = self.layout
        for i in range(nv):
            for j in range(nv):
                m = [0] * nv
                m[i] += 1
                m[j] += 1
                out[..., i, j] = self.coeffs[..., lay.index[tuple(m)]] * (2.0 if i == j else 1.0)
        return out

    # shape manipulation -------------------------------------------------------

    def truncate(self, degree):
        if degree == self.degree:
            return self
        if not 0 <= degree <= self.degree:
            raise JetShapeError(f"cannot truncate degree {self.degree} jet to degree {degree}")
        size = layout(self.num_vars, degree).size
        return self._like(self.coeffs[..., :size].copy(), degree)

    def partial(self, var):
        """Derivative with respect to variable ``var``; the result has degree - 1."""
        if not 0 <= var < self.num_vars:
            raise JetShapeError(f"variable index {var} out of range")
        if self.degree == 0:
            raise JetShapeError("cannot differentiate a degree-0 jet")
        lay = self.layout
        coeffs = self.coeffs[..., lay.deriv_src[var]] * lay.deriv_fac[var]
        return self._like(coeffs, self.degree - 1)

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        if any(k is Ellipsis for k in key):
            raise JetShapeError("Ellipsis indexing is not supported on jets")
        return self._like(self.coeffs[key])

    def __len__(self):
        if not self.shape:
            raise TypeError("len() of unbatched jet")
        return self.shape[0]

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def _batch_axis(self, axis):
        if axis is None:
            return tuple(range(self.ndim))
        if isinstance(axis, int):
            axis = (axis,)
        return tuple(a % self.ndim for a in axis)

    def sum(self, axis=None):
        return self._like(self.coeffs.sum(axis=self._batch_axis(axis)))

    def transpose(self, *axes):
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        elif len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return self._like(self.coeffs.transpose(tuple(axes) + (self.ndim,)))

    @property
    def T(self):
        return self.transpose()

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return self._like(self.coeffs.reshape(tuple(shape) + (self.coeffs.shape[-1],)))

    # arithmetic ---------------------------------------------------------------

    def _check_other(self, other):
        if other.num_vars != self.num_vars or other.degree != self.degree:
            raise JetShapeError(
                f"jet shapes differ: ({self.num_vars} vars, degree {self.degree}) vs "
                f"({other.num_vars} vars, degree {other.degree})"
            )

    def _shift(self, value, sign=1.0):
        value = np.asarray(value, dtype=float)
        shape = np.broadcast_shapes(self.shape, value.shape)
        coeffs = np.broadcast_to(self.coeffs, shape + (self.coeffs.shape[-1],)).copy()
        coeffs[..., 0] += sign * value
        return coeffs

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check_other(other)
            return self._like(self.coeffs + other.coeffs)
        return self._like(self._shift(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            self._check_other(other)
            return self._like(self.coeffs - other.coeffs)
        return self._like(self._shift(other, -1.0))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return self._like(-self.coeffs)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._check_other(other)
            shape = np.broadcast_shapes(self.shape, other.shape)
            size = self.coeffs.shape[-1]
            a = np.broadcast_to(self.coeffs, shape + (size,))
            b = np.broadcast_to(other.coeffs, shape + (size,))
            return self._like(_bincount_product(a, b, self.layout))
        value = np.asarray(other, dtype=float)
        return self._like(self.coeffs * value[..., None])

    __rmul__ = __mul__

    def reciprocal(self):
        a0 = self.coeffs[..., 0]
        if np.any(a0 == 0.0):
            raise SingularityError("division by a jet with zero constant term")
        inv = 1.0 / a0
        terms = [inv]
        for _ in range(self.degree):
            terms.append(-terms[-1] * inv)
        return _taylor_compose(self, terms)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            self._check_other(other)
            return self * other.reciprocal()
        value = np.asarray(other, dtype=float)
        if np.any(value == 0.0):
            raise SingularityError("division by zero")
        return self._like(self.coeffs / value[..., None])

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, exponent):
        return pow_const(self, exponent)

    def __repr__(self):
        return f"Jet(num_vars={self.num_vars}, degree={self.degree}, shape={self.shape})"


def seed(var_index, value, num_vars, degree):
    """Jet of the coordinate function u_var_index expanded about ``value``."""
    _check_shape(num_vars, degree)
    if not 0 <= var_index < num_vars:
        raise JetShapeError(f"variable index {var_index} out of range for {num_vars} variables")
    jet = Jet.constant(value, num_vars, degree)
    if degree >= 1:
        jet.coeffs[..., 1 + var_index] = 1.0
    return jet


def stack(jets, axis=0):
    jets = list(jets)
    if not jets:
        raise JetShapeError("cannot stack an empty sequence")
    first = jets[0]
    for j in jets[1:]:
        first._check_other(j)
    nd = jets[0].ndim + 1
    axis = axis % nd
    return first._like(np.stack([j.coeffs for j in jets], axis=axis))


def _taylor_compose(a, terms):
    """sum_k terms[k] * (a - a0)**k, with terms[k] broadcast over the batch."""
    h = a._like(a.coeffs.copy())
    h.coeffs[..., 0] = 0.0
    out = Jet.constant(terms[0], a.num_vars, a.degree)
    power = None
    for k in range(1, a.degree + 1):
        power = h if power is None else power * h
        out = out + power * terms[k]
    return out


def _from_derivatives(a, derivs):
    return _taylor_compose(a, [d / math.factorial(k) for k, d in enumerate(derivs)])


def _as_jet(a):
    if not isinstance(a, Jet):
        raise TypeError(f"expected a Jet, got {type(a).__name__}")
    return a


def sin(a):
    a0 = _as_jet(a).coeffs[..., 0]
    s, c = np.sin(a0), np.cos(a0)
    cycle = [s, c, -s, -c]
    return _from_derivatives(a, [cycle[k % 4] for k in range(a.degree + 1)])


def cos(a):
    a0 = _as_jet(a).coeffs[..., 0]
    s, c = np.sin(a0), np.cos(a0)
    cycle = [c, -s, -c, s]
    return _from_derivatives(a, [cycle[k % 4] for k in range(a.degree + 1)])


def sinh(a):
    a0 = _as_jet(a).coeffs[..., 0]
    s, c = np.sinh(a0), np.cosh(a0)
    return _from_derivatives(a, [s if k % 2 == 0 else c for k in range(a.degree + 1)])


def cosh(a):
    a0 = _as_jet(a).coeffs[..., 0]
    s, c = np.sinh(a0), np.cosh(a0)
    return _from_derivatives(a, [c if k % 2 == 0 else s for k in range(a.degree + 1)])


def tanh(a):
    return sinh(a) / cosh(a)


def exp(a):
    e = np.exp(_as_jet(a).coeffs[..., 0])
    return _from_derivatives(a, [e] * (a.degree + 1))


def log(a):
    a0 = _as_jet(a).coeffs[..., 0]
    if np.any(a0 <= 0.0):
        raise SingularityError("log of a jet with non-positive constant term")
    terms = [np.log(a0)]
    for k in range(1, a.degree + 1):
        terms.append((-1.0) ** (k + 1) / (k * a0**k))
    return _taylor_compose(a, terms)


def _integer_power(a, n):
    out = Jet.constant(np.ones(a.shape), a.num_vars, a.degree)
    for _ in range(n):
        out = out * a
    return out


def pow_const(a, exponent):
    """a**exponent for a constant real (or Fraction) exponent."""
    _as_jet(a)
    p = Fraction(exponent) if isinstance(exponent, (int, Fraction)) else exponent
    if isinstance(p, Fraction) and p.denominator == 1:
        n = int(p)
        if n >= 0:
            return _integer_power(a, n)
        return _integer_power(a, -n).reciprocal()
    p = float(p)
    if float(p).is_integer():
        return pow_const(a, int(p))
    a0 = a.coeffs[..., 0]
    if np.any(a0 <= 0.0):
        raise SingularityError(f"non-integer power {exponent} of a jet with non-positive constant term")
    terms = []
    binom = 1.0
    for k in range(a.degree + 1):
        terms.append(binom * a0 ** (p - k))
        binom *= (p - k) / (k + 1)
    return _taylor_compose(a, terms)


def sqrt(a):
    return pow_const(a, Fraction(1, 2))


def _integrated(a, value, derivative_series):
    """Compose with f where f(a0) = value and f' has the given univariate series."""
    a0 = a.coeffs[..., 0]
    terms = [value]
    if a.degree >= 1:
        x = seed(0, a0, 1, a.degree - 1)
        g = derivative_series(x)
        for k in range(a.degree):
            terms.append(g.coeffs[..., k] / (k + 1))
    return _taylor_compose(a, terms)


def arctan(a):
    a0 = _as_jet(a).coeffs[..., 0]
    return _integrated(a, np.arctan(a0), lambda x: (1.0 + x * x).reciprocal())


def arcsin(a):
    a0 = _as_jet(a).coeffs[..., 0]
    if np.any(np.abs(a0) >= 1.0):
        raise SingularityError("arcsin of a jet with constant term outside (-1, 1)")
    return _integrated(a, np.arcsin(a0), lambda x: pow_const(1.0 - x * x, Fraction(-1, 2)))


ELEMENTARY = {
    "sin": sin,
    "cos": cos,
    "sinh": sinh,
    "cosh": cosh,
    "tanh": tanh,
    "exp": exp,
    "log": log,
    "sqrt": sqrt,
    "arcsin": arcsin,
    "arctan": arctan,
}


def jet_arith(a, b, op):
    ops = {
        "add": lambda: a + b,
        "sub": lambda: a - b,
        "mul": lambda: a * b,
        "div": lambda: a / b,
    }
    if op not in ops:
        raise ValueError(f"unknown operation {op!r}")
    return ops[op]()


def jet_elementary(name, a, exponent=None):
    if name == "pow_const":
        return pow_const(a, exponent)
    try:
        fn = ELEMENTARY[name]
    except KeyError:
        raise ValueError(f"unknown elementary function {name!r}") from None
    return fn(a)


# batched linear algebra -------------------------------------------------------


def einsum(subscripts, a, b):
    """Two-operand einsum over batch axes with jet multiplication.

    The subscripts only name batch axes, e.g. ``"ij,jk->ik"``.
    """
    a._check_other(b)
    lay = a.layout
    ins, out = subscripts.split("->")
    sa, sb = ins.split(",")
    pa = a.coeffs[..., lay.pair_i]
    pb = b.coeffs[..., lay.pair_j]
    prod = np.einsum(f"{sa}@,{sb}@->{out}@".replace("@", "Z"), pa, pb)
    return a._like(prod @ lay.scatter)


def matmul(a, b):
    return einsum("ij,jk->ik", a, b)


def matvec(a, v):
    return einsum("ij,j->i", a, v)


def inv(m):
    """Inverse of a square jet matrix (batch shape (k, k))."""
    m0 = m.coeffs[..., 0]
    try:
        inv0 = np.linalg.inv(m0)
    except np.linalg.LinAlgError as exc:
        raise SingularityError("singular jet matrix") from exc
    c0 = Jet.constant(inv0, m.num_vars, m.degree)
    nil = m._like(m.coeffs.copy())
    nil.coeffs[..., 0] = 0.0
    step = -matmul(c0, nil)
    out = c0
    term = c0
    for _ in range(m.degree):
        term = matmul(step, term)
        out = out + term
    return out


def compose(outer, shifts):
    """Substitute jets into a polynomial expanded at a point.

    ``outer`` is a jet in ``len(shifts)`` variables; ``shifts[v]`` is the inner
    jet minus the expansion point (zero constant term).  The result has the
    inner jets' variables and degree.
    """
    shifts = list(shifts)
    if len(shifts) != outer.num_vars:
        raise JetShapeError(f"need {outer.num_vars} inner jets, got {len(shifts)}")
    inner = shifts[0]
    for s in shifts:
        inner._check_other(s)
        if s.shape:
            raise JetShapeError("inner jets must be unbatched")
        if s.coeffs[0] != 0.0:
            raise JetShapeError("inner shift jets must have zero constant term")
    lay = outer.layout
    deg = min(outer.degree, inner.degree)
    monos = {}
    rows = []
    for m in lay.multis:
        if sum(m) > deg:
            break
        if sum(m) == 0:
            mono = Jet.constant(1.0, inner.num_vars, inner.degree)
        else:
            v = next(i for i, k in enumerate(m) if k)
            prev = list(m)
            prev[v] -= 1
            mono = monos[tuple(prev)] * shifts[v]
        monos[m] = mono
        rows.append(mono.coeffs)
    basis = np.stack(rows)
    coeffs = outer.coeffs[..., : len(rows)] @ basis
    return Jet(coeffs, inner.num_vars, inner.degree)
