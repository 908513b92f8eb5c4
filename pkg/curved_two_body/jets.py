"""
Truncated multivariate Taylor series ("jets").

A :class:`Jet` stores the dense coefficient vector of a polynomial in
``nvars`` variables truncated at total ``degree``. Monomials are ordered by
total degree, then lexicographically descending in the exponents. With four
variables and degree four there are 70 coefficients.

Elementary functions act on a jet through the univariate expansion of the
function at the constant term, so every result is exact to round-off.
The module-level functions accept plain floats and arrays too, which lets the
same Hamiltonian code run on numbers and on jets.
"""
from functools import lru_cache
import math
from typing import Callable, Sequence

import numpy as np
from scipy import special


@lru_cache(maxsize=None)
def monomials(nvars: int, degree: int) -> tuple[tuple[int, ...], ...]:

    def exponents(n: int, total: int) -> list[tuple[int, ...]]:
        if n == 1:
            return [(total,)]
        out = []
        for first in range(total, -1, -1):
            out.extend((first,) + rest for rest in exponents(n - 1, total - first))
        return out

    table = []
    for d in range(degree + 1):
        table.extend(exponents(nvars, d))
    return tuple(table)


@lru_cache(maxsize=None)
def monomial_index(nvars: int, degree: int) -> dict[tuple[int, ...], int]:
    return {mono: ii for ii, mono in enumerate(monomials(nvars, degree))}


@lru_cache(maxsize=None)
def _product_table(nvars: int, degree: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    monos = monomials(nvars, degree)
    index = monomial_index(nvars, degree)
    left, right, target = [], [], []
    for ii, a in enumerate(monos):
        for jj, b in enumerate(monos):
            if sum(a) + sum(b) > degree:
                continue
            left.append(ii)
            right.append(jj)
            target.append(index[tuple(x + y for x, y in zip(a, b))])
    return np.array(left), np.array(right), np.array(target)


class Jet:
    __array_ufunc__ = None
    __slots__ = ("coefficients", "nvars", "degree")

    def __init__(self, coefficients: np.ndarray, nvars: int, degree: int):
        coefficients = np.asarray(coefficients, dtype=float)
        if coefficients.shape != (len(monomials(nvars, degree)),):
            raise ValueError(
                f"Expected {len(monomials(nvars, degree))} coefficients, "
                f"got shape {coefficients.shape}."
            )
        self.coefficients = coefficients
        self.nvars = nvars
        self.degree = degree

    @classmethod
    def constant(cls, value: float, nvars: int, degree: int) -> "Jet":
        coefficients = np.zeros(len(monomials(nvars, degree)))
        coefficients[0] = value
        return cls(coefficients, nvars, degree)

    @classmethod
    def variable(cls, index: int, value: float, nvars: int, degree: int) -> "Jet":
        jet = cls.constant(value, nvars, degree)
        if degree >= 1:
            exps = tuple(1 if ii == index else 0 for ii in range(nvars))
            jet.coefficients[monomial_index(nvars, degree)[exps]] = 1.0
        return jet

    @classmethod
    def from_terms(
        cls,
        terms: dict[tuple[int, ...], float],
        nvars: int,
        degree: int,
    ) -> "Jet":
        index = monomial_index(nvars, degree)
        coefficients = np.zeros(len(index))
        for exps, value in terms.items():
            if sum(exps) <= degree:
                coefficients[index[tuple(exps)]] += value
        return cls(coefficients, nvars, degree)

    @property
    def value(self) -> float:
        return float(self.coefficients[0])

    def _like(self, coefficients: np.ndarray) -> "Jet":
        return Jet(coefficients, self.nvars, self.degree)

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if (other.nvars, other.degree) != (self.nvars, self.degree):
                raise ValueError("Jets of different shapes cannot be combined.")
            return other
        return Jet.constant(float(other), self.nvars, self.degree)

    def __add__(self, other) -> "Jet":
        return self._like(self.coefficients + self._coerce(other).coefficients)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        return self._like(self.coefficients - self._coerce(other).coefficients)

    def __rsub__(self, other) -> "Jet":
        return self._like(self._coerce(other).coefficients - self.coefficients)

    def __neg__(self) -> "Jet":
        return self._like(-self.coefficients)

    def __pos__(self) -> "Jet":
        return self

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return self._like(self.coefficients * float(other))
        other = self._coerce(other)
        left, right, target = _product_table(self.nvars, self.degree)
        out = np.zeros_like(self.coefficients)
        np.add.at(out, target, self.coefficients[left] * other.coefficients[right])
        return self._like(out)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return self._like(self.coefficients / float(other))
        return self * reciprocal(other)

    def __rtruediv__(self, other) -> "Jet":
        return reciprocal(self) * float(other)

    def __pow__(self, exponent: int) -> "Jet":
        if not isinstance(exponent, (int, np.integer)):
            return power(self, float(exponent))
        if exponent < 0:
            return reciprocal(self ** (-exponent))
        result = Jet.constant(1.0, self.nvars, self.degree)
        for _ in range(exponent):
            result = result * self
        return result

    def __repr__(self) -> str:
        return f"Jet(value={self.value!r}, nvars={self.nvars}, degree={self.degree})"

    def compose_series(self, series: Sequence[float]) -> "Jet":
        """
        Returns f(self) given the Taylor coefficients f^(k)(c)/k! of f at the
        constant term c, for k = 0..degree.
        """
        delta = self - self.value
        result = Jet.constant(series[self.degree], self.nvars, self.degree)
        for k in range(self.degree - 1, -1, -1):
            result = result * delta + series[k]
        return result

    def coefficient(self, exponents: Sequence[int]) -> float:
        index = monomial_index(self.nvars, self.degree)
        return float(self.coefficients[index[tuple(exponents)]])

    def terms(self, total_degree: int | None = None) -> dict[tuple[int, ...], float]:
        return {
            mono: float(c)
            for mono, c in zip(monomials(self.nvars, self.degree), self.coefficients)
            if c != 0.0 and (total_degree is None or sum(mono) == total_degree)
        }

    def homogeneous(self, total_degree: int) -> "Jet":
        mask = np.array([sum(m) == total_degree for m in monomials(self.nvars, self.degree)])
        return self._like(np.where(mask, self.coefficients, 0.0))

    def gradient(self) -> np.ndarray:
        return np.array([
            self.coefficient(tuple(1 if jj == ii else 0 for jj in range(self.nvars)))
            for ii in range(self.nvars)
        ])

    def hessian(self) -> np.ndarray:
        out = np.zeros((self.nvars, self.nvars))
        for ii in range(self.nvars):
            for jj in range(self.nvars):
                exps = [0] * self.nvars
                exps[ii] += 1
                exps[jj] += 1
                c = self.coefficient(exps)
                out[ii, jj] = 2.0 * c if ii == jj else c
        return out

    def evaluate(self, point: Sequence[float]) -> float:
        point = np.asarray(point, dtype=float)
        monos = np.array(monomials(self.nvars, self.degree))
        return float(np.sum(self.coefficients * np.prod(point ** monos, axis=1)))

    def compose_linear(self, matrix: np.ndarray) -> "Jet":
        """Substitutes x = matrix @ y and returns the jet in y."""
        matrix = np.asarray(matrix, dtype=float)
        new_vars = [
            sum(
                (Jet.variable(jj, 0.0, self.nvars, self.degree) * matrix[ii, jj]
                 for jj in range(self.nvars)),
                Jet.constant(0.0, self.nvars, self.degree),
            )
            for ii in range(self.nvars)
        ]
        powers = [[Jet.constant(1.0, self.nvars, self.degree)] for _ in range(self.nvars)]
        for ii in range(self.nvars):
            for _ in range(self.degree):
                powers[ii].append(powers[ii][-1] * new_vars[ii])
        result = Jet.constant(0.0, self.nvars, self.degree)
        for mono, c in zip(monomials(self.nvars, self.degree), self.coefficients):
            if c == 0.0:
                continue
            term = Jet.constant(c, self.nvars, self.degree)
            for ii, e in enumerate(mono):
                if e:
                    term = term * powers[ii][e]
            result = result + term
        return result


def variables(point: Sequence[float], degree: int) -> list[Jet]:
    nvars = len(point)
    return [Jet.variable(ii, value, nvars, degree) for ii, value in enumerate(point)]


def _periodic_series(c: float, degree: int, base: Callable[[float], float]) -> list[float]:
    return [base(c + k * math.pi / 2) / math.factorial(k) for k in range(degree + 1)]


def _binomial_series(c: float, exponent: float, degree: int) -> list[float]:
    return [
        c ** exponent * special.binom(exponent, k) * c ** (-k)
        for k in range(degree + 1)
    ]


def sin(x):
    if isinstance(x, Jet):
        return x.compose_series(_periodic_series(x.value, x.degree, math.sin))
    return np.sin(x)


def cos(x):
    if isinstance(x, Jet):
        return x.compose_series(_periodic_series(x.value, x.degree, math.cos))
    return np.cos(x)


def sinh(x):
    if isinstance(x, Jet):
        c = x.value
        return x.compose_series([
            (math.sinh(c) if k % 2 == 0 else math.cosh(c)) / math.factorial(k)
            for k in range(x.degree + 1)
        ])
    return np.sinh(x)


def cosh(x):
    if isinstance(x, Jet):
        c = x.value
        return x.compose_series([
            (math.cosh(c) if k % 2 == 0 else math.sinh(c)) / math.factorial(k)
            for k in range(x.degree + 1)
        ])
    return np.cosh(x)


def exp(x):
    if isinstance(x, Jet):
        c = math.exp(x.value)
        return x.compose_series([c / math.factorial(k) for k in range(x.degree + 1)])
    return np.exp(x)


def log(x):
    if isinstance(x, Jet):
        c = x.value
        series = [math.log(c)] + [
            (-1) ** (k + 1) / (k * c ** k) for k in range(1, x.degree + 1)
        ]
        return x.compose_series(series)
    return np.log(x)


def reciprocal(x):
    if isinstance(x, Jet):
        c = x.value
        if c == 0.0:
            raise ZeroDivisionError("Reciprocal of a jet with zero constant term.")
        return x.compose_series([(-1) ** k / c ** (k + 1) for k in range(x.degree + 1)])
    return 1.0 / x


def power(x, exponent: float):
    if isinstance(x, Jet):
        return x.compose_series(_binomial_series(x.value, exponent, x.degree))
    return np.power(x, exponent)


def sqrt(x):
    if isinstance(x, Jet):
        return power(x, 0.5)
    return np.sqrt(x)
