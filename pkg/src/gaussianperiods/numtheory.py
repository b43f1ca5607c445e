"""Exact integer and polynomial arithmetic underpinning the period engine.

Everything here is pure and deterministic: plain Python integers (so
coefficients can never overflow), trial division plus deterministic
Miller-Rabin and Brent's rho for factoring 64-bit inputs, and memoized
construction of the division-tower polynomials and their reduction
matrices.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

from .errors import NotCoprime

gcd = math.gcd

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for all n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    """Brent's cycle variant; returns a nontrivial factor of composite odd n."""
    if n % 2 == 0:
        return 2
    for c in range(1, n):
        f = lambda x: (x * x + c) % n
        x, y, d = 2, 2, 1
        while d == 1:
            x = f(x)
            y = f(f(y))
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d
    raise ArithmeticError(f"rho failed for {n}")  # unreachable for composite n


def factorize(n: int) -> dict[int, int]:
    """Prime factorization as {prime: exponent}; factorize(1) == {}."""
    if n < 1:
        raise ValueError("factorize expects n >= 1")
    out: dict[int, int] = {}
    for p in (2, 3, 5, 7, 11, 13):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    # small trial division keeps rho off easy inputs
    f = 17
    while f * f <= n and f < 100_000:
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += 2
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _pollard_rho(m)
        stack.append(d)
        stack.append(m // d)
    return out


def divisors(n: int) -> list[int]:
    """All positive divisors of n, ascending."""
    divs = [1]
    for p, e in factorize(n).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def euler_totient(n: int) -> int:
    """Count of units mod n, from the factorization of n."""
    if n < 1:
        raise ValueError("totient expects n >= 1")
    phi = 1
    for p, e in factorize(n).items():
        phi *= p ** (e - 1) * (p - 1)
    return phi


def carmichael_lambda(n: int) -> int:
    """Exponent of the unit group mod n."""
    if n == 1:
        return 1
    lam = 1
    for p, e in factorize(n).items():
        if p == 2 and e >= 3:
            block = 2 ** (e - 2)
        else:
            block = p ** (e - 1) * (p - 1)
        lam = lam * block // math.gcd(lam, block)
    return lam


def multiplicative_order(omega: int, n: int) -> int:
    """Smallest d >= 1 with omega**d == 1 (mod n).

    Runs in polylog time: starts from the group exponent and strips prime
    factors, so it never iterates anywhere near n steps.
    """
    if n < 1:
        raise ValueError("modulus must be positive")
    if n == 1:
        return 1
    omega %= n
    if math.gcd(omega, n) != 1:
        raise NotCoprime(f"omega={omega} is not a unit mod {n}")
    d = carmichael_lambda(n)
    for p in factorize(d):
        while d % p == 0 and pow(omega, d // p, n) == 1:
            d //= p
    return d


@dataclass(frozen=True)
class IntPolynomial:
    """Dense integer polynomial; coeffs[k] multiplies t**k.

    Trailing zeros are stripped on construction, so the leading
    coefficient is nonzero unless this is the zero polynomial ().
    """

    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = self.coeffs
        k = len(c)
        while k and c[k - 1] == 0:
            k -= 1
        if k != len(c):
            object.__setattr__(self, "coeffs", tuple(c[:k]))
        else:
            object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    @property
    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __mul__(self, other: "IntPolynomial") -> "IntPolynomial":
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return IntPolynomial(())
        out = [0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    out[i + j] += ai * bj
        return IntPolynomial(tuple(out))

    def divmod_monic(self, den: "IntPolynomial") -> tuple["IntPolynomial", "IntPolynomial"]:
        """Long division by a monic divisor; exact over the integers."""
        if not den.is_monic:
            raise ValueError("divisor must be monic")
        rem = list(self.coeffs)
        dd = den.degree
        q = [0] * max(len(rem) - dd, 0)
        for k in range(len(rem) - 1, dd - 1, -1):
            f = rem[k]
            if f == 0:
                continue
            q[k - dd] = f
            for j, c in enumerate(den.coeffs):
                rem[k - dd + j] -= f * c
        return IntPolynomial(tuple(q)), IntPolynomial(tuple(rem[:dd]))

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            term = "t" if k == 1 else f"t^{k}" if k else ""
            mag = "" if abs(c) == 1 and k else str(abs(c))
            parts.append(("-" if c < 0 else "+" if parts else "") + mag + term)
        return " ".join(parts) if parts[0][0] != "+" else " ".join(parts)


@functools.cache
def cyclotomic(d: int) -> IntPolynomial:
    """The d-th division-tower polynomial, monic of degree totient(d).

    Built by the recursive identity: (t**d - 1) divided exactly by the
    product of all lower-index polynomials over the divisors of d.
    The functools cache is safe under concurrent use; a duplicated
    computation yields an identical value.
    """
    if d < 1:
        raise ValueError("d must be positive")
    if d == 1:
        return IntPolynomial((-1, 1))
    den = IntPolynomial((1,))
    for e in divisors(d):
        if e < d:
            den = den * cyclotomic(e)
    num = IntPolynomial((-1,) + (0,) * (d - 1) + (1,))
    q, r = num.divmod_monic(den)
    if r.coeffs:
        raise ArithmeticError(f"inexact division for d={d}")
    return q


@dataclass(frozen=True)
class ExponentMatrix:
    """Row k holds the coefficients of t**k reduced mod the monic
    degree-phi_d polynomial for index d; d rows, phi_d columns."""

    d: int
    phi_d: int
    rows: tuple[tuple[int, ...], ...]


@functools.cache
def exponent_matrix(d: int) -> ExponentMatrix:
    """Reduce t**k for k = 0..d-1, incrementally: shift the previous row
    by one degree and eliminate the overflow term using the monic modulus."""
    if d < 1:
        raise ValueError("d must be positive")
    phi = cyclotomic(d).degree
    tail = cyclotomic(d).coeffs[:phi]  # t**phi == -sum(tail[j] * t**j)
    rows = [(1,) + (0,) * (phi - 1)]
    for _ in range(d - 1):
        prev = rows[-1]
        carry = prev[phi - 1]
        shifted = [0] + list(prev[: phi - 1])
        if carry:
            for j in range(phi):
                shifted[j] -= carry * tail[j]
        rows.append(tuple(shifted))
    return ExponentMatrix(d=d, phi_d=phi, rows=tuple(rows))
