import logging
from fractions import Fraction
from math import gcd, prod

from sympy import divisors, factorint, isprime, jacobi_symbol, nextprime

from .exceptions import PlaceError

logger = logging.getLogger(__name__)

INFINITY = 'inf'


def factor(n):
    """
    Factor a positive integer.

    Args:
        n: integer >= 1

    Returns:
        list of (prime, exponent) pairs in increasing order of the prime
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"factor() needs a positive integer, got {n}")
    return sorted((int(p), int(e)) for p, e in factorint(n).items())


def prime_divisors(n):
    return [p for p, _ in factor(n)]


def valuation(n, p):
    """Exponent of the prime p in the nonzero rational n."""
    n = Fraction(n)
    if n == 0:
        raise ValueError("valuation of zero is undefined")
    v = 0
    num, den = n.numerator, n.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def is_squarefree(n):
    return n >= 1 and all(e == 1 for _, e in factor(n))


def next_prime_coprime_to(n, start=2):
    """Smallest prime >= start not dividing n."""
    q = start if isprime(start) else nextprime(start)
    while n % q == 0:
        q = nextprime(q)
    return q


def kronecker(a, n):
    """Kronecker symbol (a | n), extending the Jacobi symbol to every integer n."""
    a, n = int(a), int(n)
    if n == 0:
        return 1 if a in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    if n == 1:
        return result
    return result * jacobi_symbol(a % n, n)


def _square_class(a):
    # Multiply by the square of the denominator so the symbol only sees integers.
    a = Fraction(a)
    if a == 0:
        raise ValueError("Hilbert symbol arguments must be nonzero")
    return a.numerator * a.denominator


def _split(a, p):
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v, a


def hilbert_symbol(a, b, place):
    """
    Local Hilbert symbol (a, b)_v for nonzero rationals a, b.

    Args:
        a: nonzero rational
        b: nonzero rational
        place: a prime number, or INFINITY

    Returns:
        1 if z^2 = a x^2 + b y^2 has a nontrivial solution over Q_v, else -1
    """
    a, b = _square_class(a), _square_class(b)
    if place == INFINITY or place == float('inf'):
        return -1 if a < 0 and b < 0 else 1
    p = int(place)
    if p < 2 or not isprime(p):
        raise PlaceError(f"Place must be a prime or infinity, got {place}")

    alpha, u = _split(a, p)
    beta, v = _split(b, p)
    if p == 2:
        def eps(x):
            return ((x - 1) // 2) % 2

        def omega(x):
            return ((x * x - 1) // 8) % 2

        exponent = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
        return -1 if exponent % 2 else 1

    sign = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    return sign * jacobi_symbol(u % p, p) ** beta * jacobi_symbol(v % p, p) ** alpha


def ramified_places(a, b):
    """Finite primes where (a, b | Q) ramifies, plus INFINITY when definite."""
    num = abs(_square_class(a) * _square_class(b))
    candidates = set(prime_divisors(2 * num))
    places = [p for p in sorted(candidates) if hilbert_symbol(a, b, p) == -1]
    if hilbert_symbol(a, b, INFINITY) == -1:
        places.append(INFINITY)
    return places


def divisor_sum_constrained(n, a, b):
    """
    Coefficient C(n, E_{2,a,b}): sum of d over divisors d of n with
    gcd(d, a) = 1 and gcd(n/d, b) = 1.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"divisor_sum_constrained() needs n >= 1, got {n}")
    return sum(
        int(d) for d in divisors(n)
        if gcd(int(d), a) == 1 and gcd(n // int(d), b) == 1
    )


def eisenstein_constant_term(a, b):
    """Constant term (-1/24) * prod over p | ab of (1 - 1/p)."""
    return Fraction(-1, 24) * prod(
        (1 - Fraction(1, p) for p in prime_divisors(a * b)), start=Fraction(1)
    )


def hilbert_product(a, b):
    """Product of (a, b)_v over every place; 1 by reciprocity."""
    num = abs(_square_class(a) * _square_class(b))
    places = set(prime_divisors(2 * num))
    return prod((hilbert_symbol(a, b, p) for p in places), start=hilbert_symbol(a, b, INFINITY))


def gamma0_index(N):
    """[SL_2(Z) : Gamma_0(N)] = N prod_{p | N} (1 + 1/p)."""
    index = Fraction(N)
    for p in prime_divisors(N):
        index *= 1 + Fraction(1, p)
    return int(index)
