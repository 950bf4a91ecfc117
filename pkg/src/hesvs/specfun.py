"""Orthogonal polynomials with complex arguments and factorial helpers.

All polynomial routines accept scalars or numpy arrays and broadcast.
"""
import math

import numpy as np

from .exceptions import ParameterError, UnsupportedOrderError

MAX_ORDER = 60

# math.factorial is exact; its log is correctly rounded well past this point
_EXACT_LOG_FACTORIAL_LIMIT = 170


def _check_order(m):
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)):
        raise ParameterError("m", m, "order must be an integer")
    if m < 0:
        raise ParameterError("m", m, "order must be non-negative")
    if m > MAX_ORDER:
        raise UnsupportedOrderError("m", m, f"order above supported cap {MAX_ORDER}")


def _as_complex(z):
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise ParameterError("z", z, "argument must be finite")
    return z


def _unwrap(value):
    return value.item() if np.ndim(value) == 0 else value


def hermite(m, z):
    """Physicists' Hermite polynomial H_m(z).

    Uses H_{k+1} = 2z H_k - 2k H_{k-1}, i.e. the convention whose generating
    function is exp(2 z t - t^2).
    """
    _check_order(m)
    z = _as_complex(z)
    h_prev = np.ones_like(z)
    if m == 0:
        return _unwrap(h_prev)
    h = 2 * z
    for k in range(1, m):
        h_prev, h = h, 2 * z * h - 2 * k * h_prev
    return _unwrap(h)


def legendre(m, z):
    """Legendre polynomial P_m(z) from the Bonnet recurrence."""
    _check_order(m)
    z = _as_complex(z)
    p_prev = np.ones_like(z)
    if m == 0:
        return _unwrap(p_prev)
    p = z.copy()
    for k in range(1, m):
        p_prev, p = p, ((2 * k + 1) * z * p - k * p_prev) / (k + 1)
    return _unwrap(p)


def scaled_hermite(m, z, q):
    """Homogeneous Hermite form G_m(z, q) = q^{m/2} H_m(z / (2 sqrt(q))).

    Equivalently m! times the t^m coefficient of exp(z t - q t^2), so

        G_m(z, q) = sum_k (-1)^k m! / (k! (m-2k)!) z^{m-2k} q^k.

    Evaluated by G_{j+1} = z G_j - 2 j q G_{j-1}, which involves no square
    roots: the result is single-valued for complex q and finite at q = 0,
    where it reduces to z^m.
    """
    _check_order(m)
    z = _as_complex(z)
    q = _as_complex(q)
    z, q = np.broadcast_arrays(z, q)
    g_prev = np.ones_like(z)
    if m == 0:
        return _unwrap(g_prev)
    g = z.copy()
    for j in range(1, m):
        g_prev, g = g, z * g - 2 * j * q * g_prev
    return _unwrap(g)


def log_factorial(n):
    """ln(n!) for a non-negative integer n."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 0:
        raise ParameterError("n", n, "must be a non-negative integer")
    n = int(n)
    if n <= _EXACT_LOG_FACTORIAL_LIMIT:
        return math.log(math.factorial(n))
    return math.lgamma(n + 1)


def binomial(n, k):
    """Exact integer binomial coefficient, zero outside 0 <= k <= n."""
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)
