"""Closed forms and statements exactly as originally printed.

These are kept verbatim, including their defects, so that
:func:`hesvs.gridscan.validate` can measure each one against the Fock-basis
oracle and report the mismatch by name.  Library code never calls them.
"""
import math

import numpy as np

from .specfun import hermite, legendre


def legendre_probability(d, r, m):
    """(-sqrt(B3))^m P_m(sqrt(B4)) / (cosh^2 r sqrt(A)) with principal roots.

    Off by (-1)^m wherever B3 > 0 (e.g. theta = 0).
    """
    root_b3 = np.sqrt(complex(d.B3))
    root_b4 = np.sqrt(complex(d.B4))
    value = (-root_b3) ** m * legendre(m, root_b4) / (math.cosh(r) ** 2 * math.sqrt(d.A))
    return float(value.real)


def wigner(d, r, m, norm, x, p):
    """Wigner sum with (-B1/2)^(m-l) |H_(m-l)(-R/sqrt(2 B1))|^2 terms (d^2 alpha measure).

    Undefined at B1 = 0.
    """
    alpha = (np.asarray(x, dtype=float) + 1j * np.asarray(p, dtype=float)) / math.sqrt(2)
    R = 2 * d.nu * (alpha - d.mu * np.conj(alpha)) / d.A
    env = np.exp(-2 * d.Xi * np.abs(alpha) ** 2 + 2 * d.mu / d.A * (alpha ** 2 + np.conj(alpha) ** 2))
    total = 0
    for l in range(m + 1):
        coef = (-d.B2) ** l * (-d.B1 / 2) ** (m - l) / (math.factorial(l) * math.factorial(m - l) ** 2)
        total = total + coef * np.abs(hermite(m - l, -R / np.sqrt(complex(2 * d.B1)))) ** 2
    pref = 2 * math.factorial(m) / (math.pi * norm * math.cosh(r) ** 2 * math.sqrt(d.A))
    return np.real(pref * env * total)


def wigner_m0(d, x, p):
    """The m = 0 reduction as stated: exp(-p^2 e^{-2 lam} - x^2 e^{2 lam}) / pi."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    return np.exp(-p * p * math.exp(-2 * d.lam) - x * x * math.exp(2 * d.lam)) / math.pi


def wigner_center(m):
    """W(0, 0|m) = (2/pi) (-1)^m, a value in the d^2 alpha measure."""
    return 2 / math.pi * (-1) ** m


def mean_photon_m0(r):
    """Mean photon number for m = 0 as stated: sinh^2 r."""
    return math.sinh(r) ** 2


def omega(d, r, m, norm):
    """Omega_m = mu^m cosh(lam) / (2^m m! N_m cosh^2 r)."""
    return d.mu ** m * math.cosh(d.lam) / (2 ** m * math.factorial(m) * norm * math.cosh(r) ** 2)


def hermite_excited_state(d, r, m, norm, n_max):
    """Fock amplitudes of Omega_m^{1/2} H_m(nu a^+/sqrt(2 mu)) S(lam)|0>.

    Requires mu > 0.
    """
    arg = d.nu / math.sqrt(2 * d.mu)
    # H_m(arg a^+) as coefficients of a^+^j
    herm = np.zeros(m + 1)
    for k in range(m // 2 + 1):
        herm[m - 2 * k] = (
            (-1) ** k * math.factorial(m) / (math.factorial(k) * math.factorial(m - 2 * k)) * (2 * arg) ** (m - 2 * k)
        )
    t = math.tanh(d.lam)
    out = np.zeros(n_max + 1)
    for n in range(n_max + 1):
        total = 0.0
        for j in range(n % 2, min(m, n) + 1, 2):
            if herm[j] == 0.0:
                continue
            k = (n - j) // 2
            # a^+^{2k} coefficient of cosh^{-1/2}(lam) exp(t a^+^2 / 2), times sqrt(n!)
            log_vac = k * math.log(t / 2) - math.lgamma(k + 1) + 0.5 * math.lgamma(n + 1) if k else 0.5 * math.lgamma(n + 1)
            total += herm[j] * math.exp(log_vac)
        out[n] = total / math.sqrt(math.cosh(d.lam))
    return math.sqrt(omega(d, r, m, norm)) * out


def symmetric_probability(r, m):
    """p(m) at theta = pi/4 from the series with the stated B1 = -tanh(r)/2, B2 = 0."""
    if m % 2:
        return 0.0
    b1 = -math.tanh(r) / 2
    a = m // 2
    return math.factorial(m) * (b1 / 2) ** m / (math.factorial(a) ** 2 * math.cosh(r))
