"""Closed-form observables of the heralded Hermite-excited squeezed vacuum.

Every public function takes the derived symbols ``d`` (see
:func:`hesvs.params.derive`), the source squeezing ``r`` and the heralded
photon count ``m``.  The normalisation N_m equals the heralding probability
p(m); pass it as ``norm=`` to skip recomputing it.

Phase-space functions accept a ``measure`` argument:

``"xp"``
    density with respect to dx dp, so that integrals over the plane give 1
    and the Wigner marginals are quadrature distributions.
``"alpha"``
    density with respect to d^2 alpha, alpha = (x + i p)/sqrt(2); twice the
    ``"xp"`` value.  In this measure W(0, 0) = (2/pi) (-1)^m.
"""
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import DegreeOverflowError, ParameterError, UndefinedQError, ZeroProbabilityError
from .params import ModelParams, derive, phase_params, wigner_aux
from .specfun import legendre, log_factorial, scaled_hermite

MAX_MOMENT_ORDER = 8

# |B3| below this disables the Legendre cross-check
LEGENDRE_B3_FLOOR = 1e-12

_MEASURES = {"xp": 0.5, "alpha": 1.0}


@dataclass(frozen=True)
class FockState:
    """Normalised photon-number amplitudes of a single-mode state.

    ``amplitudes[n]`` is <n|psi>; entries with n + m odd are exactly zero.
    """

    amplitudes: np.ndarray
    m_parity: int

    @property
    def n_max(self):
        return len(self.amplitudes) - 1

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class ObservableReport:
    p_event: float
    mean_n: float
    mandel_q: float | None
    source: str


def _measure_scale(measure):
    try:
        return _MEASURES[measure]
    except KeyError:
        raise ParameterError("measure", measure, "expected 'xp' or 'alpha'") from None


def _zero_probability_guard(d, r, m):
    if m > 0 and r == 0:
        raise ZeroProbabilityError("r", r, "no photons leave the beam splitter, so m > 0 cannot be detected")
    if m % 2 and d.nu == 0.0:
        raise ZeroProbabilityError(
            "m", m, "a symmetric beam splitter separates the modes; odd counts never occur"
        )


def _log_pow(base, exponent):
    """Return (sign, log|base^exponent|) with 0^0 = 1 and 0^k = 0 (log -inf)."""
    if exponent == 0:
        return 1.0, 0.0
    if base == 0.0:
        return 0.0, -math.inf
    sign = -1.0 if (base < 0 and exponent % 2) else 1.0
    return sign, exponent * math.log(abs(base))


def event_probability(d, r, m, *, path="series", branch=1):
    """Probability p(m) of counting m photons; also the norm N_m of the conditional state.

    ``path="series"`` sums the double-derivative generating function term by
    term (all terms positive).  ``path="legendre"`` uses the Legendre closed
    form; ``branch`` picks the sign of sqrt(B3), and the result does not depend
    on it.
    """
    _zero_probability_guard(d, r, m)
    cosh2 = math.cosh(r) ** 2
    if path == "series":
        logs = []
        for a in range(m // 2 + 1):
            s1, l1 = _log_pow(d.B1 / 2, 2 * a)
            s2, l2 = _log_pow(d.B2, m - 2 * a)
            if s1 * s2 != 0.0:
                logs.append(l1 + l2 - 2 * log_factorial(a) - log_factorial(m - 2 * a))
        if not logs:
            raise ZeroProbabilityError("m", m, "heralding probability is exactly zero")
        top = max(logs)
        total = top + math.log(sum(math.exp(v - top) for v in logs))
        prob = math.exp(log_factorial(m) + total) / (math.sqrt(d.A) * cosh2)
    elif path == "legendre":
        if abs(d.B3) < LEGENDRE_B3_FLOOR:
            raise ParameterError("B3", d.B3, "Legendre form is degenerate; use path='series'")
        root_b3 = branch * np.sqrt(complex(d.B3))
        # tie sqrt(B4) to the chosen sqrt(B3): sqrt(B4) = -B2/sqrt(B3)
        root_b4 = -d.B2 / root_b3
        value = (-root_b3) ** m * legendre(m, root_b4) / (cosh2 * math.sqrt(d.A))
        prob = float(value.real)
    else:
        raise ParameterError("path", path, "expected 'series' or 'legendre'")
    if prob <= 0.0:
        raise ZeroProbabilityError("m", m, "heralding probability underflows to zero")
    return prob


def fock_amplitudes(d, r, m, n_max, *, norm=None):
    """Vector of normalised amplitudes <n|Psi_m> for n = 0..n_max."""
    norm = event_probability(d, r, m) if norm is None else norm
    out = np.zeros(n_max + 1)
    log_pref_base = 0.5 * log_factorial(m) - 0.5 * math.log(norm) - math.log(math.cosh(r))
    for n in range((m % 2), n_max + 1, 2):
        terms = []
        for g in range(m % 2, min(m, n) + 1, 2):
            s_mu, l_mu = _log_pow(d.mu / 2, (m + n - 2 * g) // 2)
            s_nu, l_nu = _log_pow(d.nu, g)
            if s_mu * s_nu == 0.0:
                continue
            sign = s_mu * s_nu * (-1.0 if ((m - g) // 2) % 2 else 1.0)
            log_mag = l_mu + l_nu - log_factorial((n - g) // 2) - log_factorial((m - g) // 2) - log_factorial(g)
            terms.append(sign * math.exp(log_mag + log_pref_base + 0.5 * log_factorial(n)))
        out[n] = math.fsum(terms)
    return out


def fock_amplitude(d, r, m, n, *, norm=None):
    """Normalised amplitude <n|Psi_m>; exactly zero when n + m is odd."""
    if n < 0:
        raise ParameterError("n", n, "must be non-negative")
    if (n + m) % 2:
        _zero_probability_guard(d, r, m)
        return 0.0
    return float(fock_amplitudes(d, r, m, n, norm=norm)[n])


def pnd(d, r, m, n, *, norm=None):
    """Photon-number distribution P(n|m)."""
    return fock_amplitude(d, r, m, n, norm=norm) ** 2


def fock_state(d, r, m, n_max, *, norm=None):
    """Closed-form conditional state truncated at n_max (not renormalised)."""
    return FockState(fock_amplitudes(d, r, m, n_max, norm=norm).astype(complex), m % 2)


def _series_exp(terms, shape, max_power):
    """Truncated power series of exp(sum c * prod var^e) on a dense exponent grid."""
    result = np.zeros(shape)
    result[(0,) * len(shape)] = 1.0
    term = result.copy()
    for j in range(1, max_power + 1):
        nxt = np.zeros(shape)
        for coef, exps in terms:
            if coef == 0.0:
                continue
            if any(e >= s for e, s in zip(exps, shape)):
                continue
            src = tuple(slice(0, s - e) for e, s in zip(exps, shape))
            dst = tuple(slice(e, s) for e, s in zip(exps, shape))
            nxt[dst] += coef * term[src]
        term = nxt / j
        result += term
    return result


def moments(d, r, m, k, l, *, norm=None):
    """Anti-normally ordered moment <a^k a^dagger^l> of the conditional state.

    Extracts the s^m tau^m x^k y^l coefficient of the exponential generating
    function on a dense grid of exponents (no symbolic work, no truncation
    error: each variable is cut exactly at the power that is read off).
    """
    if k < 0 or l < 0:
        raise ParameterError("k, l", (k, l), "orders must be non-negative")
    if k + l > MAX_MOMENT_ORDER:
        raise DegreeOverflowError("k + l", k + l, f"moment order above {MAX_MOMENT_ORDER}")
    norm = event_probability(d, r, m) if norm is None else norm
    mu, nu, A = d.mu, d.nu, d.A
    # exponent order: (s, tau, x, y)
    terms = [
        (-d.B1 / 2, (2, 0, 0, 0)),
        (-d.B1 / 2, (0, 2, 0, 0)),
        (d.B2, (1, 1, 0, 0)),
        (mu * nu / A, (1, 0, 1, 0)),
        (mu * nu / A, (0, 1, 0, 1)),
        (nu / A, (1, 0, 0, 1)),
        (nu / A, (0, 1, 1, 0)),
        (mu / (2 * A), (0, 0, 2, 0)),
        (mu / (2 * A), (0, 0, 0, 2)),
        (1 / A, (0, 0, 1, 1)),
    ]
    series = _series_exp(terms, (m + 1, m + 1, k + 1, l + 1), (2 * m + k + l) // 2)
    coef = series[m, m, k, l]
    log_scale = log_factorial(m) + log_factorial(k) + log_factorial(l) - math.log(norm)
    return float(coef * math.exp(log_scale) / (math.cosh(r) ** 2 * math.sqrt(A)))


def mean_photon(d, r, m, *, norm=None):
    """Mean photon number <a^dagger a> = <a a^dagger> - 1."""
    return moments(d, r, m, 1, 1, norm=norm) - 1.0


def mandel_q(d, r, m, *, norm=None):
    """Mandel Q = (<n^2> - <n>^2)/<n> - 1, written in anti-normal moments."""
    norm = event_probability(d, r, m) if norm is None else norm
    n1 = moments(d, r, m, 1, 1, norm=norm)
    n2 = moments(d, r, m, 2, 2, norm=norm)
    mean = n1 - 1.0
    if mean <= 1e-15:
        raise UndefinedQError(f"mean photon number {mean!r} is zero; Q is undefined")
    return (n2 - n1 * n1 - 2.0 * n1 + 1.0) / mean


def observables(d, r, m):
    """p(m), <n> and Q in one report; Q is None when undefined."""
    norm = event_probability(d, r, m)
    try:
        q = mandel_q(d, r, m, norm=norm)
    except UndefinedQError:
        q = None
    return ObservableReport(norm, mean_photon(d, r, m, norm=norm), q, "analytic")


def quad_wavefunction(d, r, m, x, phi, *, norm=None):
    """Rotated-quadrature wavefunction <x, phi|Psi_m>."""
    norm = event_probability(d, r, m) if norm is None else norm
    pp = phase_params(d, r, phi)
    x = np.asarray(x, dtype=float)
    herm = scaled_hermite(m, math.sqrt(2) * pp.Delta * x, pp.Gamma / 2)
    denom = np.sqrt(norm * math.factorial(m) * pp.Theta) * math.cosh(r)
    out = math.pi ** -0.25 * np.exp(-pp.Pi * x * x / 2) * herm / denom
    return out.item() if np.ndim(out) == 0 else out


def qcd(d, r, m, x, phi, *, norm=None):
    """Quadrature-component distribution P(x, phi|m)."""
    return np.abs(quad_wavefunction(d, r, m, x, phi, norm=norm)) ** 2


def wigner(d, r, m, x, p, *, measure="xp", norm=None):
    """Wigner function at phase-space point (x, p)."""
    scale = _measure_scale(measure)
    norm = event_probability(d, r, m) if norm is None else norm
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    alpha = (x + 1j * p) / math.sqrt(2)
    R = wigner_aux(d, alpha)
    envelope = np.exp(-2 * d.Xi * (x * x + p * p) / 2 + (2 * d.mu / d.A) * (x * x - p * p))
    total = np.zeros(np.broadcast(x, p).shape)
    for l in range(m + 1):
        s_b2, l_b2 = _log_pow(-d.B2, l)
        if s_b2 == 0.0:
            continue
        weight = s_b2 * math.exp(l_b2 - log_factorial(l) - 2 * log_factorial(m - l))
        total = total + weight * np.abs(scaled_hermite(m - l, R, d.B1 / 2)) ** 2
    pref = 2 * math.factorial(m) / (math.pi * norm * math.cosh(r) ** 2 * math.sqrt(d.A))
    out = scale * pref * envelope * total
    return out.item() if np.ndim(out) == 0 else out


def husimi_amplitude(d, r, m, beta, *, norm=None):
    """Coherent-state overlap <beta|Psi_m>."""
    norm = event_probability(d, r, m) if norm is None else norm
    bc = np.conj(np.asarray(beta, dtype=complex))
    herm = scaled_hermite(m, d.nu * bc, d.mu / 2)
    return np.exp(-np.abs(bc) ** 2 / 2 + d.mu * bc * bc / 2) * herm / (
        math.sqrt(math.factorial(m) * norm) * math.cosh(r)
    )


def husimi(d, r, m, x, p, *, measure="xp", norm=None):
    """Husimi function; non-negative by construction."""
    scale = _measure_scale(measure)
    beta = (np.asarray(x, dtype=float) + 1j * np.asarray(p, dtype=float)) / math.sqrt(2)
    out = scale * np.abs(husimi_amplitude(d, r, m, beta, norm=norm)) ** 2 / math.pi
    return out.item() if np.ndim(out) == 0 else out


class ConditionalState:
    """Immutable per-parameter context: validates once, caches d and N_m.

    >>> s = ConditionalState(0.0, 0.5, 3)
    >>> round(s.mean_photon(), 12)
    3.0
    """

    def __init__(self, theta, r, m):
        self._params = ModelParams(theta, r, m)
        self._derived = derive(self._params)

    def __repr__(self):
        p = self._params
        return f"ConditionalState(theta={p.theta!r}, r={p.r!r}, m={p.m!r})"

    @property
    def params(self):
        return self._params

    @property
    def derived(self):
        return self._derived

    @cached_property
    def norm(self):
        return event_probability(self._derived, self._params.r, self._params.m)

    def _args(self):
        return self._derived, self._params.r, self._params.m

    def event_probability(self):
        return self.norm

    def fock_amplitudes(self, n_max):
        return fock_amplitudes(*self._args(), n_max, norm=self.norm)

    def pnd(self, n_max):
        return self.fock_amplitudes(n_max) ** 2

    def moments(self, k, l):
        return moments(*self._args(), k, l, norm=self.norm)

    def mean_photon(self):
        return mean_photon(*self._args(), norm=self.norm)

    def mandel_q(self):
        return mandel_q(*self._args(), norm=self.norm)

    def quad_wavefunction(self, x, phi):
        return quad_wavefunction(*self._args(), x, phi, norm=self.norm)

    def qcd(self, x, phi):
        return qcd(*self._args(), x, phi, norm=self.norm)

    def wigner(self, x, p, measure="xp"):
        return wigner(*self._args(), x, p, measure=measure, norm=self.norm)

    def husimi(self, x, p, measure="xp"):
        return husimi(*self._args(), x, p, measure=measure, norm=self.norm)
