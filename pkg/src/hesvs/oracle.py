"""Exact Fock-basis construction of the heralded state, independent of the closed forms.

The two-mode squeezed vacuum is expanded in its Schmidt basis |n, n>, each
term is pushed through the beam splitter one conserved-photon-number block at
a time, and the second mode is projected on |m>.  Observables are then taken
directly from the amplitude vector.  Nothing here imports :mod:`hesvs.analytic`
formulas or :mod:`hesvs.specfun` polynomials.
"""
import math
from dataclasses import dataclass, replace

import mpmath
import numpy as np

from .analytic import FockState, ObservableReport
from .exceptions import ParameterError, UndefinedQError, ZeroProbabilityError
from .params import ModelParams

# trailing amplitudes below this are dropped from the returned state
_TRIM = 1e-20


@dataclass(frozen=True)
class TruncationPolicy:
    """Schmidt cutoff of the input state.

    ``n_max`` is the largest Schmidt index n kept in sech(r) sum tanh^n(r) |n, n>.
    It is raised automatically until the discarded weight tanh^(2 n_max)(r) /
    cosh^2(r), multiplied by (n_max + 2)^2, is below ``tail_tolerance`` and
    n_max >= m + 2.  The extra factor bounds the tail's contribution to second
    moments, so Mandel Q converges as well as the probabilities do.
    """

    n_max: int = 64
    tail_tolerance: float = 1e-14

    def resolve(self, r, m):
        n = max(self.n_max, m + 2)
        t = math.tanh(r)
        if t == 0.0:
            return replace(self, n_max=n)
        if t >= 1.0:
            raise ParameterError("r", r, "tanh(r) rounds to 1; the Schmidt series cannot be truncated")
        log_t2 = 2 * math.log(t)
        log_sech2 = -2 * math.log(math.cosh(r))
        while log_sech2 + n * log_t2 + 2 * math.log(n + 2) >= math.log(self.tail_tolerance):
            n += 1
        return replace(self, n_max=n)


def _mp_angle(theta):
    # angles within a few ulp of pi/4 and pi/2 are taken as exact
    if abs(theta - math.pi / 4) < 4e-16:
        return mpmath.pi / 4
    if abs(theta - math.pi / 2) < 8e-16:
        return mpmath.pi / 2
    return mpmath.mpf(theta)


def bs_fock_amplitude(theta, n, k, m):
    """Beam-splitter matrix element <k, m| B |n, n>.

    B|n, n> = (a+ cos - b+ sin)^n (a+ sin + b+ cos)^n |0, 0> / n!, expanded
    binomially.  The sum alternates with terms up to ~4^n times the result, so
    it is evaluated with that many extra decimal digits.
    """
    if k < 0 or m < 0 or n < 0 or k + m != 2 * n:
        return 0.0
    with mpmath.workdps(30 + int(0.61 * n) + 1):
        ang = _mp_angle(theta)
        c, s = mpmath.cos(ang), mpmath.sin(ang)
        total = mpmath.mpf(0)
        largest = mpmath.mpf(0)
        for j in range(max(0, k - n), min(n, k) + 1):
            i = k - j
            term = math.comb(n, j) * math.comb(n, i) * c ** (j + n - i) * s ** (n - j + i)
            if (n - j) % 2:
                term = -term
            total += term
            largest = max(largest, abs(term))
        # cancellation down to working precision means an exact zero
        if abs(total) <= largest * mpmath.mpf(10) ** (-(mpmath.mp.dps - 10)):
            return 0.0
        norm = mpmath.sqrt(mpmath.factorial(k) * mpmath.factorial(m)) / mpmath.factorial(n)
        return float(total * norm)


def unnormalized_amplitudes(p, policy=None):
    """Raw conditional amplitudes <k|_a <m|_b B |TMSV> and their total weight.

    Returns ``(amplitudes, p_event)``; never raises for a zero-weight event.
    """
    if not isinstance(p, ModelParams):
        p = ModelParams(*p)
    policy = (policy or TruncationPolicy()).resolve(p.r, p.m)
    t = math.tanh(p.r)
    sech = 1.0 / math.cosh(p.r)
    size = 2 * policy.n_max - p.m + 1
    amps = np.zeros(max(size, p.m % 2 + 1))
    for n in range((p.m + 1) // 2, policy.n_max + 1):
        k = 2 * n - p.m
        weight = sech * t ** n if n else sech
        if weight == 0.0:
            break
        amps[k] = weight * bs_fock_amplitude(p.theta, n, k, p.m)
    return amps, float(math.fsum(amps ** 2))


def conditional_amplitudes(p, policy=None):
    """Normalised heralded state and the heralding probability."""
    if not isinstance(p, ModelParams):
        p = ModelParams(*p)
    amps, p_event = unnormalized_amplitudes(p, policy)
    if p_event < 1e-300:
        raise ZeroProbabilityError("m", p.m, f"heralding probability {p_event!r} is zero")
    amps = amps / math.sqrt(p_event)
    keep = np.nonzero(np.abs(amps) >= _TRIM)[0]
    amps = amps[: keep[-1] + 1]
    return FockState(amps.astype(complex), p.m % 2), p_event


def oracle_pnd(state):
    return np.abs(state.amplitudes) ** 2


def oracle_moments(state, k, l):
    """<a^k a^dagger^l> summed directly over the amplitude vector."""
    c = state.amplitudes
    size = len(c)
    total = 0j
    for n in range(size):
        j = n + l - k
        if j < 0 or j >= size:
            continue
        log_w = 0.5 * (2 * math.lgamma(n + l + 1) - math.lgamma(n + 1) - math.lgamma(j + 1))
        total += np.conj(c[j]) * c[n] * math.exp(log_w)
    return complex(total)


def oracle_mean(state):
    return oracle_moments(state, 1, 1).real - 1.0


def oracle_q(state):
    n1 = oracle_moments(state, 1, 1).real
    n2 = oracle_moments(state, 2, 2).real
    mean = n1 - 1.0
    if mean <= 1e-15:
        raise UndefinedQError(f"mean photon number {mean!r} is zero; Q is undefined")
    return (n2 - n1 * n1 - 2.0 * n1 + 1.0) / mean


def oracle_report(p, policy=None):
    state, p_event = conditional_amplitudes(p, policy)
    try:
        q = oracle_q(state)
    except UndefinedQError:
        q = None
    return ObservableReport(p_event, oracle_mean(state), q, "oracle")


def _hermite_functions(x, n_max):
    """Normalised oscillator eigenfunctions psi_n(x), n = 0..n_max, by recurrence."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = math.pi ** -0.25 * np.exp(-x * x / 2)
    if n_max:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(1, n_max):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def oracle_quad_wavefunction(state, x, phi):
    """<x, phi|psi> = sum_n c_n e^{-i n phi} psi_n(x)."""
    c = state.amplitudes
    psi = _hermite_functions(x, len(c) - 1)
    phases = np.exp(-1j * phi * np.arange(len(c)))
    return np.tensordot(c * phases, psi, axes=1)


def oracle_qcd(state, x, phi):
    return np.abs(oracle_quad_wavefunction(state, x, phi)) ** 2


def _scale(measure):
    if measure == "xp":
        return 0.5
    if measure == "alpha":
        return 1.0
    raise ParameterError("measure", measure, "expected 'xp' or 'alpha'")


def oracle_wigner(state, x, p, measure="xp"):
    """Wigner function as (2/pi) <psi| D(2 alpha) Parity |psi>.

    Displacement elements use the associated-Laguerre form
    <n+k|D(b)|n> = sqrt(n!/(n+k)!) b^k e^{-|b|^2/2} L_n^(k)(|b|^2), with the
    prefactor assembled in log-magnitude.
    """
    x, p = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(p, dtype=float))
    shape = x.shape
    beta = (np.sqrt(2.0) * (x + 1j * p)).ravel()
    X = np.abs(beta) ** 2
    with np.errstate(divide="ignore"):
        log_abs = np.log(np.abs(beta))
    phase = np.exp(1j * np.angle(beta))
    c = state.amplitudes
    size = len(c)
    sign = (-1.0) ** np.arange(size)
    lf = np.array([math.lgamma(j + 1) for j in range(2 * size)])
    total = np.zeros(beta.shape, dtype=complex)
    for k in range(size):
        count = size - k
        lower = np.conj(c[k:]) * c[:count] * sign[:count]
        upper = np.conj(c[:count]) * c[k:] * sign[k:]
        if not (np.any(lower) or np.any(upper)):
            continue
        if k == 0:
            log_mag = -X / 2
        else:
            log_mag = np.where(X > 0, k * log_abs - X / 2, -np.inf)
        acc_lo = np.zeros_like(total)
        acc_up = np.zeros_like(total)
        lag_prev = np.zeros_like(X)
        lag = np.ones_like(X)
        for n in range(count):
            if n == 1:
                lag_prev, lag = lag, 1.0 + k - X
            elif n > 1:
                lag_prev, lag = lag, ((2 * n - 1 + k - X) * lag - (n - 1 + k) * lag_prev) / n
            if lower[n] == 0 and upper[n] == 0:
                continue
            w = np.exp(log_mag + 0.5 * (lf[n] - lf[n + k])) * lag
            acc_lo += lower[n] * w
            acc_up += upper[n] * w
        if k == 0:
            total += acc_lo
        else:
            total += acc_lo * phase ** k + acc_up * (-np.conj(phase)) ** k
    out = _scale(measure) * (2.0 / math.pi) * total.real
    return out.reshape(shape) if shape else float(out[0])


def oracle_husimi(state, x, p, measure="xp"):
    """(1/pi) |<beta|psi>|^2 with <beta|n> = e^{-|beta|^2/2} conj(beta)^n / sqrt(n!)."""
    beta = (np.asarray(x, dtype=float) + 1j * np.asarray(p, dtype=float)) / math.sqrt(2.0)
    bc = np.conj(beta)
    c = state.amplitudes
    term = np.exp(-np.abs(beta) ** 2 / 2).astype(complex)
    overlap = c[0] * term
    for n in range(1, len(c)):
        term = term * bc / math.sqrt(n)
        overlap = overlap + c[n] * term
    out = _scale(measure) * np.abs(overlap) ** 2 / math.pi
    return out.item() if np.ndim(out) == 0 else out
