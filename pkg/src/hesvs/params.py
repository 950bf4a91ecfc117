"""Experiment parameters and the derived quantities every closed form uses.

A two-mode squeezed vacuum with squeezing ``r`` enters a lossless beam
splitter of angle ``theta`` (transmittance cos(theta)); ``m`` photons are
counted in the second output port.
"""
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError

M_MAX = 30

# cos(2 theta) and sin(2 theta) below this are snapped to exact zero, so that
# theta = pi/4 and theta in {0, pi/2} hit their special cases bit-exactly
_SNAP = 8 * np.finfo(float).eps

# B4 is treated as undefined when |B3| is below this
_B3_FLOOR = 1e-300


@dataclass(frozen=True)
class ModelParams:
    """Beam-splitter angle, source squeezing and detected photon count."""

    theta: float
    r: float
    m: int

    def __post_init__(self):
        theta, r, m = self.theta, self.r, self.m
        if not isinstance(theta, (int, float, np.floating, np.integer)) or not math.isfinite(theta):
            raise ParameterError("theta", theta, "must be a finite real number")
        if not 0.0 <= theta <= math.pi / 2:
            raise ParameterError("theta", theta, "must lie in [0, pi/2]")
        if not isinstance(r, (int, float, np.floating, np.integer)) or not math.isfinite(r):
            raise ParameterError("r", r, "must be a finite real number")
        if r < 0:
            raise ParameterError("r", r, "must be non-negative")
        if isinstance(m, bool) or not isinstance(m, (int, np.integer)):
            raise ParameterError("m", m, "must be an integer")
        if not 0 <= m <= M_MAX:
            raise ParameterError("m", m, f"must lie in [0, {M_MAX}]")
        object.__setattr__(self, "theta", float(theta))
        object.__setattr__(self, "r", float(r))
        object.__setattr__(self, "m", int(m))


@dataclass(frozen=True)
class DerivedParams:
    """Symbols shared by all closed forms.

    ``mu`` and ``nu`` are the a-dagger-squared and cross couplings after the
    beam splitter; ``lam`` is the squeezing of the conditional state.  ``B4``
    is NaN when ``B4_defined`` is False (on the curve sin 2theta = tanh r).
    """

    mu: float
    nu: float
    lam: float
    A: float
    B1: float
    B2: float
    B3: float
    B4: float
    B4_defined: bool
    Xi: float


@dataclass(frozen=True)
class PhaseParams:
    """Complex auxiliaries of the rotated-quadrature wavefunction."""

    phi: float
    Theta: complex
    Pi: complex
    Gamma: complex
    Delta: complex


def _snapped(value):
    return 0.0 if abs(value) < _SNAP else value


def derive(p):
    """Compute :class:`DerivedParams` for validated :class:`ModelParams`."""
    if not isinstance(p, ModelParams):
        p = ModelParams(*p)
    t = math.tanh(p.r)
    s2 = _snapped(math.sin(2 * p.theta))
    c2 = _snapped(math.cos(2 * p.theta))
    mu = s2 * t
    nu = c2 * t
    cosh2 = math.cosh(p.r) ** 2
    A = 1.0 - mu * mu
    B3 = (t ** 4 - mu * mu) / A
    B4_defined = abs(B3) >= _B3_FLOOR
    return DerivedParams(
        mu=mu,
        nu=nu,
        lam=math.atanh(mu),
        A=A,
        B1=mu / (A * cosh2),
        B2=nu * nu / A,
        B3=B3,
        B4=nu ** 4 / (A * A * B3) if B4_defined else math.nan,
        B4_defined=B4_defined,
        Xi=(1.0 + mu * mu) / A,
    )


def phase_params(d, r, phi):
    """Auxiliaries for the quadrature X(phi) wavefunction of the conditional state."""
    t2 = math.tanh(r) ** 2
    rot = complex(math.cos(2 * phi), -math.sin(2 * phi))
    Theta = 1.0 + d.mu * rot
    return PhaseParams(
        phi=float(phi),
        Theta=Theta,
        Pi=(1.0 - d.mu * rot) / Theta,
        Gamma=(d.mu + rot * t2) / Theta,
        Delta=complex(math.cos(phi), -math.sin(phi)) * d.nu / Theta,
    )


def wigner_aux(d, alpha):
    """Linear source term R = 2 nu (alpha - mu conj(alpha)) / A of the Wigner kernel."""
    alpha = np.asarray(alpha, dtype=complex)
    out = 2.0 * d.nu * (alpha - d.mu * np.conj(alpha)) / d.A
    return out.item() if out.ndim == 0 else out
