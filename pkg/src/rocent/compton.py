"""Klein-Nishina azimuthal densities mapped onto RoC contrasts.

With ``x = beta (1 - cos theta)`` the azimuthal Klein-Nishina intensity is
proportional to ``2 sin^2(phi) (1 + x) + x^2``.  Normalized over ``[0, pi)``
it coincides with the RoC density ``(1 - r cos 2phi) / pi`` for
``r = 1 / (x + 1/(1 + x))``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad


@dataclass(frozen=True)
class ComptonKinematics:
    beta: float
    theta: float

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if not 0.0 < self.theta <= np.pi:
            raise ValueError("theta must lie in (0, pi]")

    @property
    def x(self) -> float:
        return self.beta * (1.0 - np.cos(self.theta))


def kn_numerator(k: ComptonKinematics, phi):
    x = k.x
    return 2.0 * np.sin(phi) ** 2 * (1.0 + x) + x**2


def kn_intensity(k: ComptonKinematics, phi, f0: float = 1.0):
    """Unnormalized Klein-Nishina intensity with scale ``f0`` (for plotting)."""
    x = k.x
    return f0 * kn_numerator(k, phi) / (2.0 * (1.0 + x) ** 4)


@lru_cache(maxsize=256)
def _kn_normalizer(beta: float, theta: float) -> float:
    k = ComptonKinematics(beta, theta)
    val, _ = quad(lambda p: kn_numerator(k, p), 0.0, np.pi, epsabs=0.0, epsrel=1e-13)
    return val


def kn_phi_density(k: ComptonKinematics, phi):
    """Azimuthal Klein-Nishina density normalized numerically on ``[0, pi)``."""
    return kn_numerator(k, phi) / _kn_normalizer(k.beta, k.theta)


def contrast_from_kn(k: ComptonKinematics) -> float:
    x = k.x
    return 1.0 / (x + 1.0 / (1.0 + x))


def roc_linear_density(r: float, phi):
    """RoC density ``(1 - r cos 2phi)/pi`` for the linearly polarized input."""
    return (1.0 - r * np.cos(2 * phi)) / np.pi


def coincidence_density(r_a: float, r_b: float, dphi):
    """Coincidence density in the angle between scattering planes, normalized on ``[0, pi)``."""
    return (1.0 - r_a * r_b * np.cos(2 * dphi)) / np.pi


def perpendicular_parallel_ratio(r_a: float, r_b: float) -> float:
    prod = r_a * r_b
    if prod >= 1.0:
        raise ValueError("r_a * r_b = 1 gives an infinite ratio")
    return (1.0 + prod) / (1.0 - prod)
