"""Two-level avoided-crossing (Landau-Zener) drive and its adiabatic frame.

The lab-frame Hamiltonian is ``delta*sigma_x + v*t*sigma_z`` (hbar = 1). All
angle bookkeeping uses ``phi(t) = atan2(delta, v*t)/2``, which is continuous
through the crossing and spans (0, pi/2); the rotated frame ``exp(i phi
sigma_y)`` keeps the Hamiltonian diagonal at all times.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import SIGMA_X, SIGMA_Z


@dataclass(frozen=True)
class LZParams:
    """Drive parameters: minimum half-gap ``delta`` and sweep rate ``v`` (both > 0)."""

    delta: float
    v: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not self.v > 0:
            raise ValueError(f"v must be positive, got {self.v}")


def gap(t, p: LZParams):
    """Instantaneous half-splitting Omega(t) = sqrt(v^2 t^2 + delta^2) >= delta."""
    return np.hypot(p.v * np.asarray(t, dtype=float), p.delta)


def mixing_angle(t, p: LZParams):
    """Adiabatic mixing angle phi(t) = atan2(delta, v t)/2, in (0, pi/2).

    Strictly decreasing in t: pi/2 at t -> -inf, pi/4 at the crossing,
    0 at t -> +inf.
    """
    return 0.5 * np.arctan2(p.delta, p.v * np.asarray(t, dtype=float))


def mixing_angle_rate(t, p: LZParams):
    """d phi/dt = -delta v / (2 Omega^2); always negative, extremal at t = 0."""
    om = gap(t, p)
    return -p.delta * p.v / (2.0 * om * om)


def hamiltonian_lab(t: float, p: LZParams) -> np.ndarray:
    """Lab-frame Hamiltonian delta*sigma_x + v t*sigma_z (eigenvalues +-Omega)."""
    return p.delta * SIGMA_X + (p.v * t) * SIGMA_Z


def rotation(t: float, p: LZParams) -> np.ndarray:
    """Frame rotation exp(i phi(t) sigma_y); conjugating the Hamiltonian gives Omega*sigma_z."""
    phi = float(mixing_angle(t, p))
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, s], [-s, c]], dtype=complex)


def transition_frequencies(t: float, p: LZParams) -> tuple[float, float, float]:
    """The three jump frequencies (2 Omega, -2 Omega, 0)."""
    om = float(gap(t, p))
    return 2.0 * om, -2.0 * om, 0.0
