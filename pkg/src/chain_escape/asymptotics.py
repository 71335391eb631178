"""Leading-order long-time behaviour of the homogeneous motion.

Stationary points of the phase sit at the band edges phi = 0 and phi = pi, so

    zeta_k(t) ~ t^{-1/2} [ C1 cos(w_lo t + pi/4) + (-1)^k C2 cos(w_hi t - pi/4)
                         + S1 sin(w_lo t + pi/4) + (-1)^k S2 sin(w_hi t - pi/4) ]

with an O(t^{-3/2}) remainder.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .equilibrium import xi_profile
from .model import LatticeParams, LatticeState, dispersion
from .spectral import SpectralSolver, node_count


@dataclass(frozen=True)
class AsymptoticCoefficients:
    C1: float
    C2: float
    S1: float
    S2: float
    omega_lo: float
    omega_hi: float

    def __post_init__(self):
        if not self.omega_lo < self.omega_hi:
            raise ValueError("band edges must satisfy omega_lo < omega_hi")

    def scaled(self, alpha: float) -> "AsymptoticCoefficients":
        return AsymptoticCoefficients(
            alpha * self.C1, alpha * self.C2, alpha * self.S1, alpha * self.S2, self.omega_lo, self.omega_hi
        )

    @property
    def amplitude_bound(self) -> float:
        return abs(self.C1) + abs(self.C2) + abs(self.S1) + abs(self.S2)


def coefficients(params: LatticeParams, Q00: float, Q0pi: float, Qd00: float, Qd0pi: float) -> AsymptoticCoefficients:
    """Band-edge amplitudes from Q(0,0), Q(0,pi), Qdot(0,0), Qdot(0,pi).

    The curvature of Omega at the edges is omega^2/omega0 and
    -omega^2/omega_hi, which sets the sqrt(1/|Omega''|) stationary-phase
    weights; the velocity terms carry an extra 1/Omega.
    """
    w2 = params.omega**2
    lo = params.omega0
    hi = params.omega_max
    two_pi = 2.0 * math.pi
    return AsymptoticCoefficients(
        C1=math.sqrt(lo / (two_pi * w2)) * Q00,
        C2=math.sqrt(hi / (two_pi * w2)) * Q0pi,
        S1=math.sqrt(1.0 / (two_pi * w2 * lo)) * Qd00,
        S2=math.sqrt(1.0 / (two_pi * w2 * hi)) * Qd0pi,
        omega_lo=lo,
        omega_hi=hi,
    )


def band_edge_sums(zeta, v, lo: int) -> tuple[float, float, float, float]:
    """Q(0,0), Q(0,pi), Qdot(0,0), Qdot(0,pi) by direct summation."""
    k = np.arange(lo, lo + len(zeta))
    sign = np.where(k % 2, -1.0, 1.0)
    zeta = np.asarray(zeta, dtype=float)
    v = np.asarray(v, dtype=float)
    return float(zeta.sum()), float(sign @ zeta), float(v.sum()), float(sign @ v)


def coefficients_for(params: LatticeParams, initial: LatticeState) -> AsymptoticCoefficients:
    """Coefficients for the homogeneous part zeta(0) = q(0) - xi of ``initial``."""
    xi = xi_profile(params, initial.lo, initial.hi).xi
    return coefficients(params, *band_edge_sums(initial.q - xi, initial.v, initial.lo))


def predict(coeffs: AsymptoticCoefficients, k: int, t):
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ValueError("prediction needs t > 0")
    parity = -1.0 if k % 2 else 1.0
    slow = coeffs.omega_lo * t_arr + math.pi / 4
    fast = coeffs.omega_hi * t_arr - math.pi / 4
    out = (
        coeffs.C1 * np.cos(slow)
        + parity * coeffs.C2 * np.cos(fast)
        + coeffs.S1 * np.sin(slow)
        + parity * coeffs.S2 * np.sin(fast)
    ) / np.sqrt(t_arr)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ResidualRow:
    t: float
    exact: float
    predicted: float
    scaled_residual: float


def exact_zeta(params: LatticeParams, initial: LatticeState, k: int, times, M: int | None = None) -> np.ndarray:
    """zeta_k at elapsed ``times`` from the spectral propagator."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if M is None:
        M = node_count(initial.width, float(times.max(initial=0.0)), params.omega)
    s0 = SpectralSolver(params, initial, M).s0
    W = dispersion(params, s0.phi)
    # one inversion row per time: mean_j Q(t, phi_j) e^{-i k phi_j}
    a = s0.Q * np.exp(-1j * k * s0.phi)
    b = s0.Qdot * np.exp(-1j * k * s0.phi) / W
    out = np.empty(times.size)
    for start in range(0, times.size, 256):
        wt = np.outer(times[start : start + 256], W)
        out[start : start + 256] = (np.cos(wt) @ a + np.sin(wt) @ b).real / s0.M
    return out


def residual_scan(params: LatticeParams, initial: LatticeState, k: int, times, M: int | None = None) -> list[ResidualRow]:
    times = [float(t) for t in times]
    floor = 10.0 / params.omega0
    if any(t < floor for t in times):
        raise ValueError(f"scan times must be >= {floor:g} (10 / omega0)")
    coeffs = coefficients_for(params, initial)
    exact = exact_zeta(params, initial, k, times, M)
    rows = []
    for t, z in zip(times, exact):
        p = predict(coeffs, k, t)
        rows.append(ResidualRow(t, float(z), p, t**1.5 * abs(z - p)))
    return rows


def envelope(t, y, width: float):
    """Peak |y| in consecutive blocks of ``width`` time units; returns (t_peak, peak)."""
    t = np.asarray(t, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    edges = np.arange(t[0], t[-1] + 1e-12, width)
    idx = np.searchsorted(t, edges)
    tp, yp = [], []
    for a, b in zip(idx[:-1], idx[1:]):
        if b > a:
            j = a + int(np.argmax(y[a:b]))
            tp.append(t[j])
            yp.append(y[j])
    return np.array(tp), np.array(yp)


def decay_slope(t, y, width: float) -> float:
    """Log-log slope of the block-maximum envelope of |y|."""
    tp, yp = envelope(t, y, width)
    return float(np.polyfit(np.log(tp), np.log(yp), 1)[0])


def dominant_frequencies(t, y, count: int = 2, exclusion: int = 3):
    """Hann-windowed amplitude spectrum of a uniformly sampled series.

    Returns (angular frequencies of the ``count`` largest peaks, their
    magnitudes, largest magnitude more than ``exclusion`` bins from every
    peak, bin width).
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    dt = t[1] - t[0]
    spec = np.abs(np.fft.rfft((y - y.mean()) * np.hanning(y.size)))
    freqs = 2.0 * math.pi * np.fft.rfftfreq(y.size, dt)
    interior = (spec[1:-1] > spec[:-2]) & (spec[1:-1] >= spec[2:])
    peaks = np.flatnonzero(interior) + 1
    peaks = peaks[np.argsort(spec[peaks])[::-1][:count]]
    mask = np.ones(spec.size, dtype=bool)
    mask[0] = False
    for p in peaks:
        mask[max(p - exclusion, 0) : p + exclusion + 1] = False
    off_peak = float(spec[mask].max(initial=0.0))
    return freqs[peaks], spec[peaks], off_peak, freqs[1] - freqs[0]
