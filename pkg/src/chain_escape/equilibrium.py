"""Static profile xi solving V xi = f e_0.

The canonical route is the Fourier integral

    xi_k = (1/pi) * int_{-pi/2}^{pi/2} f cos(2 k phi) / (4 omega^2 sin^2 phi + omega0^2) dphi

evaluated by the periodic trapezoid rule. A banded direct solve and the
geometric closed form are kept alongside as independent checks.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import solve_banded

from .model import LatticeParams, WindowError, apply_V

MIN_NODES = 16


class QuadratureError(ValueError):
    pass


@dataclass(frozen=True)
class EquilibriumProfile:
    params: LatticeParams
    lo: int
    hi: int
    xi: np.ndarray
    C: float
    U_xi: float

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def residual(self) -> np.ndarray:
        """V xi - f e_0 on the window; the two edge rows see zero closure."""
        r = apply_V(self.params, self.xi, (0.0, 0.0))
        r[-self.lo] -= self.params.f
        return r


def default_nodes(k: int) -> int:
    return max(512, 64 * abs(k))


def thread_count() -> int:
    """Worker cap from CHAIN_ESCAPE_THREADS (0 or unset means one per CPU)."""
    raw = os.environ.get("CHAIN_ESCAPE_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("CHAIN_ESCAPE_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def escape_constant(params: LatticeParams) -> float:
    """C = 1 / (2 omega0 sqrt(4 omega^2 + omega0^2)); C f^2 is the energy radiated from rest."""
    return 1.0 / (2.0 * params.omega0 * math.sqrt(4.0 * params.omega**2 + params.omega0**2))


def decay_ratio(params: LatticeParams) -> float:
    """Root in (0, 1) of r + 1/r = 2 + omega0^2 / omega^2."""
    b = 2.0 + params.omega0**2 / params.omega**2
    # smaller root of r^2 - b r + 1, written to avoid cancellation
    return 2.0 / (b + math.sqrt(b * b - 4.0))


@lru_cache(maxsize=4096)
def _xi_unit(omega: float, omega0: float, k: int, nodes: int) -> float:
    phi = -0.5 * math.pi + math.pi * np.arange(nodes) / nodes
    s = np.sin(phi)
    integrand = np.cos(2.0 * k * phi) / (4.0 * omega * omega * s * s + omega0 * omega0)
    # (1/pi) * (pi / nodes) * sum
    return float(integrand.sum() / nodes)


def xi_coefficient(params: LatticeParams, k: int, nodes: int | None = None) -> float:
    if nodes is None:
        nodes = default_nodes(k)
    if nodes < MIN_NODES or nodes % 2:
        raise QuadratureError(f"nodes must be even and >= {MIN_NODES}, got {nodes}")
    if params.f == 0:
        return 0.0
    return params.f * _xi_unit(params.omega, params.omega0, abs(int(k)), int(nodes))


def xi_profile(params: LatticeParams, lo: int, hi: int, nodes: int | None = None) -> EquilibriumProfile:
    if not (lo <= 0 <= hi):
        raise WindowError(f"window [{lo}, {hi}] must contain site 0")
    if nodes is not None and (nodes < MIN_NODES or nodes % 2):
        raise QuadratureError(f"nodes must be even and >= {MIN_NODES}, got {nodes}")
    kmax = max(-lo, hi)
    C = escape_constant(params)
    half = np.zeros(kmax + 1)
    if params.f != 0:
        ks = range(kmax + 1)
        workers = min(thread_count(), kmax + 1)
        if workers > 1 and kmax >= 64:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                half[:] = list(pool.map(lambda k: xi_coefficient(params, k, nodes), ks))
        else:
            half[:] = [xi_coefficient(params, k, nodes) for k in ks]
    xi = half[np.abs(np.arange(lo, hi + 1))]
    xi.flags.writeable = False
    return EquilibriumProfile(params, lo, hi, xi, C, -C * params.f**2)


def xi_oracle_tridiagonal(params: LatticeParams, half_width: int) -> np.ndarray:
    """Direct banded solve of V xi = f e_0 on [-N, N] with zero closure.

    Truncation error at the centre is of order r^(2N), r = :func:`decay_ratio`.
    """
    if half_width < 8:
        raise ValueError("half_width must be >= 8")
    n = 2 * half_width + 1
    w2 = params.omega**2
    ab = np.empty((3, n))
    ab[0] = -w2
    ab[1] = 2.0 * w2 + params.omega0**2
    ab[2] = -w2
    rhs = np.zeros(n)
    rhs[half_width] = params.f
    return solve_banded((1, 1), ab, rhs)


def xi_geometric(params: LatticeParams, k) -> np.ndarray:
    """Closed form xi_k = xi_0 r^|k| with xi_0 = f / (2 omega^2 (1 - r) + omega0^2). Test route."""
    r = decay_ratio(params)
    xi0 = params.f / (2.0 * params.omega**2 * (1.0 - r) + params.omega0**2)
    return xi0 * r ** np.abs(np.asarray(k))
