"""Per-particle and aggregate energies, and the escaped-energy diagnostic.

Bond energy is split evenly between the two particles it joins, so particle k
carries (omega^2/4) of each adjacent bond. At window edges the outer bond uses
the boundary policy's ghost neighbour.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equilibrium import escape_constant, xi_profile
from .integrator import Trajectory, padding_warnings
from .model import ZERO_BOUNDARY, BoundaryPolicy, LatticeParams, LatticeState, apply_V


@dataclass(frozen=True)
class EnergyReport:
    t: float
    sites: np.ndarray
    T: np.ndarray
    U: np.ndarray
    H: np.ndarray
    window: tuple[int, int]
    H_window: float
    total: float
    homogeneous: float
    tail: float

    @property
    def per_particle(self):
        return list(zip(self.sites.tolist(), self.T.tolist(), self.U.tolist(), self.H.tolist()))


def _ghosts(params, state, boundary):
    if isinstance(boundary, BoundaryPolicy):
        return boundary.ghosts(params, state.lo, state.hi)
    return tuple(boundary)


def particle_energies(params: LatticeParams, state: LatticeState, boundary=ZERO_BOUNDARY):
    """Arrays (T_k, U_k, H_k) over the whole window."""
    gl, gr = _ghosts(params, state, boundary)
    q = state.q
    p = np.concatenate(([gl], q, [gr]))
    d = np.diff(p)
    T = 0.5 * state.v**2
    U = 0.25 * params.omega**2 * (d[1:] ** 2 + d[:-1] ** 2) + 0.5 * params.omega0**2 * q**2
    U[-state.lo] -= params.f * q[-state.lo]
    return T, U, T + U


def particle_energy(params: LatticeParams, state: LatticeState, k: int, boundary=ZERO_BOUNDARY):
    """(T_k, U_k, H_k) for one site."""
    i = state.index(k)
    T, U, H = particle_energies(params, state, boundary)
    return float(T[i]), float(U[i]), float(H[i])


def window_energy(params: LatticeParams, state: LatticeState, m: int, n: int, boundary=ZERO_BOUNDARY) -> float:
    if m > n:
        raise IndexError(f"malformed interval [{m}, {n}]")
    i, j = state.index(m), state.index(n)
    _, _, H = particle_energies(params, state, boundary)
    return float(H[i : j + 1].sum())


def total_energy(params: LatticeParams, state: LatticeState, boundary=ZERO_BOUNDARY) -> float:
    _, _, H = particle_energies(params, state, boundary)
    return float(H.sum())


def quadratic_form_energy(params: LatticeParams, state: LatticeState, boundary=ZERO_BOUNDARY) -> float:
    """T + (Vq, q)/2 - f q_0, with the edge correction that matches the half-bond split.

    The correction (omega^2/4)(g_l^2 - q_lo^2 + g_r^2 - q_hi^2) vanishes when the
    state and the ghosts are zero at the edges.
    """
    gl, gr = _ghosts(params, state, boundary)
    q = state.q
    T = 0.5 * float(state.v @ state.v)
    W = 0.5 * float(apply_V(params, q, (gl, gr)) @ q)
    edge = 0.25 * params.omega**2 * (gl * gl - q[0] ** 2 + gr * gr - q[-1] ** 2)
    return T + W - params.f * float(q[-state.lo]) + edge


def homogeneous_energy(params: LatticeParams, state: LatticeState, boundary=ZERO_BOUNDARY) -> float:
    """H + C f^2."""
    return total_energy(params, state, boundary) + escape_constant(params) * params.f**2


def zeta_energy(params: LatticeParams, state: LatticeState, nodes: int | None = None) -> float:
    """Force-free energy of zeta = q - xi on the window (zero closure).

    Agrees with :func:`homogeneous_energy` once xi is negligible at the window edges.
    """
    xi = xi_profile(params, state.lo, state.hi, nodes).xi
    zeta = state.replace(q=state.q - xi)
    return total_energy(params.with_force(0.0), zeta, ZERO_BOUNDARY)


def energy_report(params, state, m, n, boundary=ZERO_BOUNDARY, H0: float | None = None) -> EnergyReport:
    T, U, H = particle_energies(params, state, boundary)
    i, j = state.index(m), state.index(n)
    total = float(H.sum())
    H_window = float(H[i : j + 1].sum())
    start = total if H0 is None else H0
    return EnergyReport(
        t=state.t,
        sites=state.sites,
        T=T,
        U=U,
        H=H,
        window=(m, n),
        H_window=H_window,
        total=total,
        homogeneous=total + escape_constant(params) * params.f**2,
        tail=start - H_window,
    )


@dataclass(frozen=True)
class EscapeSeries:
    t: np.ndarray
    H_window: np.ndarray
    tail: np.ndarray
    H_total: np.ndarray
    H_hom: np.ndarray
    warnings: tuple[str, ...] = ()

    def rows(self):
        return zip(self.t.tolist(), self.H_window.tolist(), self.tail.tolist())


def escape_series(params: LatticeParams, trajectory: Trajectory, N: int) -> EscapeSeries:
    """tail(t) = H(0) - H_[-N,N](t), with H(0) taken from the trajectory's first sample."""
    boundary = trajectory.boundary
    first = trajectory.initial
    if not (first.lo <= -N and N <= first.hi):
        raise IndexError(f"[-{N}, {N}] not inside window [{first.lo}, {first.hi}]")
    span = trajectory.final.t - first.t
    warnings = tuple(trajectory.warnings) + padding_warnings(params, first.lo, first.hi, span, N)
    H0 = total_energy(params, first, boundary)
    Cf2 = escape_constant(params) * params.f**2
    t, Hw, Ht = [], [], []
    for s in trajectory.samples:
        _, _, H = particle_energies(params, s, boundary)
        t.append(s.t)
        Hw.append(float(H[s.index(-N) : s.index(N) + 1].sum()))
        Ht.append(float(H.sum()))
    Hw = np.array(Hw)
    Ht = np.array(Ht)
    return EscapeSeries(np.array(t), Hw, H0 - Hw, Ht, Ht + Cf2, warnings)
