"""Finite-lattice numerics used as independent ground truth.

Nothing here calls into :mod:`resonator_feshbach.analytic`; the lattice is
built from the raw parameters and every observable is read off matrices.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve, splu

from .model import BandEdgeError, NoOpenChannelError, SystemParams, band_edges


class BoundaryTouchError(RuntimeError):
    """The wavepacket reached the truncated ends of the lattice."""


@dataclass(frozen=True)
class LatticeHamiltonian:
    """Single-excitation Hamiltonian of the truncated H-system.

    Basis order: arm A sites j = -N..N, arm B sites j = -N..N, controller.
    """

    half_length: int
    matrix: sp.csr_matrix = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def arm_size(self) -> int:
        return 2 * self.half_length + 1

    def site(self, arm: str, j: int) -> int:
        if abs(j) > self.half_length:
            raise IndexError(f"site {j} outside -{self.half_length}..{self.half_length}")
        offset = 0 if arm == "A" else self.arm_size
        return offset + j + self.half_length

    def arm_slice(self, arm: str) -> slice:
        start = 0 if arm == "A" else self.arm_size
        return slice(start, start + self.arm_size)

    @property
    def controller(self) -> int:
        return self.dimension - 1


def _chain_block(n_sites: int, omega: float, hopping: float) -> sp.csr_matrix:
    off = np.full(n_sites - 1, -hopping)
    return sp.diags([off, np.full(n_sites, omega), off], [-1, 0, 1], format="csr")


def build_hamiltonian(sys: SystemParams, N: int) -> LatticeHamiltonian:
    if N < 2:
        raise ValueError(f"half-length N must be >= 2, got {N}")
    a, b = sys.arm_a, sys.arm_b
    size = 2 * N + 1
    dim = 2 * size + 1
    blocks = sp.block_diag(
        [
            _chain_block(size, a.omega, a.hopping),
            _chain_block(size, b.omega, b.hopping),
            sp.csr_matrix([[sys.controller_level]]),
        ],
        format="lil",
    )
    c = dim - 1
    for offset, g in ((N, a.coupling), (size + N, b.coupling)):
        if g != 0.0:
            blocks[offset, c] = g
            blocks[c, offset] = g
    return LatticeHamiltonian(N, blocks.tocsr())


# -- bound states -------------------------------------------------------------


@dataclass(frozen=True)
class LatticeBoundState:
    energy: float
    localization_length: float
    vector: np.ndarray = field(repr=False, compare=False)


def _decay_fit(profile: np.ndarray, j_stop: int) -> float:
    """Slope of -log|u(j)| over j = 5..j_stop, skipping amplitudes lost in round-off."""
    j = np.arange(5, j_stop + 1)
    amp = np.abs(profile[j])
    keep = amp > 1e-11 * np.abs(profile).max()
    if keep.sum() < 2:
        j = np.arange(1, j_stop + 1)
        amp = np.abs(profile[j])
        keep = amp > 1e-11 * np.abs(profile).max()
    if keep.sum() < 2:
        return math.nan
    slope = np.polyfit(j[keep], np.log(amp[keep]), 1)[0]
    return -slope


def eigen_bound_states(H: LatticeHamiltonian, sys: SystemParams) -> list[LatticeBoundState]:
    """Eigenstates of the finite lattice lying outside the bands they can leak into.

    The Hamiltonian splits into disconnected blocks whenever a coupling is
    zero; each block is diagonalized on its own and a level counts as bound
    when it lies outside the band of every arm in its block.  The
    localization length is 1/kappa_I from a log-amplitude fit on the right
    half of the dominant arm; it is 0 for a fully decoupled controller.
    """
    N = H.half_length
    connected = [
        arm for arm, g in (("A", sys.arm_a.coupling), ("B", sys.arm_b.coupling)) if g != 0.0
    ]
    idx = np.concatenate(
        [np.arange(H.dimension)[H.arm_slice(arm)] for arm in connected] + [[H.controller]]
    ).astype(int)
    block = H.matrix[idx][:, idx].toarray()
    values, vectors = scipy.linalg.eigh(block)
    bands = [band_edges(sys.arm(arm)) for arm in connected]
    j_stop = min(25, N // 2)
    out = []
    for value, vec in zip(values, vectors.T):
        if any(band.lower <= value <= band.upper for band in bands):
            continue
        full = np.zeros(H.dimension)
        full[idx] = vec
        if not connected:
            out.append(LatticeBoundState(float(value), 0.0, full))
            continue
        weights = {arm: np.sum(full[H.arm_slice(arm)] ** 2) for arm in connected}
        arm = max(weights, key=weights.get)
        right = full[H.arm_slice(arm)][N:]
        kappa_i = _decay_fit(right, j_stop)
        out.append(LatticeBoundState(float(value), 1.0 / kappa_i, full))
    return out


# -- stationary transmission via lead self-energies -------------------------


def _lead_surface(omega: float, hopping: float, energy: float) -> complex:
    """Surface Green's function of a semi-infinite chain (retarded or decaying root)."""
    d = energy - omega
    disc = cmath.sqrt(d * d - 4.0 * hopping * hopping)
    roots = [(d + disc) / (2 * hopping**2), (d - disc) / (2 * hopping**2)]
    if abs(d) < 2.0 * hopping:
        return min(roots, key=lambda g: g.imag)
    return min(roots, key=lambda g: abs(g))


def greens_transmission(sys: SystemParams, energy: float, region: int = 10) -> complex:
    """Transmission amplitude from the left to the right lead of arm A.

    Keeps sites -region..region of both arms plus the controller and closes
    each of the four truncation sites with the exact self-energy
    ``J**2 * g_surface(E)`` of the discarded semi-infinite chain.
    """
    a, b = sys.arm_a, sys.arm_b
    band_a = band_edges(a)
    if energy in (band_a.lower, band_a.upper):
        raise BandEdgeError(f"E = {energy} is on an edge of arm A's band")
    if not band_a.contains(energy):
        raise NoOpenChannelError(f"E = {energy} lies outside arm A's band")
    H = build_hamiltonian(sys, region)
    system = (energy * sp.identity(H.dimension, format="csr") - H.matrix).astype(complex).tolil()
    ga = _lead_surface(a.omega, a.hopping, energy)
    gb = _lead_surface(b.omega, b.hopping, energy)
    M = region
    for arm, hop, g in (("A", a.hopping, ga), ("B", b.hopping, gb)):
        for j in (-M, M):
            i = H.site(arm, j)
            system[i, i] -= hop * hop * g
    phase = -a.hopping * ga  # exp(ik) of the incident wave
    rhs = np.zeros(H.dimension, dtype=complex)
    rhs[H.site("A", -M)] = a.hopping * (phase - 1.0 / phase) * phase ** (-M)
    psi = spsolve(system.tocsc(), rhs)
    return complex(psi[H.site("A", M)] * phase ** (-M))


# -- wavepacket dynamics ------------------------------------------------------


@dataclass(frozen=True)
class WavepacketSpec:
    carrier_k: float
    width_sites: float = 50.0
    launch_center: int | None = None
    max_time: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.carrier_k < math.pi:
            raise ValueError(f"carrier_k must lie in (0, pi), got {self.carrier_k}")
        if self.width_sites <= 0:
            raise ValueError("width_sites must be positive")
        if self.launch_center is not None and self.launch_center + 4 * self.width_sites >= -10:
            raise ValueError("packet must start clear of the scatterer (j0 + 4*width < -10)")


@dataclass(frozen=True)
class WavepacketResult:
    reflected: float
    transmitted: float
    leaked_b: float
    controller_residue: float
    norm_residual: float
    steps: int = 0


DT_PER_HOPPING = 0.02
BOUNDARY_SITES = 5
BOUNDARY_TOL = 1e-8


def wavepacket_scatter(sys: SystemParams, N: int, spec: WavepacketSpec) -> WavepacketResult:
    """Send a Gaussian packet along arm A and measure where the probability ends up.

    Evolution is Crank-Nicolson, ``(1 + iH dt/2) psi' = (1 - iH dt/2) psi``,
    which is exactly unitary.  The run stops once the packet centre has
    travelled ``|launch_center| + N/2`` sites at the carrier group velocity.
    Raises :class:`BoundaryTouchError` if any of the outermost sites of
    either arm picks up more than 1e-8 probability.
    """
    a = sys.arm_a
    H = build_hamiltonian(sys, N)
    j0 = -N // 2 if spec.launch_center is None else spec.launch_center
    if j0 + 4 * spec.width_sites >= -10 or j0 - 4 * spec.width_sites <= -N:
        raise ValueError(f"launch centre {j0} does not fit a packet of width {spec.width_sites}")
    velocity = 2.0 * a.hopping * math.sin(spec.carrier_k)
    max_time = spec.max_time
    if max_time is None:
        max_time = (abs(j0) + N / 2) / velocity

    j = np.arange(-N, N + 1)
    psi = np.zeros(H.dimension, dtype=complex)
    envelope = np.exp(-((j - j0) ** 2) / (4.0 * spec.width_sites**2))
    psi[H.arm_slice("A")] = envelope * np.exp(1j * spec.carrier_k * j)
    psi /= np.linalg.norm(psi)

    dt = DT_PER_HOPPING / a.hopping
    steps = int(math.ceil(max_time / dt))
    # constant shift only changes a global phase
    shifted = (H.matrix - a.omega * sp.identity(H.dimension, format="csr")).astype(complex)
    eye = sp.identity(H.dimension, dtype=complex, format="csc")
    forward = (eye - 0.5j * dt * shifted).tocsr()
    backward = splu((eye + 0.5j * dt * shifted).tocsc())

    size = H.arm_size
    edge_idx = np.concatenate(
        [np.arange(BOUNDARY_SITES), np.arange(size - BOUNDARY_SITES, size)]
    )
    edge_idx = np.concatenate([edge_idx, edge_idx + size])
    for step in range(steps):
        psi = backward.solve(forward @ psi)
        if np.sum(np.abs(psi[edge_idx]) ** 2) > BOUNDARY_TOL:
            raise BoundaryTouchError(
                f"edge occupancy exceeded {BOUNDARY_TOL} at t = {step * dt:.1f}; increase N"
            )

    prob = np.abs(psi) ** 2
    arm_a = prob[H.arm_slice("A")]
    buffer = 4.0 * spec.width_sites
    reflected = float(arm_a[j < -buffer].sum())
    transmitted = float(arm_a[j > buffer].sum())
    leaked = float(prob[H.arm_slice("B")].sum())
    residue = float(arm_a[np.abs(j) <= buffer].sum() + prob[H.controller])
    return WavepacketResult(
        reflected=reflected,
        transmitted=transmitted,
        leaked_b=leaked,
        controller_residue=residue,
        norm_residual=abs(float(prob.sum()) - 1.0),
        steps=steps,
    )
