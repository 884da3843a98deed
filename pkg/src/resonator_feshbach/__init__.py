"""Single-photon Feshbach resonance in two coupled resonator arrays."""

from .analytic import (
    BoundState,
    ScatteringSolution,
    band_root,
    bound_state_energies,
    bound_state_wavefunction,
    dual_channel_residual,
    effective_potential_strength,
    find_resonances,
    transmission,
)
from .model import (
    ArrayParams,
    Band,
    ComplexWavenumber,
    SystemParams,
    band_edges,
    dispersion_energy,
    wavenumber_from_energy,
)

__version__ = "0.1.0"

# Parameters of the published reflection-spectrum figure (controller coupling
# to arm A and the controller level are the tuned quantities).
FIGURE_ARM_A = ArrayParams(omega=2.0, hopping=1.0, coupling=0.5)
FIGURE_ARM_B = ArrayParams(omega=1.0, hopping=0.5, coupling=0.7)


def figure_system(controller_level: float = 2.5, coupling_a: float = 0.5) -> SystemParams:
    return SystemParams(
        ArrayParams(FIGURE_ARM_A.omega, FIGURE_ARM_A.hopping, coupling_a),
        FIGURE_ARM_B,
        controller_level,
    )
