"""Fourth-order compact finite-difference solver for a thermoelastic
Timoshenko beam with second-sound heat conduction.

The public surface re-exports the pieces a typical study needs: physical
parameters and presets, grid construction, scheme assembly, the time
stepper, and the decay diagnostics.
"""

from .assembly import (
    SchemeCoefficients,
    SchemeMatrices,
    assemble,
    compute_coefficients,
    verify_band_structure,
)
from .diagnostics import (
    ConvergenceReport,
    DecayFit,
    DecayModel,
    ModelSelection,
    TimeSeries,
    TimeSeriesRecorder,
    convergence_report,
    default_fit_window,
    discrete_energy,
    fit_exponential,
    fit_polynomial,
    max_displacement,
    select_decay_model,
)
from .errors import (
    BlowUpError,
    ConfigError,
    NumericsError,
    SingularMatrixError,
    ThermobeamError,
    UnknownPresetError,
)
from .grid import CourantAdvisory, GridConfig, Mesh, build_mesh, courant_advisory
from .linalg import BandedMatrix, SolveWorkspace, band_matvec, tridiagonal_solve
from .params import (
    PhysicalParameters,
    Regime,
    ScenarioPreset,
    classify_regime,
    lookup_preset,
    stability_number,
)
from .stepper import (
    Fields,
    InitialData,
    Observer,
    SimulationState,
    StepRecord,
    apply_boundary_extension,
    build_initial_levels,
    fourier_initial_data,
    reference_initial_data,
    run,
    step,
    zero_initial_data,
)

__version__ = "0.1.0"

__all__ = [
    "BandedMatrix",
    "BlowUpError",
    "ConfigError",
    "ConvergenceReport",
    "CourantAdvisory",
    "DecayFit",
    "DecayModel",
    "Fields",
    "GridConfig",
    "InitialData",
    "Mesh",
    "ModelSelection",
    "NumericsError",
    "Observer",
    "PhysicalParameters",
    "Regime",
    "ScenarioPreset",
    "SchemeCoefficients",
    "SchemeMatrices",
    "SimulationState",
    "SingularMatrixError",
    "SolveWorkspace",
    "StepRecord",
    "ThermobeamError",
    "TimeSeries",
    "TimeSeriesRecorder",
    "UnknownPresetError",
    "apply_boundary_extension",
    "assemble",
    "band_matvec",
    "build_initial_levels",
    "build_mesh",
    "classify_regime",
    "compute_coefficients",
    "convergence_report",
    "courant_advisory",
    "default_fit_window",
    "discrete_energy",
    "fit_exponential",
    "fit_polynomial",
    "fourier_initial_data",
    "lookup_preset",
    "max_displacement",
    "reference_initial_data",
    "run",
    "select_decay_model",
    "stability_number",
    "step",
    "stepper",
    "tridiagonal_solve",
    "verify_band_structure",
    "zero_initial_data",
]
