"""qfcsim: chi(2) waveguide quantum frequency conversion simulator.

Subpackages mirror the physics: `dispersion` (phase matching),
`propagation` (coupled-mode integration and closed forms), `tuner`
(disorder and nanoheater tuning), `noise` (Raman/SFWM budget), `quantum`
(interference and tomography), with `cli`/`scenario`/`tables` providing the
scenario-driven front end.
"""

from .dispersion import (
    DispersionModel,
    Mode,
    ModeDispersion,
    effective_index,
    matched_linear_model,
    phase_mismatch,
    solve_phase_matching,
)
from .propagation import (
    ConversionSpectrum,
    Direction,
    FieldState,
    MismatchProfile,
    Process,
    PumpConfig,
    WaveguideSpec,
    analytic_efficiency,
    conversion_efficiency,
    coupling_rate,
    detuning_efficiencies,
    fit_efficiency_curve,
    integrate,
    loss_normalized_efficiency,
    peak_efficiency,
    spectrum,
)
from .tuner import (
    CalibrationReport,
    DisorderSpec,
    HeaterArray,
    TuneResult,
    apply_heaters,
    detuning_calibration,
    extract_loss_from_segment_shg,
    generate_disorder,
    self_calibrated_R,
    sequential_tune,
    thermal_drift,
)
from .noise import (
    NoiseBudget,
    RamanParams,
    boltzmann_factor,
    effective_cross_section,
    fit_power_scaling,
    noise_budget,
    raman_flux,
    sfwm_flux,
    upconverted_noise,
)
from .quantum import (
    CountRecord,
    DensityMatrix,
    SplitterPair,
    TimeBinQubit,
    analyzer_bins,
    basis_states,
    fidelity,
    franson_coincidence,
    linear_reconstruct,
    min_two_photon_visibility,
    mle_reconstruct,
    projector_counts,
    single_photon_visibility,
    stokes,
    two_photon_visibility,
)

__version__ = "0.1.0"
