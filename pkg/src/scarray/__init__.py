"""Single-carrier uplink through a large antenna array: link simulation,
matched-filter waveform-recovery receiver, and residual-ISI analysis."""

from .analysis import (
    IsiReport,
    impulse_response,
    impulse_response_window,
    p0,
    p0_limit,
    p_isi,
    p_isi_integer_delays,
    snr_combined,
    snr_single_tap,
    trace_r_squared,
)
from .channel import (
    ArrayGeometry,
    ChannelRealization,
    PowerDelayProfile,
    build_correlation_matrix,
    draw_channel,
    etu_profile,
    jakes_correlation,
    normalize_profile,
    sample_cross_correlation,
    uniform_profile,
)
from .experiments import (
    ConfigError,
    ExperimentConfig,
    IsiValidationReport,
    SerPoint,
    run_isi_validation,
    run_ser_experiment,
)
from .numerics import (
    NotPositiveSemidefiniteError,
    QuadratureConvergenceError,
    Rng,
    bessel_j0,
    bessel_j1,
    cholesky_psd,
    gaussian_pair,
    integrate,
)
from .receiver import (
    CombinerWeights,
    DecisionRecord,
    combine,
    optimal_weights,
    receive,
    recover_tap,
    sample_and_slice,
)
from .waveform import (
    AntennaWaveforms,
    PulseShape,
    SampledWaveform,
    SymbolStream,
    modulate_qpsk,
    propagate,
    raised_cosine,
    random_qpsk,
    root_raised_cosine,
    shape,
)

__version__ = "0.1.0"
