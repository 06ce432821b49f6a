"""Sub-Nyquist wideband spectrum acquisition for a swarm of low-rate samplers.

Each node digitizes the same wide band at a different integer decimation of a
common Nyquist clock, so the spectrum folds ("buckets") into a small FFT per
node. A channel of the full grid is identified by the pattern of folded bin
indices it produces across the swarm, its sensing code; fusing the nodes'
occupied-bin reports and taking the minimum-magnitude entry of each channel's
cross-node covariance recovers channel powers over the least-common-multiple
span without any full-rate sampling.
"""

__version__ = "0.1.0"

from .codebook import (
    Codebook,
    CollisionReport,
    build_codebook,
    signed_code_to_bin,
    unambiguous_span,
    verify_code_uniqueness,
)
from .decoder import (
    ChannelCovariance,
    Detection,
    SpectrumEstimate,
    channel_covariance,
    channel_power,
    decode_spectrum,
    detect,
)
from .errors import (
    BadMagicError,
    BinOrderError,
    ConfigError,
    DecodeError,
    FusionError,
    MetricUndefinedError,
    ScftError,
    TruncatedPayloadError,
    UnsupportedVersionError,
    ValidationError,
    WireFormatError,
)
from .evaluate import (
    EvalReport,
    Policies,
    TrialResult,
    acquire_reports,
    nyquist_oracle,
    relative_rmse,
    run_trial,
    sweep,
)
from .sampler import (
    FoldResult,
    PeakPolicy,
    SnapshotSpectra,
    SubNyquistStream,
    average_periodogram,
    fold_frequency,
    peak_search,
    snapshot_spectra,
    subsample,
)
from .scenario import (
    EmitterSpec,
    NodeCapture,
    NodeConfig,
    ScenarioConfig,
    SwarmConfig,
    compose_capture,
    compute_delay,
    synthesize_emitter,
)
from .swarm_link import (
    CodedSpectrum,
    SpectralReport,
    decode_report,
    encode_report,
    fuse,
    make_report,
)
