"""Scene synthesis: emitters, swarm geometry, and per-node Nyquist-rate captures.

The signal model is complex analytic, so a tone occupies a single spectral
line with no conjugate image. Every node observes the same emitters through a
plane-wave delay fixed by its position and the emitter azimuth, plus its own
independent circularly symmetric complex AWGN stream.

Conventions
-----------
- SNR is per emitter: the noise variance per Nyquist-rate sample is
  sigma^2 = reference_power * 10**(-snr_db / 10), where reference_power is
  the mean emitter power (1.0 for an empty scene). snr_db=None disables noise.
- Delays enter the waveform phase in continuous time; they are never rounded
  to sample shifts.
- With clock_offset_policy="random-integer-sample" each node's sampling grid
  is shifted by a per-node random integer number of Nyquist samples, standing
  in for unsynchronized node clocks.
- All randomness derives from (seed, stream tag, index), so captures are
  reproducible per node no matter in which order nodes are synthesized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ValidationError

SPEED_OF_LIGHT_M_S = 299_792_458.0

MODULATIONS = ("tone", "monopulse", "bpsk", "lfm")

AZIMUTH_LIMIT_RAD = math.pi / 3.0

# Stream tags keeping per-node noise, per-node clock offsets, and per-emitter
# chip sequences statistically independent for one scenario seed.
_NOISE_STREAM = 1
_CLOCK_STREAM = 2
_CHIP_STREAM = 3

# Clock offsets are drawn from [0, 2**20) Nyquist samples.
_CLOCK_OFFSET_SPAN = 1 << 20

CLOCK_OFFSET_POLICIES = ("none", "random-integer-sample")


def _stream(seed: int, tag: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(tag), int(index)]))


def _as_int(value, what: str, minimum: int = 1) -> int:
    n = round(float(value))
    if abs(float(value) - n) > 1e-6 * max(1.0, abs(n)) or n < minimum:
        raise ConfigError(f"{what} must be an integer >= {minimum}, got {value!r}")
    return int(n)


@dataclass
class EmitterSpec:
    """One far-field emitter.

    carrier_hz is the center frequency; bandwidth_hz is 0 for a pure tone.
    Modulation-specific fields are ignored by the other modulations:
    monopulse uses pulse_start_s/pulse_width_s, bpsk uses chip_rate_hz, lfm
    uses sweep_rate_hz_per_s (or, when 0, sweeps bandwidth_hz over the
    capture).
    """

    carrier_hz: float
    modulation: str = "tone"
    bandwidth_hz: float = 0.0
    power: float = 1.0
    azimuth_rad: float = 0.0
    pulse_start_s: float = 0.0
    pulse_width_s: float = 0.0
    chip_rate_hz: float = 0.0
    sweep_rate_hz_per_s: float = 0.0

    def __post_init__(self):
        if self.modulation not in MODULATIONS:
            raise ValidationError(
                f"unknown modulation {self.modulation!r}; expected one of {MODULATIONS}"
            )
        if self.carrier_hz <= 0:
            raise ValidationError(f"carrier_hz must be positive, got {self.carrier_hz}")
        if self.power <= 0:
            raise ValidationError(f"power must be positive, got {self.power}")
        if self.bandwidth_hz < 0:
            raise ValidationError(f"bandwidth_hz must be >= 0, got {self.bandwidth_hz}")
        if not -AZIMUTH_LIMIT_RAD <= self.azimuth_rad <= AZIMUTH_LIMIT_RAD:
            raise ValidationError(
                f"azimuth_rad must lie in [-pi/3, pi/3], got {self.azimuth_rad}"
            )
        if self.pulse_width_s < 0:
            raise ValidationError(f"pulse_width_s must be >= 0, got {self.pulse_width_s}")


@dataclass
class ScenarioConfig:
    """A scene: emitter list, a common per-emitter SNR, seed, and duration.

    snr_db=None (or +inf) disables noise entirely. An empty emitter list is
    allowed and yields a noise-only capture.
    """

    emitters: list[EmitterSpec] = field(default_factory=list)
    snr_db: float | None = None
    seed: int = 0
    capture_duration_s: float = 1.0

    def __post_init__(self):
        if self.capture_duration_s <= 0:
            raise ValidationError(
                f"capture_duration_s must be positive, got {self.capture_duration_s}"
            )
        self.seed = int(self.seed)

    @property
    def noise_variance(self) -> float:
        """Per-sample complex noise variance implied by snr_db, 0.0 if disabled."""
        if self.snr_db is None or math.isinf(self.snr_db):
            return 0.0
        ref = 1.0
        if self.emitters:
            ref = float(np.mean([e.power for e in self.emitters]))
        return ref * 10.0 ** (-self.snr_db / 10.0)


@dataclass
class NodeConfig:
    node_id: int
    position_m: tuple[float, float] = (0.0, 0.0)
    decimation: int = 1

    def __post_init__(self):
        self.node_id = int(self.node_id)
        self.decimation = _as_int(self.decimation, "decimation")
        if len(self.position_m) != 2:
            raise ConfigError(f"position_m must be 2-D, got {self.position_m!r}")
        self.position_m = (float(self.position_m[0]), float(self.position_m[1]))


@dataclass
class SwarmConfig:
    """The sampler swarm: common Nyquist clock, per-node decimations, grid step.

    Every node rate f_s / decimation must be an exact multiple of
    resolution_hz so each node runs an integer-length snapshot FFT.
    """

    nyquist_rate_hz: float
    nodes: list[NodeConfig]
    resolution_hz: float
    clock_offset_policy: str = "none"

    def __post_init__(self):
        if self.nyquist_rate_hz <= 0:
            raise ConfigError(f"nyquist_rate_hz must be positive, got {self.nyquist_rate_hz}")
        if self.resolution_hz <= 0:
            raise ConfigError(f"resolution_hz must be positive, got {self.resolution_hz}")
        if self.clock_offset_policy not in CLOCK_OFFSET_POLICIES:
            raise ConfigError(
                f"clock_offset_policy must be one of {CLOCK_OFFSET_POLICIES}, "
                f"got {self.clock_offset_policy!r}"
            )
        if len(self.nodes) < 2:
            raise ConfigError(f"need at least 2 nodes, got {len(self.nodes)}")
        ids = [n.node_id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"node_id values must be distinct, got {ids}")
        decims = [n.decimation for n in self.nodes]
        if len(set(decims)) != len(decims):
            raise ConfigError(f"decimations must be distinct, got {decims}")
        for n in self.nodes:
            _as_int(
                self.nyquist_rate_hz / (n.decimation * self.resolution_hz),
                f"node {n.node_id}: (nyquist_rate_hz / decimation) / resolution_hz",
            )

    @property
    def node_ids(self) -> list[int]:
        return [n.node_id for n in self.nodes]

    def node(self, node_id: int) -> NodeConfig:
        for n in self.nodes:
            if n.node_id == node_id:
                return n
        raise ConfigError(f"unknown node_id {node_id}; have {self.node_ids}")

    def subnyquist_rate_hz(self, node_id: int) -> float:
        return self.nyquist_rate_hz / self.node(node_id).decimation

    def m_points(self, node_id: int) -> int:
        """Snapshot FFT length for a node (node rate / resolution)."""
        return _as_int(
            self.subnyquist_rate_hz(node_id) / self.resolution_hz,
            f"node {node_id}: FFT length",
        )

    @property
    def unambiguous_span_hz(self) -> float:
        """lcm of the node rates: the swarm's equivalent Nyquist rate."""
        span_channels = math.lcm(*(self.m_points(i) for i in self.node_ids))
        return span_channels * self.resolution_hz


@dataclass
class NodeCapture:
    """One node's Nyquist-rate capture plus the receiver state that shaped it."""

    node_id: int
    samples: np.ndarray
    sample_rate_hz: float
    noise_variance: float = 0.0
    clock_offset_samples: int = 0


def compute_delay(swarm: SwarmConfig, node_id: int, azimuth_rad: float) -> float:
    """Plane-wave arrival delay at a node, in seconds, relative to the origin.

    For a node at (x, y) and a source at azimuth theta the delay is
    -(x*sin(theta) + y*cos(theta)) / c0. A node at the origin always reads 0.
    """
    if not -AZIMUTH_LIMIT_RAD <= azimuth_rad <= AZIMUTH_LIMIT_RAD:
        raise ValidationError(f"azimuth_rad must lie in [-pi/3, pi/3], got {azimuth_rad}")
    x, y = swarm.node(node_id).position_m
    return -(x * math.sin(azimuth_rad) + y * math.cos(azimuth_rad)) / SPEED_OF_LIGHT_M_S


def synthesize_emitter(
    spec: EmitterSpec,
    n_samples: int,
    fs_hz: float,
    delay_s: float = 0.0,
    chip_rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Sample the delayed complex analytic waveform of one emitter.

    Returns s(t - delay_s) on the grid t = n / fs_hz for n in [0, n_samples).
    BPSK chips come from chip_rng (so all nodes see the same chip sequence
    when the caller passes the same generator seed).
    """
    if n_samples <= 0:
        raise ValidationError(f"n_samples must be positive, got {n_samples}")
    if fs_hz <= 0:
        raise ValidationError(f"fs_hz must be positive, got {fs_hz}")

    tt = np.arange(n_samples, dtype=float) / fs_hz - delay_s
    amp = math.sqrt(spec.power)
    fc = spec.carrier_hz

    if spec.modulation == "tone":
        return amp * np.exp(2j * np.pi * fc * tt)

    if spec.modulation == "monopulse":
        gate = (tt >= spec.pulse_start_s) & (tt < spec.pulse_start_s + spec.pulse_width_s)
        out = np.zeros(n_samples, dtype=complex)
        out[gate] = amp * np.exp(2j * np.pi * fc * tt[gate])
        return out

    if spec.modulation == "bpsk":
        if spec.chip_rate_hz <= 0:
            raise ValidationError("bpsk requires chip_rate_hz > 0")
        rng = chip_rng if chip_rng is not None else np.random.default_rng(0)
        duration = n_samples / fs_hz
        n_chips = int(math.ceil(duration * spec.chip_rate_hz)) + 1
        chips = rng.integers(0, 2, size=n_chips) * 2 - 1
        idx = np.floor(tt * spec.chip_rate_hz).astype(np.int64) % n_chips
        return amp * chips[idx] * np.exp(2j * np.pi * fc * tt)

    # lfm: instantaneous frequency fc + rate * (t - delay)
    rate = spec.sweep_rate_hz_per_s
    if rate == 0.0:
        if spec.bandwidth_hz <= 0:
            raise ValidationError("lfm requires sweep_rate_hz_per_s or bandwidth_hz > 0")
        rate = spec.bandwidth_hz * fs_hz / n_samples
    phase = 2.0 * np.pi * (fc * tt + 0.5 * rate * tt * tt)
    return amp * np.exp(1j * phase)


def compose_capture(scenario: ScenarioConfig, swarm: SwarmConfig, node_id: int) -> NodeCapture:
    """Sum all emitters, delayed for this node, and add the node's AWGN.

    Deterministic given (scenario.seed, node_id). Emitter carriers above the
    swarm's unambiguous span are rejected since they would alias onto a lower
    channel in every node at once.
    """
    node = swarm.node(node_id)
    fs = swarm.nyquist_rate_hz
    n = _as_int(scenario.capture_duration_s * fs, "capture length in samples")
    span = swarm.unambiguous_span_hz

    offset = 0
    if swarm.clock_offset_policy == "random-integer-sample":
        rng = _stream(scenario.seed, _CLOCK_STREAM, node.node_id)
        offset = int(rng.integers(0, _CLOCK_OFFSET_SPAN))

    x = np.zeros(n, dtype=complex)
    for i, em in enumerate(scenario.emitters):
        if em.carrier_hz > span:
            raise ValidationError(
                f"emitter {i}: carrier_hz {em.carrier_hz} exceeds the "
                f"unambiguous span {span}"
            )
        tau = compute_delay(swarm, node_id, em.azimuth_rad)
        chip_rng = _stream(scenario.seed, _CHIP_STREAM, i)
        x += synthesize_emitter(em, n, fs, tau - offset / fs, chip_rng=chip_rng)

    sigma2 = scenario.noise_variance
    if sigma2 > 0.0:
        rng = _stream(scenario.seed, _NOISE_STREAM, node.node_id)
        scale = math.sqrt(sigma2 / 2.0)
        x += scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))

    return NodeCapture(
        node_id=node.node_id,
        samples=x,
        sample_rate_hz=fs,
        noise_variance=sigma2,
        clock_offset_samples=offset,
    )
