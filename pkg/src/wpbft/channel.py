"""Physical-layer model for consensus traffic over fading wireless links.

Nodes are scattered on a disk by a planar Poisson process of fixed density,
so a receiver sits at distance r from a sender with density 2r/R^2 on
(0, R]. Each message sees an independent exponential (Rayleigh power)
fading gain h, giving

    snr = P_T * h * r^(-alpha) / P_N

and a per-link success probability P{snr > z} = exp(-P_N * r^alpha * z / P_T).
Averaging that over the disk yields the transmission success rate used by
the consensus and latency layers. A free-space log-distance path loss
helper is included for link budgets in dB; it is a standalone diagnostic
and feeds nothing else.

Units: meters, watts, hertz, bits per second. Decibels appear only at the
edges (SNR thresholds are quoted in dB).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .numerics import Tolerance, integrate

__all__ = [
    "PRESETS",
    "NetworkGeometry",
    "PathLossSample",
    "SignalProfile",
    "SPEED_OF_LIGHT_M_S",
    "active_distance",
    "avg_success_prob",
    "db_to_linear",
    "linear_to_db",
    "link_success_prob",
    "path_loss_db",
    "preset",
    "snr",
]

SPEED_OF_LIGHT_M_S = 299_792_458.0


@dataclass(frozen=True)
class SignalProfile:
    """Link-budget description of one carrier signal."""

    name: str
    transmit_power_w: float  # P_T
    noise_power_w: float     # P_N
    bandwidth_hz: float
    capacity_bps: float      # channel capacity at the operating point
    rate_bps: float          # target information rate, must sit below capacity
    path_loss_exponent: float
    carrier_frequency_hz: float

    def __post_init__(self):
        if not self.name:
            raise ValueError("profile name must be non-empty")
        for label in ("transmit_power_w", "noise_power_w", "bandwidth_hz",
                      "carrier_frequency_hz"):
            value = getattr(self, label)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0.0):
                raise ValueError(f"{label} must be a positive finite number, got {value!r}")
        if not (math.isfinite(self.capacity_bps) and self.capacity_bps > 0.0):
            raise ValueError(f"capacity_bps must be > 0, got {self.capacity_bps!r}")
        if not (math.isfinite(self.rate_bps) and 0.0 < self.rate_bps < self.capacity_bps):
            raise ValueError(
                f"rate_bps must satisfy 0 < rate < capacity, got "
                f"rate={self.rate_bps!r} capacity={self.capacity_bps!r}")
        if not (math.isfinite(self.path_loss_exponent) and self.path_loss_exponent > 0.0):
            raise ValueError(
                f"path_loss_exponent must be > 0, got {self.path_loss_exponent!r}")

    @property
    def spectral_capacity(self) -> float:
        """Capacity per channel use, bits/use."""
        return self.capacity_bps / self.bandwidth_hz

    @property
    def spectral_rate(self) -> float:
        """Coding rate per channel use, bits/use."""
        return self.rate_bps / self.bandwidth_hz


PRESETS: dict[str, SignalProfile] = {
    "thz-0.22": SignalProfile(
        name="thz-0.22",
        transmit_power_w=1.0,
        noise_power_w=0.2,
        bandwidth_hz=10e9,
        capacity_bps=80e9,
        rate_bps=40e9,
        path_loss_exponent=2.229,
        carrier_frequency_hz=0.22e12,
    ),
    "mmwave-28": SignalProfile(
        name="mmwave-28",
        transmit_power_w=1.0,
        noise_power_w=0.2,
        bandwidth_hz=800e6,
        capacity_bps=8e9,
        rate_bps=4e9,
        path_loss_exponent=1.7,
        carrier_frequency_hz=28e9,
    ),
}


def preset(name: str) -> SignalProfile:
    """Look up a built-in signal profile by name."""
    try:
        return PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise ValueError(f"unknown signal profile {name!r} (known: {known})") from None


@dataclass(frozen=True)
class NetworkGeometry:
    """Disk of node_count nodes drawn at a fixed planar density.

    Holding density fixed while the node count grows means the disk grows:
    radius = sqrt(node_count / (pi * density)).
    """

    node_count: int
    density: float            # nodes per square meter
    snr_threshold_db: float   # decoding threshold z, in dB
    radius: float = field(init=False)

    def __post_init__(self):
        if not (isinstance(self.node_count, int) and self.node_count >= 4):
            raise ValueError(f"node_count must be an integer >= 4, got {self.node_count!r}")
        if not (isinstance(self.density, (int, float)) and math.isfinite(self.density)
                and self.density > 0.0):
            raise ValueError(f"density must be > 0, got {self.density!r}")
        if not math.isfinite(self.snr_threshold_db):
            raise ValueError(f"snr_threshold_db must be finite, got {self.snr_threshold_db!r}")
        object.__setattr__(
            self, "radius", math.sqrt(self.node_count / (math.pi * self.density)))

    @property
    def z_linear(self) -> float:
        """The SNR threshold as a linear power ratio."""
        return db_to_linear(self.snr_threshold_db)


@dataclass(frozen=True)
class PathLossSample:
    """Inputs for one log-distance path loss evaluation."""

    reference_distance_m: float = 1.0
    shadowing_sigma_db: float = 0.0
    shadow_draw_db: float = 0.0  # the realized shadowing term X, in dB

    def __post_init__(self):
        if not (math.isfinite(self.reference_distance_m) and self.reference_distance_m > 0.0):
            raise ValueError(
                f"reference_distance_m must be > 0, got {self.reference_distance_m!r}")
        if not (math.isfinite(self.shadowing_sigma_db) and self.shadowing_sigma_db >= 0.0):
            raise ValueError(
                f"shadowing_sigma_db must be >= 0, got {self.shadowing_sigma_db!r}")
        if not math.isfinite(self.shadow_draw_db):
            raise ValueError(f"shadow_draw_db must be finite, got {self.shadow_draw_db!r}")


def db_to_linear(value_db: float) -> float:
    """Convert decibels to a linear power ratio."""
    if not math.isfinite(value_db):
        raise ValueError(f"db_to_linear requires a finite value, got {value_db!r}")
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    """Convert a positive linear power ratio to decibels."""
    if not (math.isfinite(value) and value > 0.0):
        raise ValueError(f"linear_to_db requires a positive finite value, got {value!r}")
    return 10.0 * math.log10(value)


def snr(profile: SignalProfile, fading_gain: float, distance_m: float) -> float:
    """Received SNR for one message: P_T * h * r^(-alpha) / P_N."""
    if not (math.isfinite(fading_gain) and fading_gain >= 0.0):
        raise ValueError(f"fading_gain must be >= 0, got {fading_gain!r}")
    if not (math.isfinite(distance_m) and distance_m > 0.0):
        raise ValueError(f"distance_m must be > 0, got {distance_m!r}")
    return (profile.transmit_power_w * fading_gain
            * distance_m ** (-profile.path_loss_exponent) / profile.noise_power_w)


def path_loss_db(profile: SignalProfile, sample: PathLossSample,
                 distance_m: float) -> float:
    """Log-distance path loss in dB at the given separation.

    Free-space loss at the reference distance r0,

        PL(r0) = 20 * log10(4 * pi * r0 * f_c / c),

    plus 10 * alpha * log10(r / r0) and the realized shadowing draw. This is
    a dB-domain diagnostic; the success-probability chain models loss
    through the r^(-alpha) term in snr() instead.
    """
    if not (math.isfinite(distance_m) and distance_m > 0.0):
        raise ValueError(f"distance_m must be > 0, got {distance_m!r}")
    r0 = sample.reference_distance_m
    reference_loss = 20.0 * math.log10(
        4.0 * math.pi * r0 * profile.carrier_frequency_hz / SPEED_OF_LIGHT_M_S)
    slope = 10.0 * profile.path_loss_exponent * math.log10(distance_m / r0)
    return reference_loss + slope + sample.shadow_draw_db


def link_success_prob(profile: SignalProfile, z_linear: float,
                      distance_m: float) -> float:
    """P{snr > z} over the fading at a fixed distance: exp(-P_N r^alpha z / P_T)."""
    if not (math.isfinite(z_linear) and z_linear >= 0.0):
        raise ValueError(f"z_linear must be >= 0, got {z_linear!r}")
    if not (math.isfinite(distance_m) and distance_m > 0.0):
        raise ValueError(f"distance_m must be > 0, got {distance_m!r}")
    exponent = (profile.noise_power_w * distance_m ** profile.path_loss_exponent
                * z_linear / profile.transmit_power_w)
    return math.exp(-exponent)


def avg_success_prob(profile: SignalProfile, geometry: NetworkGeometry,
                     tol: Tolerance | None = None) -> float:
    """Per-message success probability averaged over node placement and fading.

    Integrates link_success_prob against the disk's distance density
    2r/R^2 on (0, R]. The result lies in (0, 1] and decreases as the disk
    grows (more nodes at fixed density).
    """
    coefficient = (profile.noise_power_w * geometry.z_linear
                   / profile.transmit_power_w)
    alpha = profile.path_loss_exponent
    radius = geometry.radius

    def weighted_success(r: float) -> float:
        return math.exp(-coefficient * r ** alpha) * r

    value = integrate(weighted_success, 0.0, radius, tol) * 2.0 / (radius * radius)
    return min(value, 1.0)


def active_distance(profile: SignalProfile, z_linear: float,
                    fading_gain: float = 1.0) -> float:
    """Largest separation that still decodes at threshold z for a given gain.

    Solving P_T * h * r^(-alpha) / P_N = z for r gives

        r* = (P_T * h / (z * P_N)) ** (1 / alpha),

    so snr(profile, h, r*) == z and any shorter link clears the threshold.
    """
    if not (math.isfinite(z_linear) and z_linear > 0.0):
        raise ValueError(f"z_linear must be > 0, got {z_linear!r}")
    if not (math.isfinite(fading_gain) and fading_gain > 0.0):
        raise ValueError(f"fading_gain must be > 0, got {fading_gain!r}")
    base = (profile.transmit_power_w * fading_gain
            / (z_linear * profile.noise_power_w))
    return base ** (1.0 / profile.path_loss_exponent)
