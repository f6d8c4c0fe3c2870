"""Receive-spatial-modulation bit mapping and power-detector demodulation.

Two antenna-index keying schemes over the time-reversal link:

* RASK - each symbol targets exactly one of two receive antennas; the
  first antenna carries bit 0, the second bit 1. Detection picks the
  antenna with the largest windowed power (argmax needs no threshold).
* ERASK - each antenna is independently targeted or not, giving ``N`` bits
  per symbol; detection compares each antenna's windowed power against a
  threshold.

The receiver is non-coherent: only magnitudes inside small windows around
the expected focusing peaks are used, so no phase reference or inter-antenna
synchronisation is required.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dsp import ComplexBasebandSignal
from .errors import ConfigurationError, DomainError
from .precoding import SymbolStream


class Scheme(str, Enum):
    RASK = "rask"
    ERASK = "erask"


@dataclass(frozen=True)
class FixedThreshold:
    """Use a caller-supplied detection threshold (received power units)."""

    value: float


@dataclass(frozen=True)
class PilotThreshold:
    """Calibrate the threshold from a pilot frame of known symbols."""

    num_pilots: int = 32

    def __post_init__(self) -> None:
        if self.num_pilots < 2:
            raise ConfigurationError("pilot calibration needs at least 2 pilot symbols")


@dataclass(frozen=True)
class RsmConfig:
    """Scheme, antenna count, pulse spacing, and threshold policy."""

    scheme: Scheme
    num_rx: int = 2
    spacing: int = 15
    threshold_policy: FixedThreshold | PilotThreshold | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.scheme is Scheme.RASK and self.num_rx < 2:
            raise ConfigurationError("RASK needs at least 2 receive antennas")
        if self.num_rx < 1:
            raise ConfigurationError(f"num_rx must be >= 1, got {self.num_rx}")
        if self.spacing < 1:
            raise ConfigurationError(f"pulse spacing must be >= 1, got {self.spacing}")

    @property
    def bits_per_symbol(self) -> int:
        return 1 if self.scheme is Scheme.RASK else self.num_rx


@dataclass(frozen=True, eq=False)
class DetectionWindow:
    """Expected focusing-peak indices per symbol, plus a half-width in taps.

    Windows of distinct symbols are disjoint whenever the pulse spacing
    exceeds twice the half-width.
    """

    peak_lags: np.ndarray
    half_width: int = 1

    def __post_init__(self) -> None:
        lags = np.asarray(self.peak_lags, dtype=np.int64)
        if lags.ndim != 1:
            raise DomainError("peak_lags must be 1-D")
        if lags.size and lags.min() < 0:
            raise DomainError("peak lags must be non-negative")
        if self.half_width < 0:
            raise ConfigurationError(f"half_width must be >= 0, got {self.half_width}")
        lags = lags.copy()
        lags.flags.writeable = False
        object.__setattr__(self, "peak_lags", lags)
        object.__setattr__(self, "half_width", int(self.half_width))

    @property
    def num_symbols(self) -> int:
        return self.peak_lags.size


def detection_windows(
    num_symbols: int, num_taps: int, spacing: int, half_width: int = 1
) -> DetectionWindow:
    """Windows centred on the focusing peaks ``L - 1 + l*spacing``."""
    lags = num_taps - 1 + np.arange(num_symbols, dtype=np.int64) * spacing
    return DetectionWindow(lags, half_width)


def _as_bit_array(bits) -> np.ndarray:
    arr = np.asarray(bits, dtype=np.int64).ravel()
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise DomainError("bits must be 0/1 valued")
    return arr


def rask_modulate(bits, cfg: RsmConfig) -> list[SymbolStream]:
    """One stream per antenna; bit 0 pulses antenna 0, bit 1 pulses antenna 1."""
    if cfg.scheme is not Scheme.RASK:
        raise ConfigurationError("rask_modulate requires an RASK config")
    if cfg.num_rx != 2:
        raise ConfigurationError("RASK mapping is defined for exactly 2 antennas")
    arr = _as_bit_array(bits)
    streams = []
    for antenna in range(cfg.num_rx):
        amplitudes = (arr == antenna).astype(np.complex128)
        streams.append(SymbolStream(amplitudes, cfg.spacing))
    return streams


def erask_modulate(bits, cfg: RsmConfig) -> list[SymbolStream]:
    """Groups of ``num_rx`` bits per symbol; bit ``n`` gates antenna ``n``."""
    if cfg.scheme is not Scheme.ERASK:
        raise ConfigurationError("erask_modulate requires an ERASK config")
    arr = _as_bit_array(bits)
    if arr.size % cfg.num_rx != 0:
        raise DomainError(
            f"bit count {arr.size} is not a multiple of num_rx={cfg.num_rx} (framing)"
        )
    grouped = arr.reshape(-1, cfg.num_rx)
    return [
        SymbolStream(grouped[:, antenna].astype(np.complex128), cfg.spacing)
        for antenna in range(cfg.num_rx)
    ]


def window_peak_powers(
    received: list[ComplexBasebandSignal], windows: DetectionWindow
) -> np.ndarray:
    """Max |y|^2 inside each symbol window, per antenna: shape (N, M)."""
    num_symbols = windows.num_symbols
    powers = np.zeros((len(received), num_symbols))
    if num_symbols == 0:
        return powers
    offsets = np.arange(-windows.half_width, windows.half_width + 1)
    for n, signal in enumerate(received):
        samples = signal.samples
        if windows.peak_lags.max() >= samples.size:
            raise DomainError(
                f"received signal of length {samples.size} is shorter than the last "
                f"detection window at lag {int(windows.peak_lags.max())}"
            )
        idx = np.clip(windows.peak_lags[:, None] + offsets[None, :], 0, samples.size - 1)
        powers[n] = np.max(np.abs(samples[idx]) ** 2, axis=1)
    return powers


def power_detect(
    received: list[ComplexBasebandSignal],
    windows: DetectionWindow,
    cfg: RsmConfig,
    threshold: float | None = None,
) -> np.ndarray:
    """Non-coherent detection of the transmitted bits.

    RASK returns one bit per symbol, the index of the strongest antenna
    (ties break to the lowest index, i.e. bit 0). ERASK returns ``num_rx``
    bits per symbol, antenna-major within each symbol, set where the
    windowed power reaches the threshold.
    """
    if len(received) != cfg.num_rx:
        raise ConfigurationError(
            f"{len(received)} received signals for num_rx={cfg.num_rx}"
        )
    powers = window_peak_powers(received, windows)
    if cfg.scheme is Scheme.RASK:
        if cfg.num_rx != 2:
            raise ConfigurationError("RASK detection is defined for exactly 2 antennas")
        return np.argmax(powers, axis=0).astype(np.int64)
    if threshold is None:
        raise ConfigurationError("ERASK detection requires a threshold")
    decisions = (powers >= threshold).astype(np.int64)
    return decisions.T.reshape(-1)


def calibrate_threshold(
    pilot_received: list[ComplexBasebandSignal],
    windows: DetectionWindow,
    cfg: RsmConfig,
    targeted: np.ndarray,
) -> float:
    """Midpoint between the targeted and untargeted pilot power class means.

    ``targeted`` is a boolean (num_rx, num_pilots) mask saying which
    antenna/symbol cells of the pilot frame carried a pulse; both classes
    must be represented.
    """
    mask = np.asarray(targeted, dtype=bool)
    powers = window_peak_powers(pilot_received, windows)
    if mask.shape != powers.shape:
        raise ConfigurationError(
            f"targeted mask shape {mask.shape} does not match pilot powers {powers.shape}"
        )
    if not mask.any() or mask.all():
        raise ConfigurationError("pilot frame must contain both targeted and untargeted cells")
    mean_on = float(powers[mask].mean())
    mean_off = float(powers[~mask].mean())
    return 0.5 * (mean_on + mean_off)
