"""Wireless transmission chain: distance -> path loss -> SNR -> Shannon rate -> time.

Units are fixed throughout the package: distances in metres, frequencies in
GHz, powers in dBm or mW, bandwidth in MHz, noise density in mW/MHz, rates in
Mbit/s and data sizes in Mbit. Because bandwidth enters the SNR denominator
in MHz, every rate is in Mbit/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from edgesched.errors import ChannelDomainError, InfeasibleSolutionError

# Empirical path-loss coefficients (intercept, distance slope, frequency slope).
PL_INTERCEPT = 38.77
PL_DISTANCE_SLOPE = 16.7
PL_FREQ_SLOPE = 18.2

MIN_DISTANCE_M = 1.0


@dataclass(frozen=True)
class WirelessParams:
    """Physical constants of the uplink.

    Parameters
    ----------
    carrier_freq:
        Carrier frequency in GHz.
    tx_power:
        Transmit power of every request in dBm.
    noise_density:
        Noise power per MHz of allocated band, in mW/MHz.
    """

    carrier_freq: float = 5.9
    tx_power: float = 21.0
    noise_density: float = 10.0 ** -11.4

    def __post_init__(self):
        if not (self.carrier_freq > 0 and math.isfinite(self.carrier_freq)):
            raise ChannelDomainError(f"carrier_freq must be > 0, got {self.carrier_freq}")
        if not (self.noise_density > 0 and math.isfinite(self.noise_density)):
            raise ChannelDomainError(f"noise_density must be > 0, got {self.noise_density}")
        if not math.isfinite(self.tx_power):
            raise ChannelDomainError("tx_power must be finite")


def path_loss_db(distance: float, freq: float) -> float:
    """Empirical path loss in dB for a link of ``distance`` metres at ``freq`` GHz."""
    if not distance >= MIN_DISTANCE_M:
        raise ChannelDomainError(f"distance must be >= {MIN_DISTANCE_M} m, got {distance}")
    if not freq > 0:
        raise ChannelDomainError(f"freq must be > 0 GHz, got {freq}")
    return PL_INTERCEPT + PL_DISTANCE_SLOPE * math.log10(distance) + PL_FREQ_SLOPE * math.log10(freq)


def received_power_dbm(tx_power: float, loss: float) -> float:
    return tx_power - loss


def dbm_to_mw(power: float) -> float:
    return 10.0 ** (power / 10.0)


def snr(signal: float, bandwidth: float, noise_density: float) -> float:
    """Signal-to-noise ratio with noise integrated over ``bandwidth`` MHz."""
    if not bandwidth > 0:
        raise ChannelDomainError(
            f"bandwidth must be > 0 MHz, got {bandwidth} (unallocated request?)"
        )
    if signal < 0:
        raise ChannelDomainError(f"signal power must be >= 0, got {signal}")
    return signal / (noise_density * bandwidth)


def tx_rate_mbps(bandwidth: float, snr: float) -> float:
    """Shannon rate ``bandwidth * log2(1 + snr)`` in Mbit/s."""
    if not bandwidth > 0:
        raise ChannelDomainError(f"bandwidth must be > 0 MHz, got {bandwidth}")
    if snr < 0:
        raise ChannelDomainError(f"snr must be >= 0, got {snr}")
    return bandwidth * math.log2(1.0 + snr)


def tx_time_s(size: float, rate: float) -> float:
    if size < 0:
        raise ChannelDomainError(f"size must be >= 0, got {size}")
    if not rate > 0:
        raise InfeasibleSolutionError(f"cannot transmit {size} Mbit at rate {rate} Mbit/s")
    return size / rate


def received_signal_mw(params: WirelessParams, distance: float) -> float:
    """Received signal power in mW at ``distance`` metres."""
    loss = path_loss_db(distance, params.carrier_freq)
    return dbm_to_mw(received_power_dbm(params.tx_power, loss))


def transmission_time(params: WirelessParams, distance: float, bandwidth: float, size: float) -> float:
    """Seconds needed to upload ``size`` Mbit over ``bandwidth`` MHz at ``distance`` m."""
    signal = received_signal_mw(params, distance)
    rate = tx_rate_mbps(bandwidth, snr(signal, bandwidth, params.noise_density))
    return tx_time_s(size, rate)


__all__ = [
    "WirelessParams",
    "path_loss_db",
    "received_power_dbm",
    "dbm_to_mw",
    "snr",
    "tx_rate_mbps",
    "tx_time_s",
    "received_signal_mw",
    "transmission_time",
]
