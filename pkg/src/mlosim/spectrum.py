"""Channels, propagation, link budget and MCS / PHY rate selection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

BANDS = (2.4, 5.0, 6.0)

# (channel number -> width in MHz) available per band
CHANNEL_SETS = {
    2.4: {1: 20, 6: 20, 11: 20},
    5.0: {38: 40, 46: 40, 58: 80},
    6.0: {55: 80, 71: 80, 15: 160},
}

# data subcarriers per channel width (HE/EHT SU)
N_SD = {20: 234, 40: 468, 80: 980, 160: 1960}

SYMBOL_US = 12.8
THERMAL_NOISE_DBM_HZ = -174.0

_BAND_BASE_MHZ = {2.4: 2407.0, 5.0: 5000.0, 6.0: 5950.0}


def _band_key(band: float) -> float:
    for b in BANDS:
        if abs(float(band) - b) < 1e-9:
            return b
    raise ValueError(f"unknown band {band!r}, expected one of {BANDS}")


@dataclass(frozen=True)
class Channel:
    band: float
    number: int
    center_mhz: float
    width_mhz: int

    def __post_init__(self):
        if self.width_mhz not in N_SD:
            raise ValueError(f"channel width must be one of {sorted(N_SD)}, got {self.width_mhz}")

    @classmethod
    def from_number(cls, band: float, number: int) -> "Channel":
        band = _band_key(band)
        widths = CHANNEL_SETS[band]
        if number not in widths:
            raise ValueError(f"channel {number} is not in the {band} GHz set {sorted(widths)}")
        return cls(band, int(number), _BAND_BASE_MHZ[band] + 5.0 * number, widths[number])

    @property
    def low_mhz(self) -> float:
        return self.center_mhz - self.width_mhz / 2

    @property
    def high_mhz(self) -> float:
        return self.center_mhz + self.width_mhz / 2

    @property
    def fc_ghz(self) -> float:
        return self.center_mhz / 1000.0


def band_channels(band: float) -> list[Channel]:
    band = _band_key(band)
    return [Channel.from_number(band, n) for n in CHANNEL_SETS[band]]


@dataclass(frozen=True)
class LinkBudgetParams:
    tx_power_ap: float = 20.0  # dBm
    tx_power_sta: float = 15.0  # dBm, carried for completeness (downlink-only model)
    antenna_gain: float = 0.0  # dB
    noise_figure: float = 7.0  # dB
    cca_threshold: float = -82.0  # dBm
    breakpoint_m: float = 5.0
    walls: int = 4


@dataclass(frozen=True)
class McsEntry:
    index: int
    bits: int  # coded bits per subcarrier
    rate: float  # coding rate
    min_snr: float  # dB

    @property
    def modulation(self) -> str:
        return {1: "BPSK", 2: "QPSK"}.get(self.bits, f"{2 ** self.bits}-QAM")


McsTable = tuple  # tuple[McsEntry, ...], sorted by index

_MCS_BITS = (1, 2, 2, 4, 4, 6, 6, 6, 8, 8, 10, 10)
_MCS_RATES = (1 / 2, 1 / 2, 3 / 4, 1 / 2, 3 / 4, 2 / 3, 3 / 4, 5 / 6, 3 / 4, 5 / 6, 3 / 4, 5 / 6)

# 11 dB must land exactly on MCS 11 (1024-QAM 5/6)
PAPER_EXAMPLE_SNR = (-11, -9, -7, -5, -3, -1, 1, 3, 5, 7, 9, 11)

# 20 MHz minimum receiver sensitivities (dBm) referred to a 7 dB NF noise floor
_SENSITIVITY_DBM = (-82, -79, -77, -74, -70, -66, -65, -64, -59, -57, -54, -52)
SENSITIVITY_SNR = tuple(s + 94 for s in _SENSITIVITY_DBM)


def make_mcs_table(thresholds: Sequence[float]) -> McsTable:
    if len(thresholds) != len(_MCS_BITS):
        raise ValueError(f"expected {len(_MCS_BITS)} thresholds, got {len(thresholds)}")
    return mcs_table_from_records(
        [{"index": i, "bits": b, "rate": r, "min_snr": t}
         for i, (b, r, t) in enumerate(zip(_MCS_BITS, _MCS_RATES, thresholds))]
    )


def mcs_table_from_records(records) -> McsTable:
    """Build a table from ``{index, bits, rate, min_snr}`` mappings, checking monotonicity."""
    if not records:
        raise ValueError("MCS table is empty")
    entries = sorted(
        (McsEntry(int(r["index"]), int(r["bits"]), float(r["rate"]), float(r["min_snr"])) for r in records),
        key=lambda e: e.index,
    )
    for prev, cur in zip(entries, entries[1:]):
        if cur.index == prev.index:
            raise ValueError(f"duplicate MCS index {cur.index}")
        if cur.min_snr <= prev.min_snr:
            raise ValueError(f"min_snr must increase with index (MCS {prev.index} -> {cur.index})")
    for e in entries:
        if e.bits <= 0 or not 0 < e.rate <= 1:
            raise ValueError(f"MCS {e.index}: invalid bits/rate")
    return tuple(entries)


MCS_PRESETS = {
    "paper-example": make_mcs_table(PAPER_EXAMPLE_SNR),
    "sensitivity": make_mcs_table(SENSITIVITY_SNR),
}


def get_mcs_preset(name: str) -> McsTable:
    try:
        return MCS_PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown MCS preset {name!r}, valid: {sorted(MCS_PRESETS)}") from None


def path_loss(fc_ghz: float, d: float, params: LinkBudgetParams = LinkBudgetParams()) -> float:
    """Enterprise single-floor path loss in dB at carrier ``fc_ghz`` over ``d`` metres."""
    if not d > 0:
        raise ValueError(f"distance must be positive, got {d}")
    if not fc_ghz > 0:
        raise ValueError(f"carrier frequency must be positive, got {fc_ghz}")
    d_bp = params.breakpoint_m
    pl = 40.05 + 20 * math.log10(fc_ghz / 2.4) + 20 * math.log10(min(d, d_bp))
    if d > d_bp:
        pl += 35 * math.log10(d / d_bp)
    return pl + 7 * params.walls


def rx_power(tx_dbm: float, pl_db: float, gains_db: float = 0.0) -> float:
    return tx_dbm + gains_db - pl_db


def noise_floor(width_mhz: float, nf_db: float) -> float:
    if not width_mhz > 0:
        raise ValueError("width must be positive")
    return THERMAL_NOISE_DBM_HZ + 10 * math.log10(width_mhz * 1e6) + nf_db


def snr(rx_dbm: float, noise_dbm: float) -> float:
    return rx_dbm - noise_dbm


def select_mcs(snr_db: float, table: McsTable) -> Optional[McsEntry]:
    """Highest MCS whose threshold is met (inclusive), or None when none is."""
    best = None
    for entry in table:
        if entry.min_snr <= snr_db:
            best = entry
        else:
            break
    return best


def data_rate(mcs: McsEntry, width_mhz: int, n_ss: int = 2, gi_us: float = 3.2) -> float:
    """PHY data rate in Mbps (full precision; round at reporting time)."""
    if width_mhz not in N_SD:
        raise ValueError(f"unsupported width {width_mhz}")
    if n_ss < 1:
        raise ValueError("need at least one spatial stream")
    return n_ss * N_SD[width_mhz] * mcs.bits * mcs.rate / (SYMBOL_US + gi_us)


def channels_overlap(a: Channel, b: Channel) -> bool:
    """True iff the open frequency intervals of ``a`` and ``b`` intersect."""
    return a.low_mhz < b.high_mhz and b.low_mhz < a.high_mhz


@dataclass(frozen=True)
class PhyRate:
    mcs: McsEntry
    width_mhz: int
    n_ss: int
    gi_us: float
    rate: float  # Mbps


def link_phy_rate(channel: Channel, distance: float, tx_dbm: float, params: LinkBudgetParams,
                  table: McsTable, n_ss: int = 2, gi_us: float = 3.2) -> Optional[PhyRate]:
    """Downlink PHY rate on ``channel`` at ``distance``; None if no MCS is decodable."""
    pl = path_loss(channel.fc_ghz, distance, params)
    rx = rx_power(tx_dbm, pl, 2 * params.antenna_gain)
    s = snr(rx, noise_floor(channel.width_mhz, params.noise_figure))
    mcs = select_mcs(s, table)
    if mcs is None:
        return None
    return PhyRate(mcs, channel.width_mhz, n_ss, gi_us, data_rate(mcs, channel.width_mhz, n_ss, gi_us))


# 802.11 OFDM MAC/PHY timing (us) for a single MPDU exchange without aggregation
SLOT_US = 9.0
SIFS_US = 16.0
DIFS_US = SIFS_US + 2 * SLOT_US
LEGACY_PREAMBLE_US = 20.0
HE_SU_PREAMBLE_US = LEGACY_PREAMBLE_US + 8.0 + 4.0  # + RL-SIG/HE-SIG-A, HE-STF
MAC_OVERHEAD_BYTES = 34  # QoS data header + FCS
ACK_BYTES = 14
LEGACY_ACK_BITS_PER_SYMBOL = 96  # 24 Mbps, 4 us symbols


def dcf_exchange_us(phy_rate: float, mpdu_bytes: int = 1500, cw_min: int = 15,
                    n_ss: int = 2, gi_us: float = 3.2) -> float:
    """Duration of one successful DATA/ACK exchange including DIFS and mean backoff."""
    symbol = SYMBOL_US + gi_us
    bits_per_symbol = phy_rate * symbol
    data_bits = 16 + 8 * (mpdu_bytes + MAC_OVERHEAD_BYTES) + 6
    t_data = math.ceil(data_bits / bits_per_symbol) * symbol
    t_ppdu = HE_SU_PREAMBLE_US + n_ss * symbol + t_data  # one HE-LTF per stream
    t_ack = LEGACY_PREAMBLE_US + 4.0 * math.ceil((16 + 8 * ACK_BYTES + 6) / LEGACY_ACK_BITS_PER_SYMBOL)
    backoff = cw_min / 2 * SLOT_US
    return backoff + DIFS_US + t_ppdu + SIFS_US + t_ack


def dcf_effective_rate(phy_rate: float, mpdu_bytes: int = 1500, cw_min: int = 15,
                       n_ss: int = 2, gi_us: float = 3.2) -> float:
    """MAC-level payload rate (Mbps) once per-MPDU channel access overhead is paid."""
    return 8 * mpdu_bytes / dcf_exchange_us(phy_rate, mpdu_bytes, cw_min, n_ss, gi_us)
