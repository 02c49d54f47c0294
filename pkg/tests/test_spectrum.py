import itertools
import math

import pytest
from hypothesis import given, strategies as st

from mlosim.spectrum import (
    BANDS,
    CHANNEL_SETS,
    MCS_PRESETS,
    Channel,
    LinkBudgetParams,
    band_channels,
    channels_overlap,
    data_rate,
    dcf_effective_rate,
    get_mcs_preset,
    link_phy_rate,
    make_mcs_table,
    mcs_table_from_records,
    noise_floor,
    path_loss,
    rx_power,
    select_mcs,
    snr,
)

P = LinkBudgetParams()
PAPER = MCS_PRESETS["paper-example"]


def test_defaults_match_parameter_table():
    assert (P.tx_power_ap, P.tx_power_sta, P.antenna_gain) == (20.0, 15.0, 0.0)
    assert (P.noise_figure, P.cca_threshold, P.breakpoint_m, P.walls) == (7.0, -82.0, 5.0, 4)


@pytest.mark.parametrize("fc, d, expected", [
    # 40.05 + 0 + 20*log10(5) + 0 + 28 = 82.029
    (2.4, 5, 82.03),
    (2.4, 1, 68.05),
    # 40.05 + 20*log10(5) + 35*log10(3) + 28 = 98.728
    (2.4, 15, 98.73),
    (2.4, 30, 109.27),
    # channel 38 at 5.19 GHz adds 20*log10(5.19/2.4) = 6.70 dB
    (5.19, 15, 105.43),
])
def test_path_loss_values(fc, d, expected):
    assert path_loss(fc, d, P) == pytest.approx(expected, abs=0.01)


@pytest.mark.parametrize("fc, d", [(2.4, 0), (2.4, -1), (0, 3), (-2.4, 3)])
def test_path_loss_rejects_non_positive(fc, d):
    with pytest.raises(ValueError):
        path_loss(fc, d, P)


def test_path_loss_continuous_at_breakpoint():
    eps = 1e-9
    assert path_loss(5.0, 5 - eps, P) == pytest.approx(path_loss(5.0, 5 + eps, P), abs=1e-6)


@given(st.floats(0.1, 2.0), st.floats(0.01, 200), st.floats(0.01, 200))
def test_path_loss_monotone_in_distance(fc_scale, d1, d2):
    fc = 2.4 * fc_scale
    lo, hi = sorted((d1, d2))
    assert path_loss(fc, lo, P) <= path_loss(fc, hi, P) + 1e-12


def test_rx_power():
    assert rx_power(20, 98.73, 0) == pytest.approx(-78.73)
    assert rx_power(20, 102, 0) == pytest.approx(-82.0)
    assert rx_power(13.5, 0, 0) == 13.5


@pytest.mark.parametrize("width, nf, expected", [(20, 7, -93.99), (80, 7, -87.97), (20, 0, -100.99)])
def test_noise_floor(width, nf, expected):
    assert noise_floor(width, nf) == pytest.approx(expected, abs=0.01)


def test_snr():
    assert snr(-83, -94) == 11
    assert snr(-60.5, -60.5) == 0
    assert snr(-78.73, -93.99) == pytest.approx(15.26)


def test_select_mcs_paper_example():
    mcs = select_mcs(11.0, PAPER)
    assert mcs.index == 11
    assert mcs.modulation == "1024-QAM"
    assert mcs.rate == pytest.approx(5 / 6)


@pytest.mark.parametrize("name", sorted(MCS_PRESETS))
def test_select_mcs_below_all_thresholds(name):
    table = MCS_PRESETS[name]
    assert select_mcs(table[0].min_snr - 0.01, table) is None
    assert select_mcs(-40.0, table) is None


@pytest.mark.parametrize("name", sorted(MCS_PRESETS))
def test_select_mcs_threshold_inclusive(name):
    for entry in MCS_PRESETS[name]:
        assert select_mcs(entry.min_snr, MCS_PRESETS[name]).index == entry.index


@given(st.floats(-30, 60), st.floats(-30, 60))
def test_select_mcs_monotone(a, b):
    lo, hi = sorted((a, b))
    for table in MCS_PRESETS.values():
        m_lo, m_hi = select_mcs(lo, table), select_mcs(hi, table)
        if m_lo is not None:
            assert m_hi.index >= m_lo.index


def test_presets_monotone():
    for table in MCS_PRESETS.values():
        snrs = [e.min_snr for e in table]
        assert snrs == sorted(snrs) and len(set(snrs)) == len(snrs)


def test_mcs_table_validation():
    with pytest.raises(ValueError):
        mcs_table_from_records([])
    with pytest.raises(ValueError):
        make_mcs_table([0, 1, 2])
    bad = [{"index": 0, "bits": 1, "rate": 0.5, "min_snr": 5}, {"index": 1, "bits": 2, "rate": 0.5, "min_snr": 5}]
    with pytest.raises(ValueError, match="increase"):
        mcs_table_from_records(bad)
    with pytest.raises(ValueError):
        get_mcs_preset("nope")


def test_data_rate_values():
    assert round(data_rate(PAPER[11], 20, 2, 3.2), 1) == 243.8
    assert round(data_rate(PAPER[11], 20, 1, 3.2), 1) == 121.9
    assert data_rate(PAPER[0], 20, 1, 3.2) == pytest.approx(234 * 0.5 / 16)


def test_data_rate_properties():
    widths = [20, 40, 80, 160]
    for w in widths:
        rates = [data_rate(m, w) for m in PAPER]
        assert all(a < b for a, b in zip(rates, rates[1:]))
        for m in PAPER:
            assert data_rate(m, w, 3) == pytest.approx(3 * data_rate(m, w, 1))
    for m in PAPER:
        by_width = [data_rate(m, w) for w in widths]
        assert by_width == sorted(by_width)


def test_channel_numbering():
    assert Channel.from_number(2.4, 1).center_mhz == 2412
    assert Channel.from_number(5, 38).center_mhz == 5190
    assert Channel.from_number(6, 15).center_mhz == 6025
    assert Channel.from_number(6, 15).width_mhz == 160
    with pytest.raises(ValueError):
        Channel.from_number(2.4, 3)
    with pytest.raises(ValueError):
        Channel.from_number(3.0, 1)


def test_channels_overlap_examples():
    ch1, ch6 = Channel.from_number(2.4, 1), Channel.from_number(2.4, 6)
    assert (ch1.low_mhz, ch1.high_mhz, ch6.low_mhz, ch6.high_mhz) == (2402, 2422, 2427, 2447)
    assert not channels_overlap(ch1, ch6)
    c38 = Channel.from_number(5, 38)
    assert channels_overlap(c38, c38)
    assert not channels_overlap(c38, Channel.from_number(6, 55))
    # a 40 MHz channel laid over a 20 MHz one partially overlaps
    assert channels_overlap(Channel(5.0, 36, 5180, 20), c38)


def test_channel_sets_disjoint_within_band():
    all_ch = [c for b in BANDS for c in band_channels(b)]
    for a, b in itertools.product(all_ch, repeat=2):
        assert channels_overlap(a, b) == channels_overlap(b, a)
        if a == b:
            assert channels_overlap(a, b)
        elif a.band == b.band:
            assert not channels_overlap(a, b)
    assert {b: set(v) for b, v in CHANNEL_SETS.items()} == {2.4: {1, 6, 11}, 5.0: {38, 46, 58}, 6.0: {55, 71, 15}}


def test_link_phy_rate_composes_spectrum_ops():
    ch = Channel.from_number(6, 55)
    d = 8.0
    pl = path_loss(ch.fc_ghz, d, P)
    rx = rx_power(20, pl)
    assert rx == pytest.approx(-77.45, abs=0.01)
    expected = data_rate(select_mcs(snr(rx, noise_floor(80, 7)), PAPER), 80)
    assert link_phy_rate(ch, d, 20, P, PAPER).rate == pytest.approx(expected)


def test_dcf_exchange_hand_count():
    # MCS11, 20 MHz, 2 SS: 3900 bits/symbol -> 12294 bits need 4 symbols (64 us).
    # 67.5 backoff + 34 DIFS + (32 + 2*16) preamble + 64 + 16 SIFS + 28 ACK = 273.5 us
    r = data_rate(PAPER[11], 20)
    assert dcf_effective_rate(r) == pytest.approx(12000 / 273.5)
    assert dcf_effective_rate(r) < r
    rates = [dcf_effective_rate(data_rate(m, 80)) for m in PAPER]
    assert rates == sorted(rates)
    assert math.isclose(dcf_effective_rate(r, cw_min=0), 12000 / 206.0)
