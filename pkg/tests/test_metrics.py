import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dwp2m.metrics import (REPORT_COLUMNS, EnergyConstants, LayerCounts, RunSummary, address_bits, energy,
                           parse_report_csv, reference_profile, reference_savings, report_csv, report_text)

K = EnergyConstants()


def test_constants_validation():
    with pytest.raises(ValueError):
        EnergyConstants(e_mem=0.0)
    with pytest.raises(ValueError):
        EnergyConstants(e_ac=5.0, e_mac=3.0)
    with pytest.raises(ValueError):
        LayerCounts(-1, 1.0)


def test_address_bits():
    assert address_bits(34, 34, 2) == 13
    assert address_bits(16, 16, 8) == 11
    assert address_bits(1, 1, 1) == 0


def test_spreadsheet_recomputation():
    layers = [LayerCounts(100, 12, 50), LayerCounts(40, 10, 20, weight_fetch_per_op=0.5)]
    r = energy(layers, K, bandwidth_ratio=0.5, bits_in=13, bits_out=11)
    l1 = 100 * 12 * 3.2 + (1200 + 50) * 2.5
    rest = 400 * 0.1 + (200 + 20) * 2.5
    assert r.baseline_energy == pytest.approx(l1 + 100 * 13 * 21.5 + rest, rel=1e-15)
    assert r.p2m_energy == pytest.approx(100 * 0.5 * 11 * 21.5 + rest, rel=1e-15)
    assert r.spikes == (100, 40) and r.mem_accesses == (1250, 220)
    assert r.savings == pytest.approx(1 - r.p2m_energy / r.baseline_energy)


def test_zero_spikes_memory_floor():
    r = energy([LayerCounts(0, 12, 50), LayerCounts(0, 10, 20)], K)
    assert r.baseline_energy == pytest.approx(70 * 2.5)
    assert r.p2m_energy == pytest.approx(20 * 2.5)
    assert 0 < r.savings < 1


def test_missing_counts():
    with pytest.raises(ValueError):
        energy([], K)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10**5), st.floats(1, 500), st.integers(0, 10**5), st.integers(0, 10**5),
       st.floats(0, 1), st.floats(0, 1))
def test_savings_positive_and_monotone(n1, fan, mem, n2, r_lo, r_hi):
    layers = [LayerCounts(n1, fan, mem), LayerCounts(n2, 64, 100)]
    lo, hi = sorted((r_lo, r_hi))
    a, b = energy(layers, K, lo), energy(layers, K, hi)
    assert a.p2m_energy <= b.p2m_energy
    assert b.savings > 0


def test_reference_profile_shares():
    base = energy(reference_profile(), K, 1.0)
    share = base.breakdown["layer1"] / base.baseline_energy
    assert share == pytest.approx(0.40, abs=0.01)
    assert base.savings == pytest.approx(share, abs=1e-12)


def test_report_roundtrip_and_order():
    runs = [RunSummary("b", 10, 4, 0.4, 100.0, 50.0, 50.0, 0.9), RunSummary("a", 3, 1)]
    text = report_csv(runs)
    assert text.splitlines()[0] == ",".join(REPORT_COLUMNS)
    back = parse_report_csv(text)
    assert [r.name for r in back] == ["a", "b"]
    assert back[1] == runs[0] and back[0] == runs[1]
    assert report_csv(back) == text


def test_report_empty_and_text():
    assert report_csv([]) == ",".join(REPORT_COLUMNS) + "\n"
    assert len(report_text([]).splitlines()) == 1
    t = report_text([RunSummary("x", 10, 5, 0.5, 10.0, 5.0, 45.4123, 0.5)])
    assert "45.4%" in t
