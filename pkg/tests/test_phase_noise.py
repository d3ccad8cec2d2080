import math

import pytest
from hypothesis import given, strategies as st

from oscide.errors import DomainError
from oscide.phase_noise import NoiseParams, noise_delta, noise_spectrum, ssb_phase_noise

ANCHOR = NoiseParams(v_max=0.8, rp=300.0, c_total=100e-15, f0=25e9, temperature=300.0)


def oracle(v, rp, c, offset, temperature=300.0):
    # the carrier cancels: kT / (2 V^2 Rp C^2 dw^2)
    k = 1.380649e-23
    dw = 2 * math.pi * offset
    return 10 * math.log10(k * temperature / (2 * v * v * rp * c * c * dw * dw))


def test_anchor():
    assert ssb_phase_noise(ANCHOR, 10e6) == pytest.approx(-125.63, abs=0.01)
    assert ssb_phase_noise(ANCHOR, 10e6) == pytest.approx(oracle(0.8, 300.0, 100e-15, 10e6), abs=1e-9)


def test_independent_of_carrier():
    a = ssb_phase_noise(ANCHOR, 10e6)
    b = ssb_phase_noise(NoiseParams(0.8, 300.0, 100e-15, 5e9), 10e6)
    assert a == pytest.approx(b, abs=1e-9)


def test_slope_per_decade():
    for off in (1e6, 1e7, 1e8):
        diff = ssb_phase_noise(ANCHOR, 10 * off) - ssb_phase_noise(ANCHOR, off)
        assert abs(diff + 20.0) <= 1e-9


def test_doubling_vmax():
    p2 = NoiseParams(1.6, 300.0, 100e-15, 25e9)
    assert noise_delta(p2, ANCHOR, 10e6) == pytest.approx(-20 * math.log10(2), abs=1e-9)
    assert noise_delta(p2, ANCHOR, 10e6) == pytest.approx(-6.0206, abs=1e-4)


def test_doubling_rp():
    p2 = NoiseParams(0.8, 600.0, 100e-15, 25e9)
    assert noise_delta(p2, ANCHOR, 10e6) == pytest.approx(-3.0103, abs=1e-4)


def test_temperature():
    hot = NoiseParams(0.8, 300.0, 100e-15, 25e9, temperature=600.0)
    assert noise_delta(hot, ANCHOR, 10e6) == pytest.approx(3.0103, abs=1e-4)


@given(v=st.floats(0.01, 5.0), rp=st.floats(1.0, 1e5), c=st.floats(1e-16, 1e-10),
       k=st.floats(1.001, 100.0), which=st.sampled_from(["v_max", "rp", "c_total"]))
def test_monotone_decrease(v, rp, c, k, which):
    base = dict(v_max=v, rp=rp, c_total=c, f0=25e9)
    bigger = dict(base)
    bigger[which] *= k
    assert ssb_phase_noise(NoiseParams(**bigger), 1e7) < ssb_phase_noise(NoiseParams(**base), 1e7)


@given(off=st.floats(1e3, 1e10))
def test_matches_oracle(off):
    assert ssb_phase_noise(ANCHOR, off) == pytest.approx(oracle(0.8, 300.0, 100e-15, off), abs=1e-9)


class TestErrors:
    @pytest.mark.parametrize("off", [0.0, -1.0, 25e9, 3e10])
    def test_bad_offset(self, off):
        with pytest.raises(DomainError):
            ssb_phase_noise(ANCHOR, off)

    @pytest.mark.parametrize("name", ["v_max", "rp", "c_total", "f0", "temperature"])
    def test_bad_params(self, name):
        kw = dict(v_max=0.8, rp=300.0, c_total=1e-13, f0=25e9, temperature=300.0)
        kw[name] = 0.0
        with pytest.raises(DomainError):
            NoiseParams(**kw)
        kw[name] = math.nan
        with pytest.raises(DomainError):
            NoiseParams(**kw)

    def test_spectrum_order(self):
        with pytest.raises(DomainError, match="index 2"):
            noise_spectrum(ANCHOR, [1e6, 2e6, 2e6])

    def test_spectrum_out_of_band(self):
        with pytest.raises(DomainError, match="index 1"):
            noise_spectrum(ANCHOR, [1e6, 3e10])


def test_spectrum():
    spec = noise_spectrum(ANCHOR, [1e6, 1e7, 1e8])
    assert len(spec) == 3
    assert spec.offsets == [1e6, 1e7, 1e8]
    assert spec.levels[1] == pytest.approx(-125.63, abs=0.01)
    assert spec.levels == sorted(spec.levels, reverse=True)
