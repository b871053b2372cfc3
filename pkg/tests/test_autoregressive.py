import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import signal

from bcibenchmark.errors import PreconditionError
from bcibenchmark.features.autoregressive import ARConfig, ar_poles, burg_coefficients, extract_ar, fit_ar


def _ar2(rng, n=5000):
    e = rng.standard_normal(n + 500)
    return signal.lfilter([1.0], [1.0, -0.75, 0.5], e)[500:]


def test_burg_recovers_known_process(rng):
    coeffs = burg_coefficients(_ar2(rng), 2)
    np.testing.assert_allclose(coeffs, [0.75, -0.5], atol=0.05)


def test_poles_of_first_order_model():
    np.testing.assert_allclose(ar_poles([0.5]), [0.5])
    assert ar_poles([]).size == 0


@settings(deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_burg_fits_are_stable(seed):
    x = np.random.default_rng(seed).standard_normal(128)
    poles = ar_poles(burg_coefficients(x, 8))
    assert np.all(np.abs(poles) < 1.0)


def test_flat_channel_gives_zero_coefficients(rng):
    trial = np.vstack([_ar2(rng, 256), np.zeros(256)])
    block = fit_ar(trial, 4)
    values = block.values.reshape(2, 4)
    assert np.all(values[1] == 0.0)
    assert np.any(values[0] != 0.0)
    assert block.degenerate == 1


def test_window_must_exceed_twice_the_order():
    with pytest.raises(PreconditionError):
        fit_ar(np.ones((1, 8)), 4)
    with pytest.raises(PreconditionError):
        fit_ar(np.ones((1, 8)), 0)


def test_extract_ar_layout(rng):
    block = extract_ar(rng.standard_normal((2, 64)), ARConfig(orders=(4, 8)))
    assert len(block.values) == len(block.descriptors) == 24
    first = block.descriptors[0]
    assert first.family == "ar_coef"
    assert first.param("order") == 4
    assert first.param("lag") == 1


def _from_poles(poles):
    """x_t = sum a_i x_{t-i} + e_t with the given poles; returns a and the filter denominator."""
    denominator = np.real(np.poly(poles))
    return -denominator[1:], denominator


RESONANT_POLES = [0.9 * np.exp(1j * np.pi / 5), 0.9 * np.exp(-1j * np.pi / 5),
                  0.7 * np.exp(2j * np.pi / 3), 0.7 * np.exp(-2j * np.pi / 3)]


def test_burg_recovers_a_fourth_order_process(rng):
    a, denominator = _from_poles(RESONANT_POLES)
    x = signal.lfilter([1.0], denominator, rng.standard_normal(10_500))[500:]
    np.testing.assert_allclose(burg_coefficients(x, 4), a, atol=0.05)


def test_burg_fits_stay_stable_over_many_windows(rng):
    _, denominator = _from_poles(RESONANT_POLES)
    x = signal.lfilter([1.0], denominator, rng.standard_normal(1000 * 128))
    for window in x.reshape(1000, 128):
        for order in (4, 16):
            assert np.all(np.abs(ar_poles(burg_coefficients(window, order))) < 1.0)
