import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from amc_mimo.circuits import OAModel
from amc_mimo.crossbar import DeviceModel
from amc_mimo.errors import DivergenceError, InvalidInputError, SingularMatrixError
from amc_mimo.modem import qam16_modulate
from amc_mimo.precoder import zf_amc, zf_digital, zf_neumann
from amc_mimo.streams import stream


def instance(seed, K=16, M=128):
    H = (stream(seed, "h").standard_normal((K, M)) + 1j * stream(seed, "h-im").standard_normal((K, M))) / np.sqrt(2)
    s = qam16_modulate(stream(seed, "bits").integers(0, 2, 4 * K))
    return H, s


def rel_err(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


# digital

def test_digital_hand_example():
    r = zf_digital(np.array([[1.0, 1.0]]), [1.0])
    np.testing.assert_allclose(r.x, [1 / np.sqrt(2)] * 2)
    assert r.alpha == pytest.approx(1 / np.sqrt(2))
    assert (np.array([[1.0, 1.0]]) @ r.x)[0] == pytest.approx(np.sqrt(2))


def test_digital_identity_channel():
    s = np.array([1 + 1j, -3 + 1j, 1 - 3j]) / np.sqrt(10)
    r = zf_digital(np.eye(3), s)
    np.testing.assert_allclose(r.x, s / np.linalg.norm(s), atol=1e-15)


def test_digital_rank_deficient():
    with pytest.raises(SingularMatrixError):
        zf_digital(np.ones((2, 4)), [1, 1])


def test_digital_rejects_bad_shapes():
    with pytest.raises(InvalidInputError):
        zf_digital(np.ones((2, 4)), [1, 1, 1])


@pytest.mark.property
@given(st.integers(0, 10_000))
def test_digital_interference_cancellation(seed):
    H, s = instance(seed)
    r = zf_digital(H, s)
    assert np.linalg.norm(r.x) == pytest.approx(1.0, abs=1e-9)
    assert r.alpha > 0
    assert np.abs(H @ r.x - s / r.alpha).max() <= 1e-9


# AMC

def test_amc_ideal_matches_digital():
    for seed in range(10):
        H, s = instance(seed)
        a = zf_amc(H, s, DeviceModel.ideal(), OAModel.ideal())
        assert rel_err(a.x, zf_digital(H, s).x) <= 1e-9


def _amc_errors(device, n, oa=OAModel()):
    out = []
    for seed in range(n):
        H, s = instance(seed)
        a = zf_amc(H, s, device, oa, rng=stream(seed, "device"))
        out.append(rel_err(a.x, zf_digital(H, s).x))
    return np.array(out)


def test_amc_default_median_error():
    assert np.median(_amc_errors(DeviceModel(), 100)) <= 0.05


def test_amc_default_voltages_within_rails():
    for seed in range(20):
        H, s = instance(seed)
        a = zf_amc(H, s, rng=stream(seed, "device"))
        d = a.diagnostics
        assert not d["inv_saturated"] and not d["mvm_saturated"]
        assert max(d["v_dac_max"], d["v_inv_max"], d["v_mvm_max"]) <= 0.6
        assert np.linalg.norm(a.x) == pytest.approx(1.0, abs=1e-9)


def test_amc_error_shrinks_with_device_quality():
    n = 50
    noisy = np.median(_amc_errors(DeviceModel.ideal(sigma_prog=0.15), n))
    less = np.median(_amc_errors(DeviceModel.ideal(sigma_prog=0.05), n))
    clean = np.median(_amc_errors(DeviceModel.ideal(), n))
    assert noisy >= less >= clean
    quant = np.median(_amc_errors(DeviceModel(sigma_prog=0.0), n))
    assert quant >= clean


def test_amc_transient_mode_reports_settling():
    H, s = instance(0)
    a = zf_amc(H, s, mode="transient", rng=stream(0, "device"), t_end_ns=60.0)
    assert a.diagnostics["inv_settled_ns"] is not None
    b = zf_amc(H, s, mode="static", rng=stream(0, "device"))
    assert rel_err(a.x, b.x) < 1e-2


def test_amc_bad_mode():
    H, s = instance(0)
    with pytest.raises(InvalidInputError):
        zf_amc(H, s, mode="spice")


# Neumann

def test_neumann_diagonal_exact():
    H = np.array([[2.0, 0, 0], [0, 1.0, 0]])
    s = np.array([1.0 + 1j, -1.0])
    np.testing.assert_allclose(zf_neumann(H, s, 1).x, zf_digital(H, s).x, atol=1e-15)


def test_neumann_error_decreasing():
    H, s = instance(2)
    ref = zf_digital(H, s).x
    errs = [rel_err(zf_neumann(H, s, n).x, ref) for n in (1, 2, 3, 4)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_neumann_converges():
    H, s = instance(3, K=4, M=512)
    assert rel_err(zf_neumann(H, s, 20).x, zf_digital(H, s).x) <= 1e-6


def test_neumann_divergence_detected():
    rng = np.random.default_rng(0)
    H = np.ones((3, 4)) + 0.01 * rng.standard_normal((3, 4))
    with pytest.raises(DivergenceError):
        zf_neumann(H, np.ones(3), 10)


def test_neumann_rejects_zero_terms():
    H, s = instance(0)
    with pytest.raises(InvalidInputError):
        zf_neumann(H, s, 0)
