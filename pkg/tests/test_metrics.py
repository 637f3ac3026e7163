import numpy as np
import pytest

import maskadv as ma
from maskadv.errors import InputError

from ciede2000_reference import REFERENCE_PAIRS


def test_lp_norms_zero():
    assert ma.lp_norms(np.zeros(5)) == (0, 0.0, 0.0, 0.0)


def test_lp_norms_hand_case():
    l0, l1, l2, linf = ma.lp_norms(np.array([0.3, -0.4]))
    assert l0 == 2
    assert abs(l1 - 0.7) < 1e-15
    assert abs(l2 - 0.5) < 1e-15
    assert abs(linf - 0.4) < 1e-15


def test_lp_norms_singleton():
    l0, l1, l2, linf = ma.lp_norms(np.array([-0.25]))
    assert (l0, l1, l2, linf) == (1, 0.25, 0.25, 0.25)


def test_lp_norms_l0_threshold():
    l0, _, _, _ = ma.lp_norms(np.array([1e-13, 1e-11, 0.5]))
    assert l0 == 2


def test_norm_ordering_property():
    rng = np.random.default_rng(0)
    for _ in range(200):
        d = rng.normal(0, 1, rng.integers(1, 50))
        _, l1, l2, linf = ma.lp_norms(d)
        assert linf <= l2 + 1e-12
        assert l2 <= l1 + 1e-12


def test_ssim_self_is_one():
    rng = np.random.default_rng(1)
    for shape in [(8, 8), (6, 6, 1), (5, 5, 3)]:
        x = rng.uniform(0, 1, shape)
        assert ma.ssim(x, x) == 1.0


def test_ssim_constant_images_luminance_closed_form():
    a, b, L = 0.3, 0.6, 1.0
    c1 = (0.01 * L) ** 2
    expected = (2 * a * b + c1) / (a * a + b * b + c1)
    got = ma.ssim(np.full((7, 7), a), np.full((7, 7), b), dynamic_range=L)
    assert abs(got - expected) < 1e-12


def test_ssim_symmetry_and_range():
    rng = np.random.default_rng(2)
    for _ in range(20):
        x = rng.uniform(0, 1, (6, 6, 3))
        y = rng.uniform(0, 1, (6, 6, 3))
        s = ma.ssim(x, y)
        assert abs(s - ma.ssim(y, x)) < 1e-12
        assert -1.0 <= s <= 1.0


def test_ssim_shape_mismatch():
    with pytest.raises(InputError):
        ma.ssim(np.zeros((3, 3)), np.zeros((4, 4)))


def test_ciede2000_reference_pairs():
    for l1, a1, b1, l2, a2, b2, expected in REFERENCE_PAIRS:
        got = float(ma.delta_e_ciede2000(np.array([l1, a1, b1]),
                                         np.array([l2, a2, b2])))
        assert abs(got - expected) < 1e-4, (l1, a1, b1, l2, a2, b2)


def test_ciede2000_symmetric_pairs():
    # the published set encodes symmetry in pairs 7/8; check it generally
    rng = np.random.default_rng(3)
    for _ in range(20):
        p = rng.uniform([0, -60, -60], [100, 60, 60])
        q = rng.uniform([0, -60, -60], [100, 60, 60])
        assert abs(float(ma.delta_e_ciede2000(p, q))
                   - float(ma.delta_e_ciede2000(q, p))) < 1e-10


def test_ciede2000_identity_and_errors():
    rng = np.random.default_rng(4)
    x = rng.uniform(0, 1, (5, 5, 3))
    assert ma.ciede2000(x, x) == 0.0
    with pytest.raises(InputError):
        ma.ciede2000(x[:, :, :1], x[:, :, :1])
    with pytest.raises(InputError):
        ma.ciede2000(x, x[:-1])


def test_ciede2000_nonnegative_and_monotone_single_pixel():
    rng = np.random.default_rng(5)
    x = rng.uniform(0.2, 0.8, (4, 4, 3))
    previous = 0.0
    for step in np.linspace(0.0, 0.2, 8):
        y = x.copy()
        y[2, 2] += step
        d = ma.ciede2000(x, np.clip(y, 0, 1))
        assert d >= previous - 1e-9
        previous = d
    assert previous > 0


def test_srgb_to_lab_known_points():
    lab = ma.srgb_to_lab(np.array([[1.0, 1.0, 1.0], [0.0, 0.0, 0.0]]))
    assert np.allclose(lab[0], [100.0, 0.0, 0.0], atol=0.01)
    assert np.allclose(lab[1], [0.0, 0.0, 0.0], atol=0.01)
