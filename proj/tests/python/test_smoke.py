import numpy as np
import pytest

import whitney


def test_set_and_decomposition():
    s = whitney.FractalSet(4, 2, min_inv_eps=4)
    assert len(s) == 37
    assert s.denom == 16
    pts = s.points()
    assert pts.shape == (37, 2)
    assert sorted(pts[pts[:, 1] > 0, 0] * 16) == [-5, -3, 3, 5]
    d = whitney.CzDecomposition(s)
    g = whitney.geometry(d)
    assert g["passed"]
    assert g["max_neighbor_side_ratio"] <= 2


def test_bad_parameters():
    with pytest.raises(whitney.ConfigError):
        whitney.FractalSet(2, 1, min_inv_eps=2)
    with pytest.raises(whitney.Error):
        whitney.level_weights(4, 2, 2.5)


def test_extension_interpolates_and_reproduces_affine():
    s = whitney.FractalSet(4, 2, min_inv_eps=4)
    d = whitney.CzDecomposition(s)
    rng = np.random.default_rng(1)
    f = rng.uniform(-1, 1, len(s))
    ext = whitney.extend(f, d, 1.5)
    assert ext.interpolation_error(f) < 1e-9
    assert np.allclose(ext.values(s.points()), f, atol=1e-9)
    pts = s.points()
    affine = 0.5 - 0.25 * pts[:, 0] + 2.0 * pts[:, 1]
    a = whitney.extend(affine, d, 1.5)
    assert a.seminorm(1.5) <= 1e-10
    value, grad, hess = a.evaluate(0.3, 0.7)
    assert value == pytest.approx(0.5 - 0.075 + 1.4)
    assert np.allclose(grad, [-0.25, 2.0])
    assert np.abs(hess).max() < 1e-10


def test_tree_hand_case():
    sol = whitney.minimize_tree(2, 2.0, [1.0, 1.0], [0.0, 0.0, 1.0, 1.0])
    assert sol.values[:3] == pytest.approx([0.5, 1 / 6, 5 / 6], abs=1e-10)
    assert whitney.level_weights(4, 2, 1.5) == pytest.approx([0.25, 0.25])


def test_oracle_dominance():
    s = whitney.FractalSet(4, 1, min_inv_eps=4)
    f, g_norm = whitney.bump_data(s, 1, 1.5)
    assert g_norm > 0
    energy, values = whitney.minimal_grid_energy(s, np.asarray(f), 1.5, 1)
    assert values.shape == (33 * 33,)
    assert 0 <= energy


def test_verify():
    report = whitney.verify(N=8, L=1, p=1.5)
    assert report["passed"]
    assert any(c["name"] == "partition_of_unity" for c in report["checks"])
