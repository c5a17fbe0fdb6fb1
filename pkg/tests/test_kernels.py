import os
import subprocess
import sys

import numpy as np
import pytest

from nonsubdelay import kernels

BACKENDS = kernels.available_backends()
needs_both = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")


def test_python_backend_always_available():
    assert "python" in BACKENDS
    assert kernels.BACKEND in BACKENDS


def test_env_var_forces_fallback():
    env = dict(os.environ, NONSUBDELAY_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from nonsubdelay import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_chain_decompose_contract(name):
    k = BACKENDS[name]
    perm, lam, masks = k.chain_decompose(np.array([0.9, 0.2, 0.5]))
    assert list(perm) == [0, 2, 1]
    np.testing.assert_allclose(lam, [0.1, 0.4, 0.3, 0.2], atol=1e-15)
    assert list(masks) == [0, 1, 5, 7]


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_draw_index_skips_zero_mass(name):
    k = BACKENDS[name]
    probs = np.array([0.5, 0.0, 0.5])
    assert k.draw_index(probs, 0.5) == 2
    assert k.draw_index(probs, 0.0) == 0
    assert k.draw_index(probs, 0.999999) == 2


@needs_both
def test_backends_agree_bitwise(rng):
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    for _ in range(300):
        n = int(rng.integers(1, 12))
        x = rng.random(n)
        if rng.random() < 0.3:
            x = np.round(x * 3) / 3
        a, b = py.chain_decompose(x), cy.chain_decompose(x)
        for u, v in zip(a, b):
            np.testing.assert_array_equal(u, v)
        perm, lam, _ = a
        mu = float(rng.random() * 0.98 + 0.01)
        p = py.mixture_probs(lam, mu)
        np.testing.assert_array_equal(p, cy.mixture_probs(lam, mu))
        u = float(rng.random())
        assert py.draw_index(p, u) == cy.draw_index(p, u)
        i = int(rng.integers(0, n + 1))
        val = float(rng.normal())
        np.testing.assert_array_equal(py.one_point_estimate(perm, p, i, val), cy.one_point_estimate(perm, p, i, val))
        vals = np.concatenate([[0.0], rng.normal(size=n)])
        np.testing.assert_array_equal(py.chain_gradient(perm, vals), cy.chain_gradient(perm, vals))
        g = rng.normal(size=n)
        np.testing.assert_array_equal(py.project_step(x, g, 0.3), cy.project_step(x, g, 0.3))


@needs_both
def test_gain_tables_agree(rng):
    T, s, n = 4, 12, 7
    A = rng.normal(size=(T, s, n))
    y = rng.normal(size=(T, s))
    gram = np.einsum("tsi,tsj->tij", A, A)
    rhs = np.einsum("tsi,ts->ti", A, y)
    vp, dp = BACKENDS["python"].subset_gain_table(gram, rhs)
    vc, dc = BACKENDS["cython"].subset_gain_table(gram, rhs)
    np.testing.assert_array_equal(dp, dc)
    np.testing.assert_allclose(vp, vc, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_gain_table_matches_lstsq(name, rng):
    s, n = 15, 6
    A = rng.normal(size=(s, n))
    y = rng.normal(size=s)
    vals, deficient = BACKENDS[name].subset_gain_table((A.T @ A)[None], (A.T @ y)[None])
    assert not deficient.any()
    for m in range(1 << n):
        cols = [i for i in range(n) if m >> i & 1]
        if cols:
            coef = np.linalg.lstsq(A[:, cols], y, rcond=None)[0]
            want = 0.5 * y @ y - 0.5 * np.sum((A[:, cols] @ coef - y) ** 2)
        else:
            want = 0.0
        assert vals[0, m] == pytest.approx(want, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_gain_table_flags_collinear_columns(name):
    A = np.array([[1.0, 2.0, 0.0], [1.0, 2.0, 1.0], [0.0, 0.0, 1.0]])
    y = np.array([1.0, 2.0, 3.0])
    _, deficient = BACKENDS[name].subset_gain_table((A.T @ A)[None], (A.T @ y)[None])
    # columns 1 and 2 are parallel: every mask holding both is flagged
    assert [m for m in range(8) if deficient[0, m]] == [3, 7]
