import math

import numpy as np
import pytest

from extdg.basis import laguerre_all
from extdg.quadrature import (RootFindError, diff_matrix, gauss_legendre_rule,
                              laguerre_rule)


def test_gauss_legendre_one_and_two_points():
    r1 = gauss_legendre_rule(1)
    assert r1.nodes == pytest.approx([0.0])
    assert r1.weights == pytest.approx([2.0])
    r2 = gauss_legendre_rule(2)
    assert np.allclose(r2.nodes, [-1 / np.sqrt(3), 1 / np.sqrt(3)])
    assert np.allclose(r2.weights, [1.0, 1.0])


@pytest.mark.parametrize("n", [1, 2, 3, 7, 12, 30])
def test_gauss_legendre_exactness_and_symmetry(n):
    rule = gauss_legendre_rule(n)
    assert rule.weights.sum() == pytest.approx(2.0, rel=1e-14)
    assert np.allclose(rule.nodes, -rule.nodes[::-1])
    assert np.all(np.diff(rule.nodes) > 0)
    # exact for monomials up to degree 2n-1
    for k in range(2 * n):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        approx = np.sum(rule.weights * rule.nodes**k)
        assert approx == pytest.approx(exact, abs=1e-13)


def test_gauss_legendre_against_numpy():
    x, w = np.polynomial.legendre.leggauss(25)
    rule = gauss_legendre_rule(25)
    assert np.abs(rule.nodes - x).max() < 1e-13
    assert np.abs(rule.weights - w).max() < 1e-13


def test_gauss_legendre_rejects_zero_nodes():
    with pytest.raises(ValueError):
        gauss_legendre_rule(0)


def test_glr_small_rule_by_hand():
    # dL_2/dx = x - 2 has the single root 2
    rule = laguerre_rule("GLR", 1.0, 1)
    assert rule.nodes == pytest.approx([0.0, 2.0])


def test_gl_smallest_rule_by_hand():
    # L_1 = 1 - x has root 1
    rule = laguerre_rule("GL", 1.0, 0)
    assert rule.nodes == pytest.approx([1.0])


@pytest.mark.parametrize("family", ["GL", "GLR"])
@pytest.mark.parametrize("beta,M", [(1.0, 5), (3.0, 12), (0.25, 20), (1.0, 60)])
def test_laguerre_rule_structure(family, beta, M):
    rule = laguerre_rule(family, beta, M)
    assert rule.n == M + 1
    assert np.all(np.diff(rule.nodes) > 0)
    assert np.all(rule.weights > 0)
    if family == "GLR":
        assert rule.nodes[0] == 0.0
    else:
        assert rule.nodes[0] > 0.0


@pytest.mark.parametrize("beta,M", [(1.0, 4), (2.5, 9), (0.5, 15)])
def test_modified_glr_exactness(beta, M):
    # sum w F(x) == int_0^inf F for F = exp(-beta x) * poly(deg <= 2M)
    rule = laguerre_rule("GLR", beta, M, modified=True)
    for k in range(2 * M + 1):
        exact = math.factorial(k) / beta ** (k + 1)
        approx = np.sum(rule.weights * np.exp(-beta * rule.nodes) * rule.nodes**k)
        assert approx == pytest.approx(exact, rel=1e-12)


@pytest.mark.parametrize("beta,M", [(1.0, 4), (2.0, 11)])
def test_modified_gl_exactness(beta, M):
    rule = laguerre_rule("GL", beta, M, modified=True)
    for k in range(2 * M + 2):
        exact = math.factorial(k) / beta ** (k + 1)
        approx = np.sum(rule.weights * np.exp(-beta * rule.nodes) * rule.nodes**k)
        assert approx == pytest.approx(exact, rel=1e-12)


def test_plain_weights_match_laguerre_measure():
    beta, M = 1.5, 7
    rule = laguerre_rule("GLR", beta, M, modified=False)
    for k in [0, 1, 5]:
        exact = math.factorial(k) / beta ** (k + 1)
        assert np.sum(rule.weights * rule.nodes**k) == pytest.approx(exact, rel=1e-12)


def test_unit_mass_of_first_tail_mode():
    # modified GLR applied to the squared zeroth Laguerre function gives 1/beta
    for beta in [0.5, 4.0]:
        rule = laguerre_rule("GLR", beta, 9, modified=True)
        vals, _ = laguerre_all(0, beta, rule.nodes, kind="function")
        assert np.sum(rule.weights * vals[0] ** 2) == pytest.approx(1.0 / beta, rel=1e-13)


def test_gl_interlacing():
    a = laguerre_rule("GL", 1.0, 9).nodes
    b = laguerre_rule("GL", 1.0, 10).nodes
    # nodes of the M-rule interlace those of the (M+1)-rule
    for i, x in enumerate(a):
        assert b[i] < x < b[i + 1]


def test_glr_converges_on_damped_sine():
    # int_0^inf e^{-x} sin x dx = 1/2
    rule = laguerre_rule("GLR", 1.0, 40, modified=True)
    value = np.sum(rule.weights * np.exp(-rule.nodes) * np.sin(rule.nodes))
    assert value == pytest.approx(0.5, abs=1e-8)


def test_large_rule_against_scipy():
    from scipy.special import roots_genlaguerre, roots_laguerre
    rule = laguerre_rule("GLR", 1.0, 180)
    ref = np.concatenate([[0.0], roots_genlaguerre(180, 1)[0]])
    assert np.abs(rule.nodes - ref).max() < 1e-10 * max(ref)
    rule = laguerre_rule("GL", 1.0, 120)
    ref = roots_laguerre(121)[0]
    assert np.abs(rule.nodes - ref).max() < 1e-10 * max(ref)


def test_diff_matrix_closed_form_entries():
    M, beta = 6, 2.0
    d_fun = diff_matrix("GLR", "function", beta, M).entries
    assert d_fun[0, 0] == pytest.approx(-beta * (M + 1) / 2)
    assert np.allclose(np.diag(d_fun)[1:], 0.0)
    d_pol = diff_matrix("GLR", "polynomial", beta, M).entries
    assert np.allclose(np.diag(d_pol)[1:], beta / 2)
    assert d_pol[0, 0] == pytest.approx(-beta * M / 2)


@pytest.mark.parametrize("family", ["GL", "GLR"])
@pytest.mark.parametrize("kind", ["function", "polynomial"])
@pytest.mark.parametrize("beta,M", [(1.0, 8), (2.7, 15), (0.5, 25)])
def test_diff_matrix_exactness(family, kind, beta, M):
    # D applied to nodal samples of each basis member reproduces the
    # analytic derivative at all nodes to 1e-9 relative
    dm = diff_matrix(family, kind, beta, M)
    z = laguerre_rule(family, beta, M).nodes
    vals, ders = laguerre_all(M, beta, z, kind=kind)
    scale = np.abs(ders).max()
    for k in range(M + 1):
        err = np.abs(dm.apply(vals[k]) - ders[k]).max()
        assert err < 1e-9 * max(scale, 1.0)


def test_glr_function_matrix_differentiates_the_one_interpolant():
    # applying the matrix to the ones vector must equal the analytic
    # derivative of the interpolant of 1 in the Laguerre-function space
    beta, M = 1.5, 10
    dm = diff_matrix("GLR", "function", beta, M)
    z = laguerre_rule("GLR", beta, M).nodes
    vals, ders = laguerre_all(M, beta, z, kind="function")
    coeffs = np.linalg.solve(vals.T, np.ones(M + 1))
    d_interp = coeffs @ ders
    assert np.abs(dm.apply(np.ones(M + 1)) - d_interp).max() < 1e-9


def test_invalid_family_and_kind():
    with pytest.raises(ValueError):
        laguerre_rule("radau", 1.0, 3)
    with pytest.raises(ValueError):
        diff_matrix("GLR", "spline", 1.0, 3)
    with pytest.raises(ValueError):
        laguerre_rule("GL", -1.0, 3)


def test_rules_are_immutable():
    rule = laguerre_rule("GLR", 1.0, 5)
    with pytest.raises(ValueError):
        rule.nodes[0] = 1.0
