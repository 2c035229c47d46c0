import numpy as np
import pytest

from piezogreen.decoupled import poisson_kernel
from piezogreen.greens import (
    UPPER_LABELS, GreensFunction, eval_batch, eval_cartesian, eval_cylindrical, thread_count,
    upper_triangle,
)
from piezogreen.kernels import KernelSet
from piezogreen.oracle import OriginSingularity, integrate, scaled_deviation
from piezogreen.spectrum import DegenerateSpectrum, solve_spectrum

from conftest import random_material, random_points, rot_z

PARITY = np.diag([1.0, 1.0, -1.0, -1.0])


def textbook(m, point):
    """Root sum with the explicit 1/rho^2 and 1/rho^4 factors, no rewriting."""
    spec = solve_spectrum(m)
    k = KernelSet(m)
    a = spec.roots
    energy = 4.0 * np.pi * m.c66 * spec.coeffA * spec.denominators()
    x, y, z = point
    rho2 = x * x + y * y
    rho4 = rho2 * rho2
    lp, lb, lc, lc4, l4 = (f(-a) for f in (k.Lambda_bperp, k.Lambda_b, k.Lambda_c, k.Lambda_c4, k.Lambda_4))
    gb, gbc, gb4 = k.Gamma_b(-a), k.Gamma_bc(-a), k.Gamma_b4(-a)
    g = np.empty((4, 4, 4), dtype=complex)
    g[0, 0] = lp - gb * ((x * x - y * y) * z * z - y * y * a * rho2) / rho4
    g[1, 1] = lp + gb * ((x * x - y * y) * z * z + x * x * a * rho2) / rho4
    g[0, 1] = g[1, 0] = -gb * x * y * (a * rho2 + 2.0 * z * z) / rho4
    g[0, 2] = g[2, 0] = -gbc * x * z / rho2
    g[1, 2] = g[2, 1] = -gbc * y * z / rho2
    g[0, 3] = g[3, 0] = -gb4 * x * z / rho2
    g[1, 3] = g[3, 1] = -gb4 * y * z / rho2
    g[2, 2] = lc
    g[2, 3] = g[3, 2] = lc4
    g[3, 3] = l4
    big_r = np.sqrt(a * rho2 + z * z + 0j)
    return (g / (energy * big_r)).sum(-1).real


@pytest.mark.parametrize("name", ["zno", "pzt4"])
def test_matches_quadrature(name, request):
    m = request.getfixturevalue(name)
    green = GreensFunction(m)
    rng = np.random.default_rng(7)
    pts = random_points(rng, 30)
    g = green.evaluate(pts)
    for gi, p in zip(g, pts):
        assert scaled_deviation(gi, integrate(green.cartesian, p, 512)) < 1e-11


def test_random_materials_match_quadrature(rng):
    for _ in range(30):
        green = GreensFunction(random_material(rng))
        p = random_points(rng, 1)[0]
        assert scaled_deviation(green(p), integrate(green.cartesian, p, 1024)) < 1e-10


def test_matches_textbook_sum_off_axis(rng):
    for _ in range(30):
        m = random_material(rng)
        green = GreensFunction(m)
        for p in random_points(rng, 5):
            if np.hypot(p[0], p[1]) < 0.1 * np.linalg.norm(p):
                continue
            assert scaled_deviation(green(p), textbook(m, p)) < 1e-10


def test_cylindrical_assembly(green, rng):
    for p in random_points(rng, 20):
        rho, phi = np.hypot(p[0], p[1]), np.arctan2(p[1], p[0])
        cyl = green.cylindrical(rho, p[2])
        assert scaled_deviation(cyl.assemble(phi), green(p)) < 1e-14


def test_cylindrical_on_axis(green):
    cyl = green.cylindrical(0.0, 1.3)
    assert cyl.G_rhoz == 0.0 and cyl.G_rho4 == 0.0
    # transverse isotropy on the axis
    assert cyl.G_phiphi == pytest.approx(cyl.G_rhorho, rel=1e-13)


def test_cylindrical_rejects(green):
    with pytest.raises(ValueError):
        green.cylindrical(-1.0, 0.5)
    with pytest.raises(OriginSingularity):
        green.cylindrical(0.0, 0.0)


def test_symmetry_and_evenness(green, rng):
    pts = random_points(rng, 50)
    g = green.evaluate(pts)
    assert np.array_equal(g, np.swapaxes(g, 1, 2))
    assert np.array_equal(green.evaluate(-pts), g)


def test_homogeneity(green, rng):
    pts = random_points(rng, 50)
    for lam in (1e-3, 0.37, 42.0):
        dev = scaled_deviation(lam * green.evaluate(lam * pts), green.evaluate(pts))
        assert dev < 1e-13


def test_rotation_about_axis(green, rng):
    pts = random_points(rng, 50)
    g = green.evaluate(pts)
    for phi in rng.uniform(0, 2 * np.pi, size=5):
        q = np.eye(4)
        q[:3, :3] = rot_z(phi)
        rotated = green.evaluate(pts @ q[:3, :3].T)
        assert scaled_deviation(rotated, q @ g @ q.T) < 1e-13


def test_reflection_parity(green, rng):
    pts = random_points(rng, 50)
    flipped = pts * [1.0, 1.0, -1.0]
    assert scaled_deviation(green.evaluate(flipped), PARITY @ green.evaluate(pts) @ PARITY) < 1e-13


def test_decoupled_limit(rng):
    m = random_material(rng, coupled=False)
    pts = random_points(rng, 20)
    g = GreensFunction(m).evaluate(pts)
    assert not np.any(g[:, :3, 3])
    assert np.allclose(g[:, 3, 3], poisson_kernel(m.eta11, m.eta33, pts), rtol=1e-13, atol=0)


def test_threaded_batch_is_bitwise_identical(green, monkeypatch):
    pts = np.random.default_rng(3).uniform(-2, 2, size=(100_000, 3))
    serial = green.evaluate(pts, threads=1)
    assert np.array_equal(green.evaluate(pts, threads=4), serial)
    monkeypatch.setenv("PIEZOGREEN_THREADS", "3")
    assert np.array_equal(green.evaluate(pts), serial)
    # results do not depend on the position inside the batch
    assert np.array_equal(green.evaluate(pts[4090:4100]), serial[4090:4100])


def test_duplicate_points(green):
    pts = np.array([[0.1, 0.2, 0.3]] * 3 + [[1.0, 0.0, 0.0]])
    g = green.evaluate(pts)
    assert np.array_equal(g[0], g[2])


def test_empty_batch(green):
    assert green.evaluate(np.zeros((0, 3))).shape == (0, 4, 4)


def test_origin_reports_index(green):
    pts = np.array([[1.0, 0, 0], [0.5, 0.5, 0.5], [0.0, 0.0, 0.0]])
    with pytest.raises(OriginSingularity, match="point 2"):
        green.evaluate(pts)


def test_non_finite_point(green):
    with pytest.raises(ValueError):
        green.evaluate([[np.nan, 0.0, 1.0]])


def test_near_axis_uses_quadrature(green):
    p = np.array([3e-5, 0.0, 1.0])
    assert np.array_equal(green(p), integrate(green.cartesian, p, green.oracle_nodes))
    off = GreensFunction(green.moduli, eps_axis=0.0)
    assert scaled_deviation(off(p), green(p)) < 1e-12


def test_exactly_on_axis_closed_form(green):
    closed = GreensFunction(green.moduli, eps_axis=0.0)
    for z in (1.0, -2.0):
        p = np.array([0.0, 0.0, z])
        assert scaled_deviation(closed(p), integrate(green.cartesian, p)) < 1e-12


def test_in_plane_points(green, rng):
    for phi in rng.uniform(0, 2 * np.pi, size=5):
        p = np.array([np.cos(phi), np.sin(phi), 0.0])
        assert scaled_deviation(green(p), integrate(green.cartesian, p, 512)) < 1e-12


def test_degenerate_material_rejected(zno):
    from dataclasses import replace

    m = replace(zno.decoupled(), eta33=zno.eta11 * zno.c44 / zno.c66)
    with pytest.raises(DegenerateSpectrum):
        GreensFunction(m)
    spec = solve_spectrum(m, min_gap=0.0)
    with pytest.raises(DegenerateSpectrum):
        GreensFunction(m, spec)


def test_call_forms(green):
    assert np.array_equal(green(0.1, 0.2, 0.3), green([0.1, 0.2, 0.3]))


def test_functional_api(zno, green):
    spec = solve_spectrum(zno)
    p = [0.4, -0.1, 0.7]
    assert np.array_equal(eval_cartesian(zno, spec, *p), green(p))
    assert np.array_equal(eval_batch(zno, None, [p])[0], green(p))
    assert eval_cylindrical(zno, spec, 0.5, 0.2) == green.cylindrical(0.5, 0.2)


def test_upper_triangle_labels(green):
    g = green([0.3, 0.2, 0.1])
    vals = upper_triangle(g)
    assert UPPER_LABELS[2] == "G13" and vals[2] == g[0, 2]
    assert UPPER_LABELS[-1] == "G44" and vals[-1] == g[3, 3]
    assert len(UPPER_LABELS) == 10


@pytest.mark.parametrize("raw, expected", [("2", 2), ("", None), ("0", None)])
def test_thread_count(raw, expected, monkeypatch):
    import os

    monkeypatch.setenv("PIEZOGREEN_THREADS", raw)
    assert thread_count() == (expected or os.cpu_count() or 1)


@pytest.mark.parametrize("raw", ["-1", "many"])
def test_thread_count_invalid(raw, monkeypatch):
    monkeypatch.setenv("PIEZOGREEN_THREADS", raw)
    with pytest.raises(ValueError):
        thread_count()
