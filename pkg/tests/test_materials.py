import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from piezogreen.materials import (
    KEYS, MaterialFileError, MaterialModuli, ValidationError, expand_voigt, format_material,
    load_material, parse_material, validate,
)

from conftest import random_material, rot_z


def test_all_zero_moduli_fail():
    report = validate(MaterialModuli(*([0.0] * 10)))
    assert not report.ok
    assert any("eta11 > 0" in f for f in report.failures)


def test_negative_c44_fails(zno):
    from dataclasses import replace

    report = validate(replace(zno, c44=-1.0))
    assert not report
    assert any("c44 > 0" in f for f in report.failures)


def test_non_finite_reported_not_raised(zno):
    from dataclasses import replace

    report = validate(replace(zno, c33=float("nan")))
    assert not report.ok and "c33" in str(report)


def _hexagonal_stiffness_eigenvalues(m):
    # closed-form spectrum of the hexagonal 6x6 Voigt matrix: the normal
    # block splits into the deviator c11 - c12 and a 2x2 block, the shear
    # diagonal holds c44, c44, c66
    c12 = m.c11 - 2 * m.c66
    s, t = m.c11 + c12, m.c33
    mean, half = (s + t) / 2, math.sqrt(((s - t) / 2) ** 2 + 2 * m.c13 ** 2)
    return [m.c44, m.c44, m.c66, m.c11 - c12, mean - half, mean + half]


@pytest.mark.parametrize("name", ["zno", "pzt4"])
def test_reference_materials_pass(name, request):
    m = request.getfixturevalue(name)
    assert validate(m).ok
    assert min(_hexagonal_stiffness_eigenvalues(m)) > 0
    assert np.allclose(sorted(_hexagonal_stiffness_eigenvalues(m)),
                       np.linalg.eigvalsh(m.voigt_stiffness()), rtol=1e-12)


def test_validation_matches_eigenvalue_positivity(rng):
    for _ in range(300):
        m = MaterialModuli(*(rng.uniform(-0.5, 3.0, size=5) * 1e10), 0.0, 0.0, 0.0, 1e-10, 1e-10)
        expected = min(_hexagonal_stiffness_eigenvalues(m)) > 0
        assert validate(m).ok == expected


def test_expand_voigt_entries(zno):
    cm = expand_voigt(zno)
    c, e, eta = cm.c, cm.e, cm.eta
    assert c[0, 0, 0, 0] == c[1, 1, 1, 1] == zno.c11
    assert c[2, 2, 2, 2] == zno.c33
    assert c[0, 0, 1, 1] == zno.c11 - 2 * zno.c66
    assert c[0, 0, 2, 2] == c[1, 1, 2, 2] == zno.c13
    assert c[1, 2, 1, 2] == c[0, 2, 0, 2] == zno.c44
    assert c[0, 1, 0, 1] == zno.c66
    assert e[2, 0, 0] == e[2, 1, 1] == zno.e31
    assert e[2, 2, 2] == zno.e33
    assert e[0, 0, 2] == e[1, 1, 2] == e[0, 2, 0] == zno.e15
    assert np.array_equal(eta, np.diag([zno.eta11, zno.eta11, zno.eta33]))


def test_expand_voigt_symmetries(zno):
    cm = expand_voigt(zno)
    c = cm.c
    assert np.array_equal(c, c.transpose(2, 3, 0, 1))
    assert np.array_equal(c, c.transpose(1, 0, 2, 3))
    assert np.array_equal(c, c.transpose(0, 1, 3, 2))
    assert np.array_equal(cm.e, cm.e.transpose(0, 2, 1))


def test_zero_coupling_gives_zero_piezo_tensor(zno):
    assert not expand_voigt(zno.decoupled()).e.any()


def test_c12_zero_when_c11_is_twice_c66():
    m = MaterialModuli(c11=2.0e10, c33=2.0e10, c44=0.5e10, c66=1.0e10, c13=0.3e10, eta11=1e-10, eta33=1e-10)
    assert expand_voigt(m).c[0, 0, 1, 1] == 0.0


def test_expand_rejects_invalid(zno):
    from dataclasses import replace

    with pytest.raises(ValidationError):
        expand_voigt(replace(zno, eta33=0.0))


def test_readback_is_exact(rng):
    for _ in range(50):
        m = random_material(rng)
        cm = expand_voigt(m)
        back = dict(c11=cm.c[0, 0, 0, 0], c33=cm.c[2, 2, 2, 2], c44=cm.c[1, 2, 1, 2],
                    c66=cm.c[0, 1, 0, 1], c13=cm.c[0, 0, 2, 2], e15=cm.e[0, 0, 2],
                    e31=cm.e[2, 0, 0], e33=cm.e[2, 2, 2], eta11=cm.eta[0, 0], eta33=cm.eta[2, 2])
        assert back == m.as_dict()


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2 * math.pi), st.integers(0, 2**32 - 1))
def test_transverse_isotropy(phi, seed):
    m = random_material(np.random.default_rng(seed))
    cm = expand_voigt(m)
    rot = cm.rotated(rot_z(phi))
    for a, b in ((rot.c, cm.c), (rot.e, cm.e), (rot.eta, cm.eta)):
        assert np.allclose(a, b, rtol=0, atol=1e-12 * np.abs(b).max())


def test_rotation_off_axis_changes_tensor(zno):
    cm = expand_voigt(zno)
    tilt = np.array([[1.0, 0, 0], [0, 0, -1.0], [0, 1.0, 0]])
    assert not np.allclose(cm.rotated(tilt).c, cm.c)


def test_material_file_roundtrip(tmp_path, zno):
    path = tmp_path / "m.mat"
    lines = format_material(zno).splitlines()
    path.write_text("# shuffled\n" + "\n".join(reversed(lines)) + "\n", encoding="utf-8")
    assert load_material(path) == zno


@pytest.mark.parametrize("text, msg", [
    ("c11 = 1\n", "missing keys"),
    ("c11 = 1\nc11 = 2\n", "duplicate"),
    ("c99 = 1\n", "unknown key"),
    ("c11 1e9\n", "expected"),
    ("c11 = abc\n", "non-numeric"),
])
def test_material_file_errors(text, msg):
    with pytest.raises(MaterialFileError, match=msg):
        parse_material(text)


def test_load_rejects_inadmissible(tmp_path, zno):
    text = format_material(zno).replace(f"c44 = {zno.c44!r}", "c44 = -1")
    path = tmp_path / "bad.mat"
    path.write_text(text)
    with pytest.raises(ValidationError, match="c44"):
        load_material(path)


def test_keys_order():
    assert KEYS == ("c11", "c33", "c44", "c66", "c13", "e15", "e31", "e33", "eta11", "eta33")
