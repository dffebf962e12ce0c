import numpy as np
import pytest
import scipy.linalg as sla
from fractions import Fraction
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from unifact import linalg as la
from unifact.errors import OutOfRadius, SingularMatrix
from unifact.exact import ExactComplex

from conftest import random_sl2

finite = st.floats(-3, 3, allow_nan=False)
mats = arrays(np.float64, (2, 2, 2), elements=finite).map(lambda a: a[0] + 1j * a[1])


def test_mat2_exact_product_and_inverse():
    A = la.Mat2.from_rows([[2, 1], [1, 1]])
    assert A.is_exact and A.det() == 1
    assert A @ A.inverse() == la.Mat2.identity(True)
    L = la.ElementaryFactor("L", Fraction(1, 3))
    assert (L.matrix() @ L.inverse().matrix()) == la.Mat2.identity(True)
    C = la.Mat2.from_rows([[ExactComplex(0, 1), 0], [0, ExactComplex(0, -1)]])
    assert C.det() == 1


def test_inverse_singular():
    with pytest.raises(SingularMatrix):
        la.inverse(np.zeros((2, 2)))


@given(mats)
def test_op_norm_matches_svd(A):
    assert la.op_norm(A) == pytest.approx(np.linalg.norm(A, 2), rel=1e-9, abs=1e-12)


@given(mats)
def test_expm_matches_scipy(A):
    assert np.allclose(la.expm(A), sla.expm(A), rtol=1e-10, atol=1e-10)


def test_log_near_identity_roundtrip(rng):
    X = 0.3 * (rng.normal(size=(200, 2, 2)) + 1j * rng.normal(size=(200, 2, 2)))
    X /= np.maximum(la.op_norm(X), 1.0)[:, None, None] * 2.5
    M = la.eye_like((200,)) + X
    L = la.log_near_identity(M)
    assert np.abs(la.expm(L) - M).max() < 1e-13
    for k in range(0, 200, 40):
        assert np.allclose(L[k], sla.logm(M[k]), atol=1e-12)
    with pytest.raises(OutOfRadius):
        la.log_near_identity(2 * la.eye_like(()))


def test_logm_sl2_far_from_identity(rng):
    A = random_sl2(rng, 300)
    keep = np.abs(la.trace(A) / 2 + 1) > 0.05
    A = A[keep]
    L = la.logm_sl2(A)
    assert np.abs(la.expm(L) - A).max() < 1e-10
    assert np.abs(la.trace(L)).max() < 1e-10
    with pytest.raises(OutOfRadius):
        la.logm_sl2(-la.eye_like(()))


def test_qr_su2(rng):
    A = random_sl2(rng, 500)
    Q, R = la.qr_su2(A)
    assert np.abs(Q @ R - A).max() < 1e-12
    assert la.is_su2(Q, 1e-12).all()
    assert np.all(R[..., 1, 0] == 0)
    assert np.all(R[..., 0, 0].imag == 0) and np.all(R[..., 0, 0].real > 0)


def test_predicates():
    N = la.from_entries(0, 3.0, 0, 0)
    assert la.is_unipotent(la.eye_like(()) + N)
    assert la.is_sl2(la.upper(5.0))
    assert not la.is_su2(la.upper(5.0))


def test_logm_sl2_far_unipotent():
    M = la.upper(np.array([3.0, -5.0 + 1j]))
    L = la.logm_sl2(M)
    assert np.allclose(L, M - np.eye(2), atol=1e-14)
    assert np.allclose(la.expm(L), M, atol=1e-13)
    with pytest.raises(OutOfRadius):
        la.logm_sl2(-la.upper(np.array([2.0])))
