"""
OC-SVM head tests
Margin, decision rule, objective and subgradients
"""

import numpy as np
import pytest

from src.errors import ArgumentError
from src.models.ocsvm import (
    ANOMALY,
    NORMAL,
    OcSvmHead,
    decide,
    margin,
    margin_input_grad,
    svm_feature_grad,
    svm_objective,
    svm_param_grads,
)
from src.models.rff import RffMap, map, sample_rff
from tests.gradcheck import FD_TOLERANCE, numeric_grad, rel_error


def _kink_free_head(rng, Z, nu=0.4):
    w = rng.normal(size=Z.shape[1])
    values = np.sort(Z @ w)
    mid = values.size // 2
    return OcSvmHead(w, 0.5 * (values[mid - 1] + values[mid]), nu)


class TestMargin:
    """Test g = w.z - rho"""

    def test_zero_head(self, rng):
        """Test w=0, rho=0 gives 0 for any z"""
        head = OcSvmHead.zeros(6, 0.5)
        assert margin(head, rng.normal(size=6)) == 0.0

    def test_w_equal_to_unit_feature(self):
        """Test w = z(x), rho = 0 gives ||z||^2 = 1"""
        rff = sample_rff(3, 20, 2.0, 1)
        z = map(rff, np.array([0.3, -1.0, 2.0]))
        assert margin(OcSvmHead(z, 0.0, 0.5), z) == pytest.approx(1.0, abs=1e-12)

    def test_matches_naive_dot_product(self, rng):
        """Test against an explicit sum"""
        w, z = rng.normal(size=8), rng.normal(size=8)
        head = OcSvmHead(w, 0.7, 0.3)
        expected = sum(w[i] * z[i] for i in range(8)) - 0.7
        assert margin(head, z) == pytest.approx(expected, abs=1e-12)

    def test_length_mismatch(self):
        """Test a feature vector of the wrong length is rejected"""
        with pytest.raises(ArgumentError):
            margin(OcSvmHead.zeros(4, 0.5), np.zeros(5))


class TestDecide:
    """Test the sign rule"""

    @pytest.mark.parametrize("rho,expected", [(0.0, NORMAL), (0.3, ANOMALY), (-1e-15, NORMAL)])
    def test_sign_rule(self, rho, expected):
        """Test g >= 0 is normal and g < 0 is an anomaly"""
        head = OcSvmHead(np.zeros(2), rho, 0.5)
        assert decide(head, np.zeros(2)) == expected


class TestHead:
    """Test head construction"""

    @pytest.mark.parametrize("nu", [0.0, -0.1, 1.5])
    def test_nu_range(self, nu):
        """Test nu outside (0, 1] is rejected"""
        with pytest.raises(ArgumentError):
            OcSvmHead.zeros(4, nu)

    def test_nu_one_allowed(self):
        """Test nu = 1 is accepted"""
        assert OcSvmHead.zeros(4, 1.0).nu == 1.0


class TestObjective:
    """Test the hinge-form primal objective"""

    def test_zero_head(self, rng):
        """Test w=0, rho=0 gives 0"""
        assert svm_objective(OcSvmHead.zeros(5, 0.4), rng.normal(size=(3, 5))) == 0.0

    def test_sample_on_the_hyperplane(self, rng):
        """Test w.z = rho gives 0.5||w||^2 - rho"""
        w, z = rng.normal(size=4), rng.normal(size=4)
        rho = float(np.dot(w, z))
        head = OcSvmHead(w, rho, 0.4)
        assert svm_objective(head, z[None, :]) == pytest.approx(0.5 * np.dot(w, w) - rho, abs=1e-12)

    def test_matches_naive_loop(self, rng):
        """Test against a per-sample loop for nu=0.4, n=32"""
        Z = rng.normal(size=(32, 6))
        head = OcSvmHead(rng.normal(size=6), 0.2, 0.4)
        hinge = sum(max(0.0, head.rho - float(np.dot(head.w, z))) for z in Z)
        expected = 0.5 * float(np.dot(head.w, head.w)) - head.rho + hinge / (0.4 * 32)
        assert svm_objective(head, Z) == pytest.approx(expected, abs=1e-12)

    def test_empty_batch(self):
        """Test an empty batch is rejected"""
        with pytest.raises(ArgumentError):
            svm_objective(OcSvmHead.zeros(3, 0.5), np.zeros((0, 3)))


class TestParamGrads:
    """Test subgradients w.r.t. w and rho"""

    def test_no_active_samples(self, rng):
        """Test no active samples gives grad_w = w, grad_rho = -1"""
        Z = rng.normal(size=(6, 4))
        head = OcSvmHead(rng.normal(size=4), -100.0, 0.5)
        grad_w, grad_rho = svm_param_grads(head, Z)
        np.testing.assert_array_equal(grad_w, head.w)
        assert grad_rho == -1.0

    def test_all_samples_active(self, rng):
        """Test all n samples active gives grad_rho = -1 + 1/nu"""
        head = OcSvmHead(rng.normal(size=4), 100.0, 0.25)
        _, grad_rho = svm_param_grads(head, rng.normal(size=(10, 4)))
        assert grad_rho == pytest.approx(-1.0 + 1.0 / 0.25, abs=1e-12)

    def test_kink_counts_as_inactive(self):
        """Test a sample exactly on the hyperplane contributes nothing"""
        head = OcSvmHead(np.array([1.0, 0.0]), 0.5, 0.5)
        grad_w, grad_rho = svm_param_grads(head, np.array([[0.5, 3.0]]))
        np.testing.assert_array_equal(grad_w, head.w)
        assert grad_rho == -1.0

    def test_match_finite_differences(self, rng):
        """Test both subgradients against central differences away from kinks"""
        Z = rng.normal(size=(32, 6))
        head = _kink_free_head(rng, Z)
        grad_w, grad_rho = svm_param_grads(head, Z)
        assert rel_error(grad_w, numeric_grad(lambda: svm_objective(head, Z), head.w)) <= FD_TOLERANCE
        numeric_rho = numeric_grad(lambda: svm_objective(head, Z), head.rho_param)
        assert grad_rho == pytest.approx(numeric_rho[0], rel=FD_TOLERANCE)

    def test_feature_grad_matches_finite_differences(self, rng):
        """Test the gradient w.r.t. the feature rows"""
        Z = rng.normal(size=(16, 5))
        head = _kink_free_head(rng, Z, nu=0.3)
        numeric = numeric_grad(lambda: svm_objective(head, Z), Z)
        assert rel_error(svm_feature_grad(head, Z), numeric) <= FD_TOLERANCE


class TestMarginInputGrad:
    """Test d g(z(x)) / dx"""

    def test_zero_weights(self, rng):
        """Test w = 0 gives a zero gradient"""
        rff = sample_rff(3, 5, 1.0, 0)
        grad = margin_input_grad(OcSvmHead.zeros(10, 0.5), rff, rng.normal(size=3))
        assert np.array_equal(grad, np.zeros(3))

    def test_single_frequency(self):
        """Test d=1, D=1, omega=1, w=[0, 1], x=0 gives cos(0) = 1"""
        rff = RffMap(np.array([[1.0]]), 1.0)
        grad = margin_input_grad(OcSvmHead(np.array([0.0, 1.0]), 0.37, 0.5), rff, np.array([0.0]))
        assert grad[0] == pytest.approx(1.0, abs=1e-15)

    def test_matches_finite_differences(self, rng):
        """Test against central differences of margin(map(x))"""
        rff = sample_rff(4, 12, 1.5, 9)
        head = OcSvmHead(rng.normal(size=24), 0.1, 0.5)
        x = rng.normal(size=4)
        numeric = numeric_grad(lambda: margin(head, map(rff, x)), x)
        assert rel_error(margin_input_grad(head, rff, x), numeric) <= FD_TOLERANCE

    def test_dimension_mismatch(self):
        """Test a head that does not match the map is rejected"""
        with pytest.raises(ArgumentError):
            margin_input_grad(OcSvmHead.zeros(6, 0.5), sample_rff(2, 5, 1.0, 0), np.zeros(2))
