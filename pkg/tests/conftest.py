"""Shared fixtures"""

import numpy as np
import pytest

from src.models.ae1svm import Ae1SvmModel, MinMaxScaler


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_data(rng):
    return rng.normal(0.0, 1.0, size=(24, 6))


@pytest.fixture
def small_model(small_data):
    """Fitted-looking model: random head, scaler fitted on ``small_data``"""
    model = Ae1SvmModel.build(
        input_dim=6, encoder_layers=[5, 3], nu=0.4, alpha=2.0,
        sigma=1.5, rff_features=8, seed=3,
    )
    head_rng = np.random.default_rng(99)
    model.head.w[:] = head_rng.normal(0.0, 1.0, size=model.head.feature_dim)
    model.head.rho_param[0] = 0.1
    model.mark_fitted(MinMaxScaler.fit(small_data))
    return model
