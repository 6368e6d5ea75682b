"""Random Fourier features for the RBF kernel (combined cosine and sine mapping)."""

from dataclasses import dataclass

import numpy as np

from src.errors import ArgumentError

DEFAULT_SIGMA = 3.0


@dataclass(frozen=True)
class RffMap:
    """
    Frozen spectral frequencies for an RBF kernel of bandwidth ``sigma``

    ``omegas`` has one row per frequency (D x d). The feature vector is
    sqrt(1/D) * [cos(omega_1.x) ... cos(omega_D.x), sin(omega_1.x) ... sin(omega_D.x)].
    """

    omegas: np.ndarray
    sigma: float

    def __post_init__(self):
        omegas = np.array(self.omegas, dtype=np.float64, copy=True)
        if omegas.ndim != 2 or omegas.shape[0] < 1 or omegas.shape[1] < 1:
            raise ArgumentError(f"omegas must be a non-empty D x d matrix, got {omegas.shape}")
        if not self.sigma > 0:
            raise ArgumentError(f"sigma must be positive, got {self.sigma}")
        omegas.setflags(write=False)
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def n_frequencies(self) -> int:
        return self.omegas.shape[0]

    @property
    def input_dim(self) -> int:
        return self.omegas.shape[1]

    @property
    def output_dim(self) -> int:
        return 2 * self.n_frequencies

    def transform(self, X: np.ndarray) -> np.ndarray:
        """Batch form of :func:`map` (rows in, rows out)"""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.input_dim:
            raise ArgumentError(f"Expected rows of length {self.input_dim}, got shape {X.shape}")
        projection = X @ self.omegas.T
        scale = np.sqrt(1.0 / self.n_frequencies)
        return scale * np.concatenate([np.cos(projection), np.sin(projection)], axis=1)

    def backward(self, X: np.ndarray, upstream: np.ndarray) -> np.ndarray:
        """Gradient w.r.t. X of a loss whose gradient w.r.t. transform(X) is ``upstream``"""
        X = np.asarray(X, dtype=np.float64)
        projection = X @ self.omegas.T
        D = self.n_frequencies
        scale = np.sqrt(1.0 / D)
        d_projection = scale * (
            -upstream[:, :D] * np.sin(projection) + upstream[:, D:] * np.cos(projection)
        )
        return d_projection @ self.omegas


def sample_rff(d: int, D: int, sigma: float = DEFAULT_SIGMA, rng_seed: int = 0) -> RffMap:
    """Draw D frequency vectors iid from N(0, sigma^-2 I_d)"""
    if d < 1 or D < 1:
        raise ArgumentError(f"d and D must be positive, got d={d}, D={D}")
    if not sigma > 0:
        raise ArgumentError(f"sigma must be positive, got {sigma}")
    rng = np.random.default_rng(rng_seed)
    return RffMap(omegas=rng.normal(0.0, 1.0 / sigma, size=(D, d)), sigma=sigma)


def map(rff: RffMap, x: np.ndarray) -> np.ndarray:  # noqa: A001
    """Feature vector z(x) of length 2D for a single latent vector"""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != rff.input_dim:
        raise ArgumentError(f"Expected a vector of length {rff.input_dim}, got shape {x.shape}")
    return rff.transform(x[None, :])[0]


def rbf_kernel(x: np.ndarray, x2: np.ndarray, sigma: float) -> float:
    """Exact RBF kernel exp(-||x - x2||^2 / (2 sigma^2))"""
    x = np.asarray(x, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if x.shape != x2.shape:
        raise ArgumentError(f"Length mismatch: {x.shape} vs {x2.shape}")
    if not sigma > 0:
        raise ArgumentError(f"sigma must be positive, got {sigma}")
    diff = x - x2
    return float(np.exp(-np.dot(diff, diff) / (2.0 * sigma * sigma)))


def kernel_error(rff: RffMap, X: np.ndarray, X2: np.ndarray) -> float:
    """Largest |z(x).z(x') - K(x, x')| over paired rows of X and X2"""
    Z = rff.transform(X)
    Z2 = rff.transform(X2)
    approx = np.sum(Z * Z2, axis=1)
    exact = np.array([rbf_kernel(a, b, rff.sigma) for a, b in zip(X, X2)])
    return float(np.max(np.abs(approx - exact)))
