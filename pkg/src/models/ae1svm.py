"""
Autoencoding one-class SVM
Encoder, decoder, random Fourier features and the OC-SVM head trained on one
joint objective, plus the two-stage baseline and anomaly scoring
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel

from src.config import TrainConfig, TrainMode, settings
from src.errors import ArgumentError, ConfigError, ContractError, TrainingError
from src.models.network import (
    Activation,
    AdamOptimizer,
    DenseNetwork,
    reconstruction_grad,
    reconstruction_loss,
)
from src.models.ocsvm import (
    OcSvmHead,
    decisions,
    margins,
    svm_feature_grad,
    svm_objective,
    svm_param_grads,
)
from src.models.rff import DEFAULT_SIGMA, RffMap, sample_rff
from src.utils.datasets import LabeledDataset
from src.utils.seeding import Stream, derive_seed, stream_rng
from src.utils.validators import CsvSchema

ALL_GROUPS: FrozenSet[str] = frozenset({"encoder", "decoder", "head"})


@dataclass
class MinMaxScaler:
    """
    Per-column min-max scaling to [0, 1]; constant columns get range 1

    With ``quantile > 0`` the column bounds are the ``quantile`` and
    ``1 - quantile`` quantiles, so a few extreme rows do not squeeze the bulk
    of a column into a narrow band. Values past the bounds are not clipped.
    """

    data_min: np.ndarray
    data_range: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray, quantile: float = 0.0) -> "MinMaxScaler":
        if quantile > 0.0:
            data_min, data_max = np.quantile(X, [quantile, 1.0 - quantile], axis=0)
        else:
            data_min, data_max = X.min(axis=0), X.max(axis=0)
        data_range = data_max - data_min
        data_range[data_range == 0.0] = 1.0
        return cls(data_min=data_min, data_range=data_range)

    @classmethod
    def identity(cls, dim: int) -> "MinMaxScaler":
        return cls(data_min=np.zeros(dim), data_range=np.ones(dim))

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.data_min) / self.data_range


class TrainReport(BaseModel):
    mode: TrainMode
    epochs: int
    epoch_objectives: List[float] = []
    pretrain_objectives: List[float] = []
    n_train: int
    n_features: int
    train_seconds: float = 0.0


class Ae1SvmModel:
    """The trainable artifact: autoencoder + RFF map + OC-SVM head, traded off by alpha"""

    def __init__(
        self,
        encoder: DenseNetwork,
        decoder: DenseNetwork,
        rff: RffMap,
        head: OcSvmHead,
        alpha: float,
        scaler: Optional[MinMaxScaler] = None,
        fitted: bool = False,
        schema: Optional[CsvSchema] = None,
    ):
        if encoder.output_dim != rff.input_dim:
            raise ArgumentError(
                f"Encoder outputs {encoder.output_dim} values but the RFF map expects {rff.input_dim}"
            )
        if rff.output_dim != head.feature_dim:
            raise ArgumentError(
                f"RFF map produces {rff.output_dim} features but the head expects {head.feature_dim}"
            )
        if decoder.input_dim != encoder.output_dim or decoder.output_dim != encoder.input_dim:
            raise ArgumentError(
                f"Decoder {decoder.layer_dims} does not mirror encoder {encoder.layer_dims}"
            )
        if alpha < 0:
            raise ArgumentError(f"alpha must be non-negative, got {alpha}")
        self.encoder = encoder
        self.decoder = decoder
        self.rff = rff
        self.head = head
        self.alpha = float(alpha)
        self.scaler = scaler or MinMaxScaler.identity(encoder.input_dim)
        self.fitted = fitted
        # how input files are read for this model; None means the default layout
        self.schema = schema

    @classmethod
    def build(
        cls,
        input_dim: int,
        encoder_layers: Sequence[int],
        nu: float = 0.4,
        alpha: float = 1000.0,
        sigma: float = DEFAULT_SIGMA,
        rff_features: int = 500,
        seed: int = 0,
        activation: Union[Activation, str] = Activation.SIGMOID,
    ) -> "Ae1SvmModel":
        """Fresh model; an empty ``encoder_layers`` gives the raw-input OC-SVM"""
        dims = [int(input_dim)] + [int(d) for d in encoder_layers]
        if encoder_layers:
            encoder = DenseNetwork.from_dims(dims, activation, seed, Stream.ENCODER_INIT)
            decoder = DenseNetwork.from_dims(dims[::-1], activation, seed, Stream.DECODER_INIT)
        else:
            encoder = DenseNetwork.identity(dims[0])
            decoder = DenseNetwork.identity(dims[0])
        rff = sample_rff(dims[-1], rff_features, sigma, derive_seed(seed, Stream.RFF))
        head = OcSvmHead.zeros(rff.output_dim, nu)
        return cls(encoder, decoder, rff, head, alpha)

    @property
    def input_dim(self) -> int:
        return self.encoder.input_dim

    @property
    def latent_dim(self) -> int:
        return self.encoder.output_dim

    @property
    def nu(self) -> float:
        return self.head.nu

    def mark_fitted(self, scaler: MinMaxScaler) -> None:
        self.scaler = scaler
        self.fitted = True

    def _check_width(self, samples: np.ndarray) -> np.ndarray:
        X = np.asarray(samples, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.input_dim:
            raise ArgumentError(
                f"Expected samples with {self.input_dim} columns, got shape {X.shape}"
            )
        return X

    def encode(self, samples: np.ndarray) -> np.ndarray:
        X = self._check_width(samples)
        return self.encoder.predict(self.scaler.transform(X))

    def reconstruct(self, samples: np.ndarray) -> np.ndarray:
        """Reconstructions in scaled input units"""
        return self.decoder.predict(self.encode(samples))

    def _score_row(self, row: np.ndarray) -> float:
        latent = self.encoder.predict(self.scaler.transform(row)[None, :])
        return float(margins(self.head, self.rff.transform(latent))[0])

    def _score_rows(self, X: np.ndarray) -> np.ndarray:
        # one row per product so a score never depends on the rest of the batch
        return np.fromiter((self._score_row(row) for row in X), dtype=np.float64, count=X.shape[0])

    def score(self, samples: np.ndarray, workers: Optional[int] = None,
              chunk_size: Optional[int] = None) -> np.ndarray:
        """Margin per row (higher = more normal), in input order"""
        X = self._check_width(samples)
        if X.shape[0] == 0:
            return np.zeros(0)
        workers = workers or settings.SCORE_WORKERS
        chunk_size = chunk_size or settings.SCORE_CHUNK_SIZE
        if workers <= 1 or X.shape[0] <= chunk_size:
            return self._score_rows(X)
        chunks = [X[i:i + chunk_size] for i in range(0, X.shape[0], chunk_size)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.concatenate(list(pool.map(self._score_rows, chunks)))

    def decide(self, samples: np.ndarray) -> np.ndarray:
        return decisions(self.score(samples))

    # ==== Objective and gradients (inputs already scaled) ====

    def _objective_terms(self, X: np.ndarray) -> Tuple[float, float]:
        latent = self.encoder.predict(X)
        rec = self.decoder.predict(latent)
        return reconstruction_loss(X, rec), svm_objective(self.head, self.rff.transform(latent))

    def joint_gradients(
        self, X: np.ndarray, groups: FrozenSet[str] = ALL_GROUPS
    ) -> Tuple[float, Dict[str, np.ndarray]]:
        """Joint objective on a scaled batch and its gradients for the requested groups"""
        latent, enc_cache = self.encoder.forward(X)
        rec, dec_cache = self.decoder.forward(latent)
        Z = self.rff.transform(latent)
        value = self.alpha * reconstruction_loss(X, rec) + svm_objective(self.head, Z)

        grads: Dict[str, np.ndarray] = {}
        dec_grads, d_latent = self.decoder.backward(dec_cache, self.alpha * reconstruction_grad(X, rec))
        d_latent = d_latent + self.rff.backward(latent, svm_feature_grad(self.head, Z))
        if "encoder" in groups:
            enc_grads, _ = self.encoder.backward(enc_cache, d_latent)
            grads.update(DenseNetwork.named_gradients(enc_grads, "encoder."))
        if "decoder" in groups:
            grads.update(DenseNetwork.named_gradients(dec_grads, "decoder."))
        if "head" in groups:
            grad_w, grad_rho = svm_param_grads(self.head, Z)
            grads["head.w"] = grad_w
            grads["head.rho"] = np.array([grad_rho])
        return value, grads

    def reconstruction_gradients(
        self, X: np.ndarray, groups: FrozenSet[str] = frozenset({"encoder", "decoder"})
    ) -> Tuple[float, Dict[str, np.ndarray]]:
        """The alpha-weighted reconstruction part of the joint objective alone"""
        latent, enc_cache = self.encoder.forward(X)
        rec, dec_cache = self.decoder.forward(latent)
        value = self.alpha * reconstruction_loss(X, rec)
        grads: Dict[str, np.ndarray] = {}
        dec_grads, d_latent = self.decoder.backward(dec_cache, self.alpha * reconstruction_grad(X, rec))
        if "encoder" in groups:
            enc_grads, _ = self.encoder.backward(enc_cache, d_latent)
            grads.update(DenseNetwork.named_gradients(enc_grads, "encoder."))
        if "decoder" in groups:
            grads.update(DenseNetwork.named_gradients(dec_grads, "decoder."))
        return value, grads

    def head_gradients(self, Z: np.ndarray) -> Tuple[float, Dict[str, np.ndarray]]:
        """OC-SVM objective on a batch of features with gradients for w and rho"""
        grad_w, grad_rho = svm_param_grads(self.head, Z)
        return svm_objective(self.head, Z), {"head.w": grad_w, "head.rho": np.array([grad_rho])}

    def parameters(self) -> Dict[str, np.ndarray]:
        params = {}
        params.update(self.encoder.parameters("encoder."))
        params.update(self.decoder.parameters("decoder."))
        params.update(self.head.parameters("head."))
        return params

    def touch(self) -> None:
        self.encoder.bump_generation()
        self.decoder.bump_generation()


def joint_objective(model: Ae1SvmModel, batch_raw: np.ndarray) -> float:
    """alpha * reconstruction loss + OC-SVM objective on the encoded batch"""
    X = model._check_width(batch_raw)
    if X.shape[0] == 0:
        raise ArgumentError("Empty batch")
    recon, svm = model._objective_terms(model.scaler.transform(X))
    return model.alpha * recon + svm


ObjectiveFn = Callable[[np.ndarray], Tuple[float, Dict[str, np.ndarray]]]


def _train_loop(
    model: Ae1SvmModel,
    rows: np.ndarray,
    cfg: TrainConfig,
    objective_fn: ObjectiveFn,
    stream: int,
    phase: str,
) -> List[float]:
    """Minibatch Adam over shuffled rows; returns the sample-weighted objective per epoch"""
    n = rows.shape[0]
    params = model.parameters()
    optimizer = AdamOptimizer(learning_rate=cfg.learning_rate)
    rng = stream_rng(cfg.seed, stream)
    history: List[float] = []

    for epoch in range(1, cfg.epochs + 1):
        started = time.perf_counter()
        order = rng.permutation(n)
        total = 0.0
        for batch_no, start in enumerate(range(0, n, cfg.batch_size), start=1):
            batch = rows[order[start:start + cfg.batch_size]]
            value, grads = objective_fn(batch)
            if not np.isfinite(value):
                raise TrainingError(
                    f"Non-finite objective in {phase} training at epoch {epoch}, batch {batch_no}",
                    {"phase": phase, "epoch": epoch, "batch": batch_no},
                )
            try:
                optimizer.step(params, grads)
            except TrainingError as e:
                raise TrainingError(
                    f"{e.message} in {phase} training at epoch {epoch}, batch {batch_no}",
                    {"phase": phase, "epoch": epoch, "batch": batch_no},
                )
            model.touch()
            total += value * batch.shape[0]
        history.append(total / n)
        logger.info(
            f"[{phase}] epoch {epoch}/{cfg.epochs} objective={history[-1]:.6f} "
            f"({time.perf_counter() - started:.2f}s)"
        )
    return history


def fit(model: Ae1SvmModel, data: LabeledDataset, cfg: TrainConfig) -> TrainReport:
    """
    Train the model on ``data`` (labels are ignored)

    Joint mode updates every non-frozen parameter from the joint objective on
    each minibatch. Two-stage mode first trains the autoencoder on its
    reconstruction term for ``cfg.epochs``, then freezes it and trains the head
    on the OC-SVM objective of the encoded data for another ``cfg.epochs``.
    """
    X = model._check_width(data.features)
    n = X.shape[0]
    if n == 0:
        raise ArgumentError("Cannot train on an empty dataset")
    if cfg.batch_size > n:
        raise ConfigError(
            "Invalid training configuration",
            [f"batch_size: {cfg.batch_size} exceeds the {n} training rows"],
        )

    model.mark_fitted(MinMaxScaler.fit(X, cfg.scale_quantile))
    Xs = model.scaler.transform(X)
    groups = ALL_GROUPS - cfg.frozen
    report = TrainReport(mode=cfg.mode, epochs=cfg.epochs, n_train=n, n_features=X.shape[1])
    logger.info(
        f"Training {cfg.mode.value} model on {n} rows x {X.shape[1]} features "
        f"(layers={model.encoder.layer_dims}, D={model.rff.n_frequencies}, nu={model.nu}, "
        f"alpha={model.alpha}, epochs={cfg.epochs}, batch={cfg.batch_size}, lr={cfg.learning_rate})"
    )
    started = time.perf_counter()

    if cfg.mode is TrainMode.JOINT:
        report.epoch_objectives = _train_loop(
            model, Xs, cfg, lambda batch: model.joint_gradients(batch, groups),
            Stream.SHUFFLE, "joint",
        )
    else:
        ae_groups = groups & {"encoder", "decoder"}
        report.pretrain_objectives = _train_loop(
            model, Xs, cfg, lambda batch: model.reconstruction_gradients(batch, ae_groups),
            Stream.SHUFFLE, "autoencoder",
        )
        if "head" in groups:
            Z = model.rff.transform(model.encoder.predict(Xs))
            report.epoch_objectives = _train_loop(
                model, Z, cfg, model.head_gradients, Stream.HEAD_SHUFFLE, "oc-svm",
            )

    report.train_seconds = time.perf_counter() - started
    logger.info(f"Training finished in {report.train_seconds:.2f}s")
    return report
