# src/utils/serialization.py
"""
Model file

A zip container holding one ``.npy`` member per array and a ``meta.json``
member. Member timestamps are fixed, so saving the same model twice gives
byte-identical files, and arrays are stored exactly, so scores survive a
save/load round trip bit for bit.
"""

import io
import json
import zipfile
from pathlib import Path
from typing import Dict, Union

import numpy as np
from loguru import logger
from pydantic import ValidationError

from src.errors import ContractError, DataError, DataFileNotFoundError
from src.models.ae1svm import Ae1SvmModel, MinMaxScaler
from src.models.network import Activation, DenseLayer, DenseNetwork
from src.models.ocsvm import OcSvmHead
from src.models.rff import RffMap
from src.utils.validators import CsvSchema

FORMAT_NAME = "ae1svm-model"
FORMAT_VERSION = 1
_FIXED_TIMESTAMP = (1980, 1, 1, 0, 0, 0)


def _network_arrays(net: DenseNetwork, prefix: str) -> Dict[str, np.ndarray]:
    arrays = {}
    for i, layer in enumerate(net.layers):
        arrays[f"{prefix}.{i}.weights"] = layer.weights
        arrays[f"{prefix}.{i}.biases"] = layer.biases
    return arrays


def _network_meta(net: DenseNetwork) -> Dict:
    return {
        "dims": net.layer_dims,
        "activations": [layer.activation.value for layer in net.layers],
    }


def save_model(model: Ae1SvmModel, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    arrays: Dict[str, np.ndarray] = {}
    arrays.update(_network_arrays(model.encoder, "encoder"))
    arrays.update(_network_arrays(model.decoder, "decoder"))
    arrays["rff.omegas"] = model.rff.omegas
    arrays["head.w"] = model.head.w
    arrays["head.rho"] = model.head.rho_param
    arrays["scaler.data_min"] = model.scaler.data_min
    arrays["scaler.data_range"] = model.scaler.data_range

    meta = {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "encoder": _network_meta(model.encoder),
        "decoder": _network_meta(model.decoder),
        "rff": {"sigma": model.rff.sigma, "n_frequencies": model.rff.n_frequencies,
                "input_dim": model.rff.input_dim},
        "head": {"nu": model.head.nu, "feature_dim": model.head.feature_dim},
        "alpha": model.alpha,
        "fitted": model.fitted,
        "schema": model.schema.model_dump(mode="json") if model.schema is not None else None,
    }

    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as archive:
        info = zipfile.ZipInfo("meta.json", date_time=_FIXED_TIMESTAMP)
        archive.writestr(info, json.dumps(meta, sort_keys=True, indent=2))
        for name in sorted(arrays):
            buffer = io.BytesIO()
            np.lib.format.write_array(
                buffer, np.ascontiguousarray(arrays[name], dtype=np.float64), allow_pickle=False
            )
            archive.writestr(zipfile.ZipInfo(f"{name}.npy", date_time=_FIXED_TIMESTAMP),
                             buffer.getvalue())

    logger.info(f"Model saved to {path}")
    return path


def _load_network(meta: Dict, arrays: Dict[str, np.ndarray], prefix: str) -> DenseNetwork:
    dims = meta["dims"]
    layers = []
    for i, activation in enumerate(meta["activations"]):
        layers.append(DenseLayer(
            weights=arrays[f"{prefix}.{i}.weights"],
            biases=arrays[f"{prefix}.{i}.biases"],
            activation=Activation(activation),
        ))
    return DenseNetwork(layers, input_dim=dims[0])


def load_model(path: Union[str, Path]) -> Ae1SvmModel:
    path = Path(path)
    if not path.is_file():
        raise DataFileNotFoundError(f"Model file not found: {path}", {"path": str(path)})
    try:
        with zipfile.ZipFile(path, "r") as archive:
            meta = json.loads(archive.read("meta.json"))
            arrays = {
                name[: -len(".npy")]: np.lib.format.read_array(
                    io.BytesIO(archive.read(name)), allow_pickle=False
                )
                for name in archive.namelist()
                if name.endswith(".npy")
            }
    except (zipfile.BadZipFile, KeyError, ValueError) as e:
        raise DataError(f"Not a readable model file: {path} ({e})", {"path": str(path)})

    if meta.get("format") != FORMAT_NAME:
        raise DataError(f"Unrecognized model format in {path}", {"format": meta.get("format")})
    if meta.get("format_version") != FORMAT_VERSION:
        raise DataError(
            f"Unsupported model format version {meta.get('format_version')}",
            {"supported": FORMAT_VERSION},
        )

    try:
        encoder = _load_network(meta["encoder"], arrays, "encoder")
        decoder = _load_network(meta["decoder"], arrays, "decoder")
        rff = RffMap(omegas=arrays["rff.omegas"], sigma=meta["rff"]["sigma"])
        head = OcSvmHead(arrays["head.w"], float(arrays["head.rho"][0]), meta["head"]["nu"])
        scaler = MinMaxScaler(arrays["scaler.data_min"], arrays["scaler.data_range"])
        schema = CsvSchema.model_validate(meta["schema"]) if meta.get("schema") else None
        model = Ae1SvmModel(encoder, decoder, rff, head, meta["alpha"], scaler, meta["fitted"], schema)
    except (KeyError, IndexError) as e:
        raise ContractError(f"Model file {path} is missing {e}")
    except ValidationError as e:
        raise DataError(f"Model file {path} has an invalid ingestion schema: {e}", {"path": str(path)})
    logger.info(f"Model loaded from {path} (layers={encoder.layer_dims}, D={rff.n_frequencies})")
    return model
