"""
snnbench - Model Files
Binary model container and importer for externally published weights.

Container layout::

    b"SNNB" | uint32 LE header length | JSON header (utf-8) | weights

The header holds ``layer_dims``, ``output_head``, ``loss``, ``non_negative``,
``history`` and a free-form ``provenance`` object. Weights follow as
little-endian float32, one row-major ``(out, in)`` matrix per layer.
"""

import json
import struct
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from ..exceptions import DatasetFormatError, ShapeError
from .model import AnnModel

MAGIC = b"SNNB"
FORMAT_VERSION = 1

PathLike = Union[str, Path]


def save_model(
    path: PathLike, model: AnnModel, provenance: Optional[Dict[str, Any]] = None
) -> Path:
    """Write ``model`` to ``path``; ``provenance`` is merged into the header."""
    header = {
        "format": FORMAT_VERSION,
        "layer_dims": model.layer_dims,
        "output_head": model.output_head,
        "loss": model.loss,
        "non_negative": model.non_negative,
        "history": model.history,
        "provenance": {**model.provenance, **(provenance or {})},
    }
    encoded = json.dumps(header, sort_keys=True).encode("utf-8")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(encoded)))
        f.write(encoded)
        for w in model.weights:
            f.write(np.ascontiguousarray(w, dtype="<f4").tobytes())
    return path


def read_header(path: PathLike) -> Dict[str, Any]:
    with open(path, "rb") as f:
        raw = f.read(8)
        if len(raw) < 8 or raw[:4] != MAGIC:
            raise DatasetFormatError(f"{path} is not a model file")
        (length,) = struct.unpack("<I", raw[4:8])
        return json.loads(f.read(length).decode("utf-8"))


def load_model(path: PathLike) -> AnnModel:
    """Read a model written by ``save_model``."""
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise DatasetFormatError(f"{path} is not a model file")
    (length,) = struct.unpack("<I", raw[4:8])
    header = json.loads(raw[8 : 8 + length].decode("utf-8"))
    dims = header["layer_dims"]

    offset = 8 + length
    weights = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        count = fan_in * fan_out
        if len(raw) < offset + 4 * count:
            raise DatasetFormatError(f"{path}: truncated weight data")
        w = np.frombuffer(raw, dtype="<f4", count=count, offset=offset)
        weights.append(w.reshape(fan_out, fan_in).astype(np.float64))
        offset += 4 * count

    return AnnModel(
        dims,
        weights,
        header["output_head"],
        header["loss"],
        header["non_negative"],
        list(header.get("history", [])),
        dict(header.get("provenance", {})),
    )


def _read_matrix(path: Path) -> np.ndarray:
    if path.suffix == ".npy":
        return np.load(path)
    return np.loadtxt(path, ndmin=2)


def _chains(matrices: List[np.ndarray]) -> bool:
    return all(a.shape[0] == b.shape[1] for a, b in zip(matrices[:-1], matrices[1:]))


def import_weight_matrices(
    paths: Sequence[PathLike],
    output_head: str = "relu",
    loss: str = "mse",
) -> AnnModel:
    """
    Build a model from one weight matrix file per layer.

    Each file is a ``.npy`` array or whitespace-delimited text. Matrices may
    be stored as ``(out, in)`` (the MATLAB toolbox layout the published
    784x1200x1200x10 weights use) or transposed; the orientation is picked so
    that consecutive layers chain.
    """
    matrices = [_read_matrix(Path(p)) for p in paths]
    if not matrices:
        raise ShapeError("no weight matrices given")
    if not _chains(matrices):
        matrices = [m.T for m in matrices]
        if not _chains(matrices):
            raise ShapeError("weight matrices do not chain in either orientation")

    dims = [matrices[0].shape[1]] + [m.shape[0] for m in matrices]
    return AnnModel(
        dims,
        matrices,
        output_head,
        loss,
        provenance={"imported_from": [str(p) for p in paths]},
    )
