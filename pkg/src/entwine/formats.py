"""JSON file formats for ensembles, density matrices and gap certificates.

Complex numbers are ``[re, im]`` pairs. Floats are written with ``repr``
precision, so parsing a serialized value returns it bit for bit. Output is
UTF-8 and newline-terminated; identical inputs give identical bytes.

Ensemble file::

    {"dims": [2, 2], "vectors": [[[re, im], ...], ...], "weights": [...]}

``weights`` is optional. When present the vectors are normalized states and
the ensemble is built via :func:`entwine.ensembles.from_weighted`; otherwise
the vectors are the unnormalized members themselves.

Density file::

    {"dims": [2, 2], "matrix": [[[re, im], ...], ...]}
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .condition import GapCertificate
from .ensembles import Ensemble, from_weighted
from .errors import EntwineError
from .linalg import BipartiteVector


class FormatError(EntwineError, ValueError):
    """A file could not be parsed; the message names the offending field or line."""


def digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def loads(text: str | bytes, source: str = "<input>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    except UnicodeDecodeError as exc:
        raise FormatError(f"{source}: not valid UTF-8 ({exc.reason})") from None


def encode_complex(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _pair(v, where: str) -> complex:
    if (
        not isinstance(v, list)
        or len(v) != 2
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)
    ):
        raise FormatError(f"{where}: expected a [re, im] pair of numbers")
    z = complex(float(v[0]), float(v[1]))
    if not np.isfinite(z):
        raise FormatError(f"{where}: non-finite value")
    return z


def _complex_vector(v, where: str) -> np.ndarray:
    if not isinstance(v, list):
        raise FormatError(f"{where}: expected a list of [re, im] pairs")
    return np.array([_pair(x, f"{where}[{k}]") for k, x in enumerate(v)], dtype=complex)


def _field(obj, key: str, source: str):
    if not isinstance(obj, dict):
        raise FormatError(f"{source}: top level must be a JSON object")
    if key not in obj:
        raise FormatError(f"{source}: missing field '{key}'")
    return obj[key]


def _dims(obj, source: str) -> tuple[int, int]:
    dims = _field(obj, "dims", source)
    if (
        not isinstance(dims, list)
        or len(dims) != 2
        or not all(isinstance(d, int) and not isinstance(d, bool) and d > 0 for d in dims)
    ):
        raise FormatError(f"{source}: field 'dims' must be two positive integers")
    return dims[0], dims[1]


# -- ensembles ---------------------------------------------------------------


def ensemble_to_obj(e: Ensemble) -> dict:
    return {
        "dims": [e.dim_a, e.dim_b],
        "vectors": [[encode_complex(z) for z in v] for v in e.vectors],
    }


def ensemble_from_obj(obj, source: str = "<input>") -> Ensemble:
    dim_a, dim_b = _dims(obj, source)
    raw = _field(obj, "vectors", source)
    if not isinstance(raw, list) or not raw:
        raise FormatError(f"{source}: field 'vectors' must be a non-empty list")
    vecs = []
    for i, v in enumerate(raw):
        arr = _complex_vector(v, f"{source}: vectors[{i}]")
        if arr.size != dim_a * dim_b:
            raise FormatError(
                f"{source}: vectors[{i}] has {arr.size} amplitudes, expected {dim_a * dim_b}"
            )
        vecs.append(arr)
    weights = obj.get("weights")
    if weights is None:
        return Ensemble(dim_a, dim_b, np.array(vecs))
    if not isinstance(weights, list) or len(weights) != len(vecs):
        raise FormatError(f"{source}: field 'weights' must list one number per vector")
    for k, w in enumerate(weights):
        if not isinstance(w, (int, float)) or isinstance(w, bool) or not w >= 0:
            raise FormatError(f"{source}: weights[{k}] must be a nonnegative number")
    try:
        return from_weighted(weights, [BipartiteVector(dim_a, dim_b, v) for v in vecs])
    except EntwineError as exc:
        raise FormatError(f"{source}: {exc}") from None


def density_to_obj(rho, dims) -> dict:
    return {
        "dims": [int(dims[0]), int(dims[1])],
        "matrix": [[encode_complex(z) for z in row] for row in np.asarray(rho)],
    }


def density_from_obj(obj, source: str = "<input>") -> tuple[np.ndarray, tuple[int, int]]:
    dims = _dims(obj, source)
    d = dims[0] * dims[1]
    raw = _field(obj, "matrix", source)
    if not isinstance(raw, list) or len(raw) != d:
        raise FormatError(f"{source}: field 'matrix' must have {d} rows")
    rows = []
    for i, row in enumerate(raw):
        arr = _complex_vector(row, f"{source}: matrix[{i}]")
        if arr.size != d:
            raise FormatError(f"{source}: matrix[{i}] has {arr.size} entries, expected {d}")
        rows.append(arr)
    return np.array(rows), dims


# -- certificates ------------------------------------------------------------


@dataclass
class CertificateFile:
    verdict: str
    gap: float
    c: list
    hermiticity_residual: float
    restarts: int
    seed: int
    tau_gap: float
    tool_version: str
    input_digest: str

    @classmethod
    def from_certificate(cls, cert: GapCertificate, residual: float, input_digest: str):
        return cls(
            verdict=cert.verdict.value,
            gap=float(cert.gap),
            c=[encode_complex(z) for z in cert.c],
            hermiticity_residual=float(residual),
            restarts=int(cert.restarts_used),
            seed=int(cert.seed),
            tau_gap=float(cert.tau_gap),
            tool_version=__version__,
            input_digest=input_digest,
        )

    def coefficients(self) -> np.ndarray:
        return np.array([complex(re, im) for re, im in self.c])

    def to_obj(self) -> dict:
        return asdict(self)

    @classmethod
    def from_obj(cls, obj, source: str = "<certificate>") -> "CertificateFile":
        if not isinstance(obj, dict):
            raise FormatError(f"{source}: top level must be a JSON object")
        kwargs = {}
        for name, kind in (
            ("verdict", str),
            ("gap", float),
            ("c", list),
            ("hermiticity_residual", float),
            ("restarts", int),
            ("seed", int),
            ("tau_gap", float),
            ("tool_version", str),
            ("input_digest", str),
        ):
            value = _field(obj, name, source)
            ok = isinstance(value, kind) or (kind is float and isinstance(value, int))
            if not ok or isinstance(value, bool):
                raise FormatError(f"{source}: field '{name}' has the wrong type")
            kwargs[name] = float(value) if kind is float else value
        if kwargs["verdict"] not in ("VIOLATED", "NO_VIOLATION_FOUND"):
            raise FormatError(f"{source}: unknown verdict {kwargs['verdict']!r}")
        kwargs["c"] = [encode_complex(z) for z in _complex_vector(kwargs["c"], f"{source}: c")]
        return cls(**kwargs)


def read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from None


def write_text(path, text: str):
    Path(path).write_text(text, encoding="utf-8")
