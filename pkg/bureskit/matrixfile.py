"""Reading and writing matrices as JSON documents.

A matrix file looks like

    {
      "kind": "state",
      "n": 2,
      "re": [[1, 0], [0, 2]],
      "im": [[0, 0], [0, 0]]
    }

Numbers are written with 17 significant digits so a file read back gives
the exact same float64 entries.
"""

import json
import math
from dataclasses import dataclass
from typing import Any, List

import torch

from .errors import ValidationError
from .states import StateMatrix, TangentMatrix
from .utils import Tolerances, fmt

KINDS = ("state", "tangent")


def _encode(value: Any, depth: int = 0) -> str:
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, (int, float)):
        if isinstance(value, float) and not math.isfinite(value):
            return json.dumps(str(value))
        return fmt(value) if isinstance(value, float) else str(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    pad = "  " * (depth + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, depth + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * depth + "}"
    if isinstance(value, (list, tuple)):
        # rows of numbers stay on one line
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            return "[" + ", ".join(_encode(v) for v in value) + "]"
        if not value:
            return "[]"
        items = [f"{pad}{_encode(v, depth + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + "\n" + "  " * depth + "]"
    raise TypeError(f"cannot encode {type(value).__name__}")


def dumps(document: dict) -> str:
    """JSON text with every float at 17 significant digits."""
    return _encode(document) + "\n"


def _plane(document: dict, key: str, n: int) -> List[List[float]]:
    if key not in document:
        raise ValidationError("missing", field=key)
    rows = document[key]
    if not isinstance(rows, list) or len(rows) != n:
        raise ValidationError(f"expected {n} rows", field=key)
    plane = []
    for index, row in enumerate(rows, start=1):
        if not isinstance(row, list) or len(row) != n:
            raise ValidationError(f"row {index} must have {n} entries", field=key)
        for value in row:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValidationError(f"row {index} has a non-numeric entry {value!r}", field=key)
            if not math.isfinite(value):
                raise ValidationError(f"row {index} has a non-finite entry", field=key)
        plane.append([float(v) for v in row])
    return plane


@dataclass(frozen=True)
class MatrixFile:
    n: int
    re: List[List[float]]
    im: List[List[float]]
    kind: str = "state"

    @classmethod
    def from_matrix(cls, matrix, kind: str = "state") -> "MatrixFile":
        if kind not in KINDS:
            raise ValidationError(f"kind must be one of {KINDS}, got {kind!r}")
        if isinstance(matrix, (StateMatrix, TangentMatrix)):
            matrix = matrix.entries
        tensor = torch.as_tensor(matrix, dtype=torch.complex128)
        return cls(
            n=tensor.shape[0],
            re=tensor.real.tolist(),
            im=tensor.imag.tolist(),
            kind=kind,
        )

    @classmethod
    def loads(cls, text: str) -> "MatrixFile":
        try:
            document = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValidationError(f"column {e.colno}: {e.msg}", line=e.lineno)
        if not isinstance(document, dict):
            raise ValidationError("matrix file must hold a JSON object", line=1)

        kind = document.get("kind", "state")
        if kind not in KINDS:
            raise ValidationError(f"must be one of {KINDS}, got {kind!r}", field="kind")
        n = document.get("n")
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ValidationError(f"must be a positive integer, got {n!r}", field="n")
        return cls(n=n, re=_plane(document, "re", n), im=_plane(document, "im", n), kind=kind)

    @classmethod
    def load(cls, path: str) -> "MatrixFile":
        try:
            with open(path, "r", encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            raise ValidationError(f"cannot read {path}: {e.strerror}")
        try:
            return cls.loads(text)
        except ValidationError as e:
            raise ValidationError(f"{path}: {e}") from e

    def tensor(self) -> torch.Tensor:
        return torch.complex(
            torch.tensor(self.re, dtype=torch.float64),
            torch.tensor(self.im, dtype=torch.float64),
        )

    def state(self, tol: Tolerances = None) -> StateMatrix:
        if self.kind != "state":
            raise ValidationError(f"expected a state file, got kind {self.kind!r}", field="kind")
        return StateMatrix.validate(self.tensor(), tol)

    def tangent(self, n: int = None, tol: Tolerances = None) -> TangentMatrix:
        # any Hermitian matrix is a tangent, states included
        return TangentMatrix.validate(self.tensor(), n, tol)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "re": self.re, "im": self.im}

    def dumps(self) -> str:
        return dumps(self.to_dict())

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.dumps())
