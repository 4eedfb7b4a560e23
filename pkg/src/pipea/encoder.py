"""Initial similarity matrices: file import or the built-in seed-propagation encoder.

The built-in encoder is a structure-only stand-in for a trained alignment
model: every seed pair gets an indicator feature dimension, features are
mean-pool propagated a few hops within each graph, and similarities are the
inner products of the propagated feature rows.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetFormatError, DomainError, IntegrityError, ParameterError
from .kg import DatasetBundle, normalized_adjacency

F32_MAGIC_BYTES = 8  # two little-endian uint32: rows, cols


@dataclass(frozen=True)
class SimilarityMatrix:
    """Dense source-by-target pairwise similarities plus their origin tag."""

    values: np.ndarray
    provenance: str  # imported | builtin | propagated

    @property
    def shape(self):
        return self.values.shape

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ParameterError("similarity values must be 2-dimensional")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("similarity matrix contains non-finite entries")


def read_dense_matrix(path) -> np.ndarray:
    """Read a dense matrix from a .tsv or .f32 file (picked by extension)."""
    path = Path(path)
    if path.suffix == ".tsv":
        rows = []
        width = None
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise DatasetFormatError(f"cannot read {path}: {exc}") from None
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                row = [float(tok) for tok in line.rstrip("\r").split("\t")]
            except ValueError as exc:
                raise DatasetFormatError(f"{path.name}:{lineno}: {exc}") from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DatasetFormatError(
                    f"{path.name}:{lineno}: expected {width} columns, got {len(row)}"
                )
            rows.append(row)
        if not rows:
            raise DatasetFormatError(f"{path.name}: empty matrix file")
        return np.array(rows, dtype=float)
    if path.suffix == ".f32":
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise DatasetFormatError(f"cannot read {path}: {exc}") from None
        if len(raw) < F32_MAGIC_BYTES:
            raise DatasetFormatError(f"{path.name}: truncated header")
        rows, cols = struct.unpack("<II", raw[:F32_MAGIC_BYTES])
        body = np.frombuffer(raw, dtype="<f4", offset=F32_MAGIC_BYTES)
        if body.size != rows * cols:
            raise DatasetFormatError(
                f"{path.name}: header says {rows}x{cols} but payload has {body.size} floats"
            )
        return body.reshape(rows, cols).astype(float)
    raise DatasetFormatError(
        f"{path.name}: unsupported matrix format (expected .tsv or .f32)"
    )


def write_dense_matrix(path, values: np.ndarray) -> None:
    """Write a dense matrix as .tsv or .f32 (picked by extension)."""
    path = Path(path)
    values = np.asarray(values, dtype=float)
    if path.suffix == ".tsv":
        lines = ["\t".join(repr(float(v)) for v in row) for row in values]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return
    if path.suffix == ".f32":
        with path.open("wb") as fh:
            fh.write(struct.pack("<II", values.shape[0], values.shape[1]))
            fh.write(values.astype("<f4").tobytes())
        return
    raise DatasetFormatError(
        f"{path.name}: unsupported matrix format (expected .tsv or .f32)"
    )


def import_similarity(path, bundle: DatasetBundle) -> SimilarityMatrix:
    """Load an externally computed similarity matrix, checked against the bundle."""
    values = read_dense_matrix(path)
    expected = (bundle.source.entity_count, bundle.target.entity_count)
    if values.shape != expected:
        raise IntegrityError(
            f"similarity matrix is {values.shape}, dataset expects {expected}"
        )
    return SimilarityMatrix(values=values, provenance="imported")


def builtin_encoder(bundle: DatasetBundle, hops: int = 2) -> SimilarityMatrix:
    """Seed-indicator features, mean-pool propagated, scored by inner product.

    Feature matrices start as one-hot seed indicators (one dimension per seed
    pair) and are damped each hop: F <- (F + D^-1 A F) / 2. Rows that no seed
    reaches stay zero and score 0 against everything.
    """
    if hops < 0:
        raise ParameterError(f"hops={hops} must be >= 0")
    train = bundle.seeds.train_pairs
    if not train:
        raise ParameterError("builtin encoder needs at least one seed pair")
    n = bundle.source.entity_count
    m = bundle.target.entity_count
    f_s = np.zeros((n, len(train)))
    f_t = np.zeros((m, len(train)))
    for dim, (v, v_prime) in enumerate(train):
        f_s[v, dim] = 1.0
        f_t[v_prime, dim] = 1.0
    p_s = normalized_adjacency(bundle.source)
    p_t = normalized_adjacency(bundle.target)
    for _ in range(hops):
        f_s = 0.5 * (f_s + p_s @ f_s)
        f_t = 0.5 * (f_t + p_t @ f_t)
    return SimilarityMatrix(values=f_s @ f_t.T, provenance="builtin")
