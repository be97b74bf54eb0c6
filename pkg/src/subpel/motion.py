"""
Dense and block-based motion fields, displacement splitting and quantization.

Convention: backward warping. The prediction at pixel ``(c, r)`` samples the
reference at ``(c + dc, r + dr)``; ``dc`` grows rightwards, ``dr`` downwards.

A field stores one vector per ``B x B`` block on a ``ceil(H/B) x ceil(W/B)``
grid (row-major). ``B = 1`` is the dense per-pixel case. Trailing blocks cover
whatever is left of the frame when ``B`` does not divide its dimensions.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, ContractError

__all__ = [
    "MotionVector",
    "MotionField",
    "QuantSpec",
    "split_displacement",
    "split_displacements",
    "quantize_fraction",
    "quantize_fractions",
    "quantize_field",
    "expand_to_dense",
    "read_mvf",
    "write_mvf",
    "read_mvf_csv",
    "write_mvf_csv",
]

MVF_MAGIC = b"MVF1"
_MVF_HEADER = struct.Struct("<4sIII")


@dataclass(frozen=True)
class MotionVector:
    dc: float
    dr: float

    def __post_init__(self):
        if not (math.isfinite(self.dc) and math.isfinite(self.dr)):
            raise ContractError(f"motion vector must be finite, got ({self.dc}, {self.dr})")


@dataclass(frozen=True)
class QuantSpec:
    """``delta`` representable fractions, or no quantization when ``infinite``."""

    delta: int = 64
    infinite: bool = False

    def __post_init__(self):
        if not self.infinite and (not isinstance(self.delta, (int, np.integer)) or self.delta < 1):
            raise ConfigurationError(f"delta must be an integer >= 1, got {self.delta!r}")

    @classmethod
    def unquantized(cls) -> "QuantSpec":
        return cls(delta=0, infinite=True)

    @classmethod
    def parse(cls, text: str | int) -> "QuantSpec":
        if isinstance(text, str) and text.strip().lower() in ("inf", "infinite", "infinity"):
            return cls.unquantized()
        try:
            return cls(delta=int(text))
        except (TypeError, ValueError):
            raise ConfigurationError(f"delta must be a positive integer or 'inf', got {text!r}") from None

    def __str__(self):
        return "inf" if self.infinite else str(self.delta)


class MotionField:
    """Immutable grid of motion vectors.

    ``vectors`` has shape ``(grid_h, grid_w, 2)`` with ``[..., 0] = dc`` and
    ``[..., 1] = dr``.
    """

    __slots__ = ("width", "height", "block_size", "_vectors")

    def __init__(self, width: int, height: int, block_size: int, vectors):
        if width < 1 or height < 1:
            raise ContractError(f"field dimensions must be positive, got {width}x{height}")
        if block_size < 1:
            raise ContractError(f"block size must be >= 1, got {block_size}")
        vectors = np.array(vectors, dtype=np.float64)
        expected = (-(-height // block_size), -(-width // block_size), 2)
        if vectors.shape != expected:
            raise ContractError(
                f"vector grid has shape {vectors.shape}, expected {expected} "
                f"for {width}x{height} with B={block_size}"
            )
        if not np.all(np.isfinite(vectors)):
            raise ContractError("motion vectors must be finite")
        vectors.setflags(write=False)
        self.width = int(width)
        self.height = int(height)
        self.block_size = int(block_size)
        self._vectors = vectors

    @property
    def vectors(self) -> np.ndarray:
        return self._vectors

    @property
    def grid_shape(self) -> tuple[int, int]:
        return self._vectors.shape[:2]

    @classmethod
    def uniform(cls, width: int, height: int, block_size: int, dc: float, dr: float) -> "MotionField":
        gh, gw = -(-height // block_size), -(-width // block_size)
        vectors = np.empty((gh, gw, 2))
        vectors[..., 0] = dc
        vectors[..., 1] = dr
        return cls(width, height, block_size, vectors)

    @classmethod
    def zeros(cls, width: int, height: int, block_size: int = 1) -> "MotionField":
        return cls.uniform(width, height, block_size, 0.0, 0.0)

    def vector(self, block_col: int, block_row: int) -> MotionVector:
        dc, dr = self._vectors[block_row, block_col]
        return MotionVector(float(dc), float(dr))

    def with_vectors(self, vectors) -> "MotionField":
        return MotionField(self.width, self.height, self.block_size, vectors)

    def __eq__(self, other):
        if not isinstance(other, MotionField):
            return NotImplemented
        return (
            (self.width, self.height, self.block_size) == (other.width, other.height, other.block_size)
            and np.array_equal(self._vectors, other._vectors)
        )

    def __repr__(self):
        return (f"MotionField({self.width}x{self.height}, B={self.block_size}, "
                f"grid={self.grid_shape[1]}x{self.grid_shape[0]})")


def split_displacement(coord: int, d: float) -> tuple[int, float]:
    """Split the sampling position ``coord + d`` into ``(k, s)``, ``s`` in [0, 1).

    The fraction is taken from ``d`` alone, so every destination pixel sharing
    a displacement also shares the exact same ``s``.
    """
    kd = math.floor(d)
    s = d - kd
    if s >= 1.0:
        # d is a tiny negative number and d - floor(d) rounded up to 1
        kd, s = kd + 1, 0.0
    return coord + kd, s


def split_displacements(d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`split_displacement` for ``coord = 0``."""
    d = np.asarray(d, dtype=np.float64)
    k = np.floor(d)
    s = d - k
    wrap = s >= 1.0
    if np.any(wrap):
        k = np.where(wrap, k + 1, k)
        s = np.where(wrap, 0.0, s)
    return k.astype(np.int64), s


def quantize_fraction(s: float, q: QuantSpec) -> tuple[int, float]:
    """Round ``s`` to the grid ``1/delta``; returns ``(carry, s_hat)``.

    Ties round away from zero. A result of exactly 1 becomes ``(1, 0.0)`` so the
    fraction stays in [0, 1).
    """
    if q.infinite:
        return 0, s
    m = math.floor(q.delta * s + 0.5)
    if m >= q.delta:
        return 1, 0.0
    return 0, m / q.delta


def quantize_fractions(s: np.ndarray, q: QuantSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    """Vectorized :func:`quantize_fraction`.

    Returns ``(carry, s_hat, index)`` where ``index`` is the table row
    ``round(delta * s)`` (``None`` when unquantized).
    """
    s = np.asarray(s, dtype=np.float64)
    if q.infinite:
        return np.zeros(s.shape, dtype=np.int64), s, None
    m = np.floor(q.delta * s + 0.5).astype(np.int64)
    carry = (m >= q.delta).astype(np.int64)
    m = np.where(carry == 1, 0, m)
    return carry, m / q.delta, m


def quantize_field(field: MotionField, q: QuantSpec) -> MotionField:
    """Quantize both components of every vector to multiples of ``1/delta``."""
    if q.infinite:
        return field
    k, s = split_displacements(field.vectors)
    carry, s_hat, _ = quantize_fractions(s, q)
    return field.with_vectors((k + carry) + s_hat)


def expand_to_dense(field: MotionField) -> MotionField:
    """Broadcast a block field to one vector per pixel (``B = 1``)."""
    B = field.block_size
    if B == 1:
        return field.with_vectors(field.vectors.copy())
    rows = np.arange(field.height) // B
    cols = np.arange(field.width) // B
    return MotionField(field.width, field.height, 1, field.vectors[rows][:, cols])


def write_mvf(field: MotionField, path) -> None:
    """Write the little-endian ``MVF1`` binary format (vectors stored as f32)."""
    header = _MVF_HEADER.pack(MVF_MAGIC, field.width, field.height, field.block_size)
    payload = field.vectors.astype("<f4").tobytes(order="C")
    _atomic_write_bytes(Path(path), header + payload)


def read_mvf(path) -> MotionField:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise OSError(f"cannot read motion field {path}: {exc.strerror or exc}") from exc
    if len(data) < _MVF_HEADER.size:
        raise OSError(f"{path}: truncated header ({len(data)} bytes, need {_MVF_HEADER.size})")
    magic, width, height, block_size = _MVF_HEADER.unpack_from(data)
    if magic != MVF_MAGIC:
        raise OSError(f"{path}: bad magic {magic!r}, expected {MVF_MAGIC!r}")
    if width == 0 or height == 0 or block_size == 0:
        raise OSError(f"{path}: invalid header {width}x{height}, B={block_size}")
    gh, gw = -(-height // block_size), -(-width // block_size)
    need = _MVF_HEADER.size + gh * gw * 2 * 4
    if len(data) != need:
        raise OSError(f"{path}: expected {need} bytes for a {gw}x{gh} grid, found {len(data)}")
    vectors = np.frombuffer(data, dtype="<f4", offset=_MVF_HEADER.size).reshape(gh, gw, 2)
    return MotionField(width, height, block_size, vectors.astype(np.float64))


def write_mvf_csv(field: MotionField, path) -> None:
    """CSV variant: one ``block_col,block_row,dc,dr`` row per block.

    Frame size and block size are not part of the CSV; pass them back to
    :func:`read_mvf_csv`.
    """
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["block_col", "block_row", "dc", "dr"])
        gh, gw = field.grid_shape
        for br in range(gh):
            for bc in range(gw):
                dc, dr = field.vectors[br, bc]
                writer.writerow([bc, br, repr(float(dc)), repr(float(dr))])
    tmp.replace(path)


def read_mvf_csv(path, width: int, height: int, block_size: int) -> MotionField:
    gh, gw = -(-height // block_size), -(-width // block_size)
    vectors = np.full((gh, gw, 2), np.nan)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["block_col", "block_row", "dc", "dr"]:
            raise OSError(f"{path}: unexpected header {reader.fieldnames}")
        for line, row in enumerate(reader, start=2):
            bc, br = int(row["block_col"]), int(row["block_row"])
            if not (0 <= bc < gw and 0 <= br < gh):
                raise OSError(f"{path}:{line}: block ({bc}, {br}) outside {gw}x{gh} grid")
            vectors[br, bc] = float(row["dc"]), float(row["dr"])
    if np.isnan(vectors).any():
        raise OSError(f"{path}: missing vectors for some blocks of the {gw}x{gh} grid")
    return MotionField(width, height, block_size, vectors)


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_bytes(data)
        tmp.replace(path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
