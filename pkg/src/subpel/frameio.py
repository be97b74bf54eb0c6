"""
Raw planar YUV input/output, PSNR and synthetic band-limited test frames.

Raw layout: per frame the Y plane, then U, then V; frames are concatenated.
8-bit samples are single bytes, 10-bit samples are little-endian 16-bit
words. Samples are normalized to [0, 1] by ``2**bit_depth - 1``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractError
from .warp import Frame

__all__ = [
    "RawVideoSpec",
    "QualityResult",
    "read_yuv",
    "write_yuv",
    "psnr",
    "SplitMix64",
    "synth_bandlimited",
]


@dataclass(frozen=True)
class RawVideoSpec:
    width: int
    height: int
    bit_depth: int = 8
    chroma: str = "444"
    frame_count: int = 1

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ContractError(f"invalid frame size {self.width}x{self.height}")
        if self.bit_depth not in (8, 10):
            raise ContractError(f"bit depth must be 8 or 10, got {self.bit_depth}")
        if self.chroma not in ("444", "420"):
            raise ContractError(f"chroma must be '444' or '420', got {self.chroma!r}")
        if self.chroma == "420" and (self.width % 2 or self.height % 2):
            raise ContractError(f"4:2:0 needs even dimensions, got {self.width}x{self.height}")
        if self.frame_count < 1:
            raise ContractError("frame_count must be >= 1")

    @property
    def max_value(self) -> int:
        return (1 << self.bit_depth) - 1

    @property
    def bytes_per_sample(self) -> int:
        return 1 if self.bit_depth == 8 else 2

    @property
    def plane_shapes(self) -> list[tuple[int, int]]:
        luma = (self.height, self.width)
        if self.chroma == "420":
            sub = (self.height // 2, self.width // 2)
            return [luma, sub, sub]
        return [luma, luma, luma]

    @property
    def frame_bytes(self) -> int:
        return sum(h * w for h, w in self.plane_shapes) * self.bytes_per_sample

    @property
    def dtype(self) -> str:
        return "u1" if self.bit_depth == 8 else "<u2"


@dataclass(frozen=True)
class QualityResult:
    psnr_per_channel: tuple[float, ...]
    psnr_avg: float
    mse_per_channel: tuple[float, ...]


def read_yuv(path, spec: RawVideoSpec, frame_index: int = 0) -> Frame:
    """Read one frame as a 3-channel 4:4:4 :class:`Frame`.

    4:2:0 chroma is upsampled by pixel replication.
    """
    path = Path(path)
    if frame_index < 0:
        raise ContractError(f"frame index must be >= 0, got {frame_index}")
    offset = frame_index * spec.frame_bytes
    try:
        size = path.stat().st_size
        if size < offset + spec.frame_bytes:
            raise OSError(
                f"{path}: frame {frame_index} needs bytes [{offset}, {offset + spec.frame_bytes}) "
                f"but the file holds {size} bytes"
            )
        with open(path, "rb") as fh:
            fh.seek(offset)
            data = fh.read(spec.frame_bytes)
    except OSError as exc:
        if exc.strerror is None:
            raise
        raise OSError(f"cannot read {path} at byte offset {offset}: {exc.strerror}") from exc

    samples = np.frombuffer(data, dtype=spec.dtype)
    planes = []
    pos = 0
    for h, w in spec.plane_shapes:
        plane = samples[pos:pos + h * w].reshape(h, w)
        pos += h * w
        if (h, w) != (spec.height, spec.width):
            plane = plane.repeat(2, axis=0).repeat(2, axis=1)
        planes.append(plane.astype(np.float64) / spec.max_value)
    return Frame(np.stack(planes), spec.bit_depth)


def _to_integer(frame: Frame, max_value: int) -> np.ndarray:
    # round half up, then saturate
    return np.clip(np.floor(frame.planes * max_value + 0.5), 0, max_value)


def write_yuv(frame: Frame, spec: RawVideoSpec, path, append: bool = False) -> None:
    """Write ``frame`` as raw 4:4:4 planar YUV at ``spec.bit_depth``.

    Without ``append`` the file is replaced atomically.
    """
    if not str(path):
        raise OSError("empty output path")
    path = Path(path)
    if spec.chroma != "444":
        raise ContractError("write_yuv only emits 4:4:4")
    if (frame.width, frame.height) != (spec.width, spec.height) or frame.channels != 3:
        raise ContractError(f"{frame!r} does not match {spec.width}x{spec.height} 3-channel spec")
    data = _to_integer(frame, spec.max_value).astype(spec.dtype).tobytes(order="C")
    try:
        if append:
            with open(path, "ab") as fh:
                fh.write(data)
        else:
            tmp = path.with_name(path.name + ".tmp")
            tmp.write_bytes(data)
            os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def psnr(a: Frame, b: Frame) -> QualityResult:
    """PSNR on the normalized scale (peak 1.0); the average is the plain mean over channels."""
    if a.planes.shape != b.planes.shape:
        raise ContractError(f"cannot compare {a!r} with {b!r}")
    diff = a.planes - b.planes
    mse = tuple(float(m) for m in np.mean(diff * diff, axis=(1, 2)))
    values = tuple(math.inf if m == 0 else 10.0 * math.log10(1.0 / m) for m in mse)
    return QualityResult(values, sum(values) / len(values), mse)


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood), portable bit-for-bit.

    state += 0x9E3779B97F4A7C15
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)
    """

    _MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self._MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self._MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self._MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self._MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))


@dataclass(frozen=True)
class _Sinusoid:
    fx: float  # cycles per pixel along columns
    fy: float  # cycles per pixel along rows
    amplitude: float
    phase: float


def _sinusoids(cutoff: float, seed: int, count: int) -> list[_Sinusoid]:
    rng = SplitMix64(seed)
    fmax = 0.5 * cutoff  # Nyquist is 0.5 cycles per pixel
    raw = []
    for _ in range(count):
        radius = fmax * rng.uniform()
        angle = 2.0 * math.pi * rng.uniform()
        amp = 0.5 + rng.uniform()
        phase = 2.0 * math.pi * rng.uniform()
        raw.append((radius * math.cos(angle), radius * math.sin(angle), amp, phase))
    total = sum(r[2] for r in raw)
    # keep 0.5 +/- sum(|a|) inside [0.05, 0.95]
    scale = 0.45 / total
    return [_Sinusoid(fx, fy, amp * scale, ph) for fx, fy, amp, ph in raw]


def synth_bandlimited(width: int, height: int, cutoff: float = 0.5, seed: int = 0,
                      shift: tuple[float, float] = (0.0, 0.0), components: int = 12) -> Frame:
    """Single-channel sum of random 2D sinusoids below ``cutoff`` x Nyquist.

    The frame samples ``f(c - shift[0], r - shift[1])``, i.e. the same
    continuous image moved right by ``shift[0]`` and down by ``shift[1]``.
    """
    if not 0.0 < cutoff < 1.0:
        raise ContractError(f"cutoff must lie in (0, 1), got {cutoff}")
    if width < 1 or height < 1:
        raise ContractError(f"invalid frame size {width}x{height}")
    cols = np.arange(width, dtype=np.float64)[None, :] - shift[0]
    rows = np.arange(height, dtype=np.float64)[:, None] - shift[1]
    plane = np.full((height, width), 0.5)
    for sw in _sinusoids(cutoff, seed, components):
        plane = plane + sw.amplitude * np.cos(2.0 * math.pi * (sw.fx * cols + sw.fy * rows) + sw.phase)
    return Frame(plane[None], 8)
