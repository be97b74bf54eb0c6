"""
Separable sub-pixel warping of planar frames.

Every path runs the same two passes: a horizontal N-tap filter across each
of the N rows around the sampling position, then a vertical N-tap filter
over those N intermediates. Taps are accumulated in index order
(``acc = h1*x1; acc = acc + h2*x2; ...``) in all implementations so the
dense and block paths produce identical bits.

Sample indices outside the frame are clamped (edge replication). Output
samples are clamped to [0, 1] after the vertical pass only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, ContractError
from .filter_bank import FilterSpec, FilterTable, build_filter_table, default_spec, derive_filter
from .motion import (
    MotionField,
    QuantSpec,
    expand_to_dense,
    quantize_fraction,
    quantize_fractions,
    split_displacement,
    split_displacements,
)

__all__ = [
    "Frame",
    "WarpConfig",
    "MacCounter",
    "interp_1d",
    "warp_dense",
    "warp_block",
    "warp_brute_force",
    "predict_bidir",
]

# Upper bound on blocks gathered at once by warp_block; keeps 1080p memory flat.
_BLOCK_CHUNK = 1 << 15


class Frame:
    """Planar frame, ``planes`` shaped ``(channels, height, width)``."""

    __slots__ = ("planes", "bit_depth")

    def __init__(self, planes, bit_depth: int = 8):
        planes = np.array(planes, dtype=np.float64)
        if planes.ndim == 2:
            planes = planes[None]
        if planes.ndim != 3 or min(planes.shape) < 1:
            raise ContractError(f"frame planes must be (channels, height, width), got {planes.shape}")
        if not np.all(np.isfinite(planes)):
            raise ContractError("frame samples must be finite")
        if bit_depth not in (8, 10):
            raise ContractError(f"bit depth must be 8 or 10, got {bit_depth}")
        planes.setflags(write=False)
        self.planes = planes
        self.bit_depth = bit_depth

    @property
    def channels(self) -> int:
        return self.planes.shape[0]

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    @property
    def width(self) -> int:
        return self.planes.shape[2]

    @property
    def pixels(self) -> int:
        return self.width * self.height

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return np.array_equal(self.planes, other.planes)

    def __repr__(self):
        return f"Frame({self.width}x{self.height}, channels={self.channels}, bit_depth={self.bit_depth})"


@dataclass
class MacCounter:
    """Tally of filter-tap multiply-accumulates.

    ``pixels`` is the number of decoded pixels the work produced (not
    multiplied by channels), so a 3-channel warp reports three plane-warps'
    worth of MACs per pixel.
    """

    total_macs: int = 0
    pixels: int = 0

    def add(self, macs: int) -> None:
        self.total_macs += int(macs)

    def per_pixel(self) -> Fraction:
        if self.pixels == 0:
            raise ZeroDivisionError("no pixels recorded")
        return Fraction(self.total_macs, self.pixels)


@dataclass(frozen=True)
class WarpConfig:
    spec: FilterSpec
    quant: QuantSpec = field(default_factory=QuantSpec)
    table: FilterTable | None = None
    count_macs: bool = True

    def __post_init__(self):
        if self.table is not None:
            if self.table.spec != self.spec:
                raise ConfigurationError("filter table was built for a different filter spec")
            if not self.quant.infinite and self.table.delta != self.quant.delta:
                raise ConfigurationError(
                    f"table delta {self.table.delta} does not match quantizer delta {self.quant.delta}"
                )

    @classmethod
    def build(cls, taps: int = 8, kind=None, delta: int | str | QuantSpec = 64,
              normalize: bool = True, use_table: bool = True) -> "WarpConfig":
        """Config with a precomputed table whenever the quantizer is finite."""
        spec = default_spec(taps, kind, normalize)
        quant = delta if isinstance(delta, QuantSpec) else QuantSpec.parse(delta)
        table = build_filter_table(spec, quant.delta) if use_table and not quant.infinite else None
        return cls(spec, quant, table)

    @property
    def taps(self) -> int:
        return self.spec.taps


@lru_cache(maxsize=1 << 16)
def _derived(spec: FilterSpec, s: float) -> tuple[float, ...]:
    return derive_filter(spec, s).coefficients


def _filter_rows(config: WarpConfig, s_hat: np.ndarray, index: np.ndarray | None) -> np.ndarray:
    """Filters for an array of (already quantized) fractions, shape ``s.shape + (N,)``."""
    if config.table is not None and index is not None:
        return config.table.coefficients[index]
    uniq, inverse = np.unique(s_hat, return_inverse=True)
    rows = np.array([_derived(config.spec, float(u)) for u in uniq], dtype=np.float64)
    return rows[inverse.reshape(s_hat.shape)]


def _resolve(config: WarpConfig, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Integer offsets and filters for an array of displacements."""
    k, s = split_displacements(d)
    carry, s_hat, index = quantize_fractions(s, config.quant)
    return k + carry, _filter_rows(config, s_hat, index)


def _resolve_scalar(config: WarpConfig, coord: int, d: float) -> tuple[int, tuple[float, ...]]:
    k, s = split_displacement(coord, d)
    carry, s_hat = quantize_fraction(s, config.quant)
    if config.table is not None and not config.quant.infinite:
        h = config.table.lookup(round(s_hat * config.quant.delta)).coefficients
    else:
        h = _derived(config.spec, s_hat)
    return k + carry, h


def interp_1d(samples, position: float, config: WarpConfig, counter: MacCounter | None = None) -> float:
    """Interpolate ``samples`` at a real ``position`` (index units)."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1 or samples.size == 0:
        raise ContractError("samples must be a non-empty 1D sequence")
    if not np.isfinite(position):
        raise ContractError(f"position must be finite, got {position!r}")
    N = config.taps
    k, h = _resolve_scalar(config, 0, float(position))
    last = samples.size - 1
    acc = None
    macs = 0
    for i in range(1, N + 1):
        term = h[i - 1] * samples[min(max(k - N // 2 + i, 0), last)]
        macs += 1
        acc = term if acc is None else acc + term
    if counter is not None:
        counter.pixels += 1
        if config.count_macs:
            counter.add(macs)
    return float(acc)


def _check_dims(frame: Frame, field: MotionField) -> None:
    if (field.width, field.height) != (frame.width, frame.height):
        raise ContractError(
            f"motion field is {field.width}x{field.height} but frame is {frame.width}x{frame.height}"
        )


def warp_dense(frame: Frame, field: MotionField, config: WarpConfig) -> tuple[Frame, MacCounter]:
    """Per-pixel separable warp; costs ``N**2 + N`` MACs per pixel and channel."""
    _check_dims(frame, field)
    if field.block_size != 1:
        raise ContractError(f"warp_dense needs a per-pixel field, got B={field.block_size}")
    N, half = config.taps, config.taps // 2
    H, W = frame.height, frame.width
    kc, hc = _resolve(config, field.vectors[..., 0])
    kr, hr = _resolve(config, field.vectors[..., 1])
    base_c = np.arange(W)[None, :] + kc - half
    base_r = np.arange(H)[:, None] + kr - half
    col_idx = [np.clip(base_c + i, 0, W - 1) for i in range(1, N + 1)]
    row_idx = [np.clip(base_r + j, 0, H - 1) for j in range(1, N + 1)]

    out = np.empty_like(frame.planes)
    macs = 0
    for ch, x in enumerate(frame.planes):
        acc = None
        for j in range(N):
            inter = None
            for i in range(N):
                term = hc[..., i] * x[row_idx[j], col_idx[i]]
                macs += term.size
                inter = term if inter is None else inter + term
            term = hr[..., j] * inter
            macs += term.size
            acc = term if acc is None else acc + term
        out[ch] = np.clip(acc, 0.0, 1.0)

    counter = MacCounter(pixels=H * W)
    if config.count_macs:
        counter.add(macs)
    return Frame(out, frame.bit_depth), counter


def _block_groups(field: MotionField):
    """Yield ``(bh, bw, block_rows, block_cols)`` for each distinct block shape."""
    B = field.block_size
    gh, gw = field.grid_shape
    heights = np.minimum(B, field.height - np.arange(gh) * B)
    widths = np.minimum(B, field.width - np.arange(gw) * B)
    for bh in np.unique(heights):
        rows = np.flatnonzero(heights == bh)
        for bw in np.unique(widths):
            cols = np.flatnonzero(widths == bw)
            br, bc = np.meshgrid(rows, cols, indexing="ij")
            yield int(bh), int(bw), br.ravel(), bc.ravel()


def warp_block(frame: Frame, field: MotionField, config: WarpConfig) -> tuple[Frame, MacCounter]:
    """Block-based separable warp reusing horizontal-pass intermediates.

    For a ``bh x bw`` block the horizontal pass covers ``bh + N - 1`` rows once
    and the vertical pass then reads overlapping windows of it, which costs
    ``N * bw * (bh + N - 1) + N * bh * bw`` MACs per channel. Full ``B x B``
    blocks therefore cost ``2N + (N**2 - N) / B`` per pixel.
    """
    _check_dims(frame, field)
    N, half, B = config.taps, config.taps // 2, field.block_size
    H, W = frame.height, frame.width
    out = np.empty_like(frame.planes)
    macs = 0

    for bh, bw, all_br, all_bc in _block_groups(field):
        for start in range(0, all_br.size, _BLOCK_CHUNK):
            br = all_br[start:start + _BLOCK_CHUNK]
            bc = all_bc[start:start + _BLOCK_CHUNK]
            vec = field.vectors[br, bc]
            kc, hc = _resolve(config, vec[:, 0])
            kr, hr = _resolve(config, vec[:, 1])
            r0, c0 = br * B, bc * B

            win_rows = np.clip(
                (r0 + kr - half + 1)[:, None] + np.arange(bh + N - 1)[None, :], 0, H - 1
            )
            base_cols = (c0 + kc - half)[:, None] + np.arange(bw)[None, :]
            col_idx = [np.clip(base_cols + i, 0, W - 1) for i in range(1, N + 1)]
            out_rows = (r0[:, None] + np.arange(bh)[None, :])[:, :, None]
            out_cols = (c0[:, None] + np.arange(bw)[None, :])[:, None, :]
            hc3 = hc[:, :, None, None]
            hr3 = hr[:, :, None, None]

            for ch, x in enumerate(frame.planes):
                inter = None
                for i in range(N):
                    term = hc3[:, i] * x[win_rows[:, :, None], col_idx[i][:, None, :]]
                    macs += term.size
                    inter = term if inter is None else inter + term
                acc = None
                for j in range(N):
                    term = hr3[:, j] * inter[:, j:j + bh, :]
                    macs += term.size
                    acc = term if acc is None else acc + term
                out[ch][out_rows, out_cols] = np.clip(acc, 0.0, 1.0)

    counter = MacCounter(pixels=H * W)
    if config.count_macs:
        counter.add(macs)
    return Frame(out, frame.bit_depth), counter


def warp_brute_force(frame: Frame, field: MotionField, config: WarpConfig) -> Frame:
    """Reference warp: full N x N tensor-product weights per pixel, no separation."""
    _check_dims(frame, field)
    dense = expand_to_dense(field)
    N, half = config.taps, config.taps // 2
    H, W = frame.height, frame.width
    out = np.empty_like(frame.planes)
    for r in range(H):
        for c in range(W):
            dc, dr = dense.vectors[r, c]
            kc, hc = _resolve_scalar(config, c, float(dc))
            kr, hr = _resolve_scalar(config, r, float(dr))
            rows = np.clip(np.arange(kr - half + 1, kr + half + 1), 0, H - 1)
            cols = np.clip(np.arange(kc - half + 1, kc + half + 1), 0, W - 1)
            weights = np.outer(hr, hc)
            for ch in range(frame.channels):
                patch = frame.planes[ch][np.ix_(rows, cols)]
                out[ch, r, c] = min(max(float(np.sum(weights * patch)), 0.0), 1.0)
    return Frame(out, frame.bit_depth)


def predict_bidir(ref0: Frame, field0: MotionField, ref1: Frame, field1: MotionField,
                  alpha, config: WarpConfig) -> tuple[Frame, MacCounter]:
    """Blend two block warps: ``alpha * warp(ref0) + (1 - alpha) * warp(ref1)``.

    ``alpha`` is a scalar or an ``(height, width)`` plane in [0, 1]. The
    returned counter holds only the two warps' tap MACs.
    """
    if ref0.planes.shape != ref1.planes.shape:
        raise ContractError(f"reference frames differ: {ref0!r} vs {ref1!r}")
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.ndim not in (0, 2) or (alpha.ndim == 2 and alpha.shape != (ref0.height, ref0.width)):
        raise ContractError(f"alpha must be a scalar or a {ref0.height}x{ref0.width} plane")
    if np.any(alpha < 0) or np.any(alpha > 1) or not np.all(np.isfinite(alpha)):
        raise ContractError("alpha weights must lie in [0, 1]")
    pred0, c0 = warp_block(ref0, field0, config)
    pred1, c1 = warp_block(ref1, field1, config)
    blended = alpha * pred0.planes + (1.0 - alpha) * pred1.planes
    counter = MacCounter(c0.total_macs + c1.total_macs, ref0.pixels)
    return Frame(blended, ref0.bit_depth), counter
