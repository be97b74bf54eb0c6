"""
Interpolation filters for sub-pixel motion compensation.

Two families are provided:

* ``POLYNOMIAL`` -- bilinear (N=2) and bicubic (N=4) filters obtained by
  applying a fixed N x N matrix to the power vector ``[1, s, ..., s**(N-1)]``.
* ``WINDOWED_SINC`` -- cosine-windowed sinc taps for any even N, as used by
  HEVC/VVC-style luma interpolation.

Tap ``i`` (1-based) of an N-tap filter weighs the sample at integer offset
``i - N/2`` from the base position ``k``, so the filter at ``s = 0`` is a unit
impulse at tap ``N/2``.

Filters are computed in double precision with the :mod:`math` module so the
same fraction always yields the same bits, whether it is derived on the fly or
read back from a :class:`FilterTable`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "FilterKind",
    "FilterSpec",
    "Filter",
    "FilterTable",
    "B_LIN",
    "B_CUB",
    "derive_polynomial_filter",
    "derive_sinc_filter",
    "derive_filter",
    "build_filter_table",
    "default_spec",
]


class FilterKind(enum.Enum):
    POLYNOMIAL = "poly"
    WINDOWED_SINC = "sinc"

    @classmethod
    def parse(cls, name: str) -> "FilterKind":
        aliases = {
            "poly": cls.POLYNOMIAL,
            "polynomial": cls.POLYNOMIAL,
            "sinc": cls.WINDOWED_SINC,
            "windowed_sinc": cls.WINDOWED_SINC,
        }
        try:
            return aliases[name.lower()]
        except KeyError:
            raise ConfigurationError(
                f"unknown filter kind {name!r}; expected one of 'poly', 'sinc'"
            ) from None


# Integer matrices; B_CUB carries an overall factor of 1/4.
B_LIN = ((1, -1),
         (0, 1))
B_CUB = ((0, -3, 6, -3),
         (4, 0, -9, 5),
         (0, 3, 6, -5),
         (0, 0, -3, 3))
_B_CUB_SCALE = 0.25

POLYNOMIAL_TAPS = (2, 4)

SUPPORTED_MATRIX = (
    "poly: N in {2, 4}; sinc: any even N >= 2"
)


@dataclass(frozen=True)
class FilterSpec:
    kind: FilterKind
    taps: int
    normalize: bool = True

    def __post_init__(self):
        _check_taps(self.kind, self.taps)


@dataclass(frozen=True)
class Filter:
    coefficients: tuple[float, ...]
    fraction: float

    @property
    def taps(self) -> int:
        return len(self.coefficients)

    def as_array(self) -> np.ndarray:
        return np.array(self.coefficients, dtype=np.float64)


@dataclass(frozen=True)
class FilterTable:
    """Precomputed filters for the fractions ``q / delta``, ``q = 0..delta-1``."""

    spec: FilterSpec
    delta: int
    filters: tuple[Filter, ...]
    _coeffs: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if len(self.filters) != self.delta:
            raise ConfigurationError("table must hold exactly delta filters")
        arr = np.array([f.coefficients for f in self.filters], dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "_coeffs", arr)

    @property
    def coefficient_count(self) -> int:
        return self.spec.taps * self.delta

    @property
    def coefficients(self) -> np.ndarray:
        """Read-only ``(delta, N)`` array of all taps."""
        return self._coeffs

    def lookup(self, q: int) -> Filter:
        return self.filters[q]


def _check_taps(kind: FilterKind, taps: int) -> None:
    if not isinstance(taps, (int, np.integer)) or isinstance(taps, bool):
        raise ConfigurationError(f"filter length must be an integer, got {taps!r}")
    if kind is FilterKind.POLYNOMIAL:
        if taps not in POLYNOMIAL_TAPS:
            raise ConfigurationError(
                f"polynomial filters support N in {{2, 4}}, got N={taps} "
                f"(supported: {SUPPORTED_MATRIX})"
            )
    elif taps < 2 or taps % 2:
        raise ConfigurationError(
            f"windowed-sinc filters need an even N >= 2, got N={taps} "
            f"(supported: {SUPPORTED_MATRIX})"
        )


def _check_fraction(s: float) -> float:
    s = float(s)
    if not 0.0 <= s < 1.0:
        raise ConfigurationError(f"fraction must lie in [0, 1), got {s!r}")
    return s


def derive_polynomial_filter(N: int, s: float) -> Filter:
    """Bilinear (N=2) or bicubic (N=4) filter for fraction ``s``.

    ``h = B @ [s**0, ..., s**(N-1)]``, evaluated row by row in that order.
    """
    _check_taps(FilterKind.POLYNOMIAL, N)
    s = _check_fraction(s)
    powers = [s ** p for p in range(N)]
    if N == 2:
        matrix, scale = B_LIN, 1.0
    else:
        matrix, scale = B_CUB, _B_CUB_SCALE
    taps = []
    for row in matrix:
        acc = 0.0
        for b, p in zip(row, powers):
            acc += b * p
        taps.append(acc * scale)
    return Filter(tuple(taps), s)


def _sinc(u: float) -> float:
    # Exact at integers: sin(pi * k) is not exactly zero in floating point.
    if u == math.floor(u):
        return 1.0 if u == 0 else 0.0
    x = math.pi * u
    return math.sin(x) / x


def derive_sinc_filter(N: int, s: float, normalize: bool = True) -> Filter:
    """Cosine-windowed sinc filter with ``N`` taps for fraction ``s``.

    ``h_i = cos((s - k_i) * pi / N) * sinc(s - k_i)`` with ``k_i = i - N/2``.
    With ``normalize`` the taps are rescaled to sum to one.
    """
    _check_taps(FilterKind.WINDOWED_SINC, N)
    s = _check_fraction(s)
    half = N // 2
    taps = []
    for i in range(1, N + 1):
        u = s - (i - half)
        taps.append(math.cos(u * math.pi / N) * _sinc(u))
    if normalize:
        total = math.fsum(taps)
        assert total != 0.0
        taps = [t / total for t in taps]
    return Filter(tuple(taps), s)


def derive_filter(spec: FilterSpec, s: float) -> Filter:
    if spec.kind is FilterKind.POLYNOMIAL:
        return derive_polynomial_filter(spec.taps, s)
    return derive_sinc_filter(spec.taps, s, spec.normalize)


@lru_cache(maxsize=64)
def build_filter_table(spec: FilterSpec, delta: int) -> FilterTable:
    """Precompute the ``delta`` filters of ``spec`` on the grid ``q / delta``.

    Entry ``q`` is derived at exactly ``q / delta``, the same value the
    quantizer produces, so lookups and direct derivation agree bit for bit.
    """
    if not isinstance(delta, (int, np.integer)) or isinstance(delta, bool) or delta < 1:
        raise ConfigurationError(f"delta must be an integer >= 1, got {delta!r}")
    delta = int(delta)
    filters = tuple(derive_filter(spec, q / delta) for q in range(delta))
    return FilterTable(spec, delta, filters)


def default_spec(taps: int, kind: FilterKind | None = None, normalize: bool = True) -> FilterSpec:
    """Pick the conventional family for ``taps``: polynomial for 2 and 4, sinc above."""
    if kind is None:
        kind = FilterKind.POLYNOMIAL if taps in POLYNOMIAL_TAPS else FilterKind.WINDOWED_SINC
    return FilterSpec(kind, taps, normalize)
