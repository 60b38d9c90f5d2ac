"""Complex 2D fields: unitary Fourier transforms, windowing, and blob I/O.

A field is a 2D ``numpy.ndarray`` of ``complex128`` samples (row-major,
dimensionless amplitude).  Objects, probes, exit waves, and detector waves
are all fields; diffraction patterns are the squared moduli of fields.

Transforms use the unitary (``norm="ortho"``) scaling with the zero-frequency
component at the array center, so Parseval's identity holds exactly and
patterns match the centered layout of a physical detector.
"""

from __future__ import annotations

import struct
from typing import NamedTuple

import numpy as np

from .errors import BundleFormatError

C64_MAGIC = b"PTYC"
C64_VERSION = 1


class WindowOffset(NamedTuple):
    """Top-left corner (in pixels) of a detector-sized window on the object canvas."""

    row: int
    col: int


def as_field(data) -> np.ndarray:
    """Validate and return ``data`` as a 2D complex128 array."""
    arr = np.asarray(data, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"field must be a non-empty 2D array, got shape {arr.shape}")
    return arr


def dft2_unitary(field) -> np.ndarray:
    """Centered unitary 2D DFT (real-space center -> zero frequency at array center)."""
    f = as_field(field)
    return np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(f), norm="ortho"))


def idft2_unitary(field) -> np.ndarray:
    """Exact inverse of :func:`dft2_unitary` (up to floating round-off)."""
    f = as_field(field)
    return np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(f), norm="ortho"))


def _check_window(shape, offset, h: int, w: int) -> WindowOffset:
    off = WindowOffset(int(offset[0]), int(offset[1]))
    if h < 1 or w < 1:
        raise ValueError(f"window dims must be positive, got {h}x{w}")
    if off.row < 0 or off.col < 0 or off.row + h > shape[0] or off.col + w > shape[1]:
        raise ValueError(
            f"window {h}x{w} at offset ({off.row}, {off.col}) exceeds canvas {shape[0]}x{shape[1]}"
        )
    return off


def crop_window(obj, offset, h: int, w: int) -> np.ndarray:
    """Return a copy of the ``h x w`` sub-field of ``obj`` at ``offset``."""
    o = as_field(obj)
    off = _check_window(o.shape, offset, h, w)
    return o[off.row : off.row + h, off.col : off.col + w].copy()


def insert_window(obj, patch, offset) -> np.ndarray:
    """Return a copy of ``obj`` with the window at ``offset`` replaced by ``patch``.

    Samples outside the window are bit-identical to the input.
    """
    o = as_field(obj)
    p = as_field(patch)
    off = _check_window(o.shape, offset, p.shape[0], p.shape[1])
    out = o.copy()
    out[off.row : off.row + p.shape[0], off.col : off.col + p.shape[1]] = p
    return out


def write_c64(path, field) -> None:
    """Write a field as a c64 blob: "PTYC", u32 version, u32 H, u32 W, then
    row-major interleaved (re, im) little-endian float32 pairs."""
    f = as_field(field)
    h, w = f.shape
    with open(path, "wb") as fh:
        fh.write(C64_MAGIC)
        fh.write(struct.pack("<III", C64_VERSION, h, w))
        fh.write(np.ascontiguousarray(f.astype("<c8")).tobytes())


def read_c64(path) -> np.ndarray:
    """Read a c64 blob written by :func:`write_c64`; returns complex128."""
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) < 16 or header[:4] != C64_MAGIC:
            raise BundleFormatError(f"{path}: not a c64 blob (bad magic)")
        version, h, w = struct.unpack("<III", header[4:16])
        if version != C64_VERSION:
            raise BundleFormatError(f"{path}: unsupported c64 version {version}")
        payload = fh.read()
    expected = h * w * 8
    if len(payload) != expected:
        raise BundleFormatError(
            f"{path}: payload is {len(payload)} bytes, expected {expected} for {h}x{w}"
        )
    data = np.frombuffer(payload, dtype="<c8").reshape(h, w)
    return data.astype(np.complex128)
