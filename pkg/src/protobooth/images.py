"""Deterministic raster generation and content addressing for view images."""

from __future__ import annotations

import hashlib
import struct

from .model import ImageRef, ViewAngle

MEDIA_BMP = "image/bmp"

_EXT_BY_MEDIA = {
    "image/bmp": "bmp",
    "image/png": "png",
    "image/jpeg": "jpg",
}
_MEDIA_BY_EXT = {ext: media for media, ext in _EXT_BY_MEDIA.items()}


def ext_for_media(media_type: str) -> str:
    return _EXT_BY_MEDIA.get(media_type, "bin")


def media_for_ext(ext: str) -> str:
    return _MEDIA_BY_EXT.get(ext.lower().lstrip("."), "application/octet-stream")


def content_hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def image_ref_for(data: bytes, media_type: str = MEDIA_BMP) -> ImageRef:
    return ImageRef(content_hash(data), media_type, len(data))


def _noise(key: str, length: int) -> bytes:
    out = bytearray()
    counter = 0
    while len(out) < length:
        out += hashlib.sha256(f"{key}#{counter}".encode()).digest()
        counter += 1
    return bytes(out[:length])


def render_view_image(
    booth_id: str,
    capture_id: str,
    angle: ViewAngle,
    width: int = 48,
    height: int = 27,
) -> bytes:
    """Produce a tiny 24-bit BMP whose bytes depend only on (booth, capture, angle).

    The capture id and angle name are written verbatim into the first pixel
    row; the remaining pixels are hash-derived noise. BMP is used because it
    is byte-exact without a compressor and browsers can display it.
    """
    row_bytes = width * 3
    padding = (4 - row_bytes % 4) % 4
    stride = row_bytes + padding

    pixels = bytearray(_noise(f"{booth_id}/{capture_id}/{angle.value}", stride * height))
    label = f"{capture_id}:{angle.value}".encode()[:row_bytes]
    pixels[0 : len(label)] = label
    for row in range(height):  # zero the pad bytes so output is canonical
        start = row * stride + row_bytes
        pixels[start : start + padding] = b"\x00" * padding

    pixel_offset = 14 + 40
    file_size = pixel_offset + len(pixels)
    header = struct.pack("<2sIHHI", b"BM", file_size, 0, 0, pixel_offset)
    info = struct.pack(
        "<IiiHHIIiiII", 40, width, height, 1, 24, 0, len(pixels), 2835, 2835, 0, 0
    )
    return header + info + bytes(pixels)
