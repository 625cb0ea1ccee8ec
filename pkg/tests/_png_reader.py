"""Minimal pure-stdlib PNG decoder used to verify rendered files independently.

Handles 8-bit grayscale (color type 0) and RGB (color type 2) with all five
standard scanline filters. Deliberately shares no code with the production
writer.
"""

import struct
import zlib

_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def read_png(path):
    """Return (pixels, mode) where pixels is a list of rows of ints/tuples."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != _SIGNATURE:
        raise ValueError("not a PNG file")
    pos = 8
    width = height = bit_depth = color_type = None
    idat = b""
    while pos < len(data):
        (length,) = struct.unpack(">I", data[pos : pos + 4])
        ctype = data[pos + 4 : pos + 8]
        chunk = data[pos + 8 : pos + 8 + length]
        pos += 12 + length
        if ctype == b"IHDR":
            width, height, bit_depth, color_type = struct.unpack(">IIBB", chunk[:10])
        elif ctype == b"IDAT":
            idat += chunk
        elif ctype == b"IEND":
            break
    if bit_depth != 8 or color_type not in (0, 2):
        raise ValueError(f"unsupported PNG: depth={bit_depth} color={color_type}")
    channels = 1 if color_type == 0 else 3
    raw = zlib.decompress(idat)
    stride = width * channels
    rows = []
    previous = bytearray(stride)
    offset = 0
    for _ in range(height):
        filter_type = raw[offset]
        line = bytearray(raw[offset + 1 : offset + 1 + stride])
        offset += 1 + stride
        rows.append(_unfilter(filter_type, line, previous, channels))
        previous = rows[-1]
    if channels == 1:
        pixels = [list(r) for r in rows]
        mode = "L"
    else:
        pixels = [
            [tuple(r[i : i + 3]) for i in range(0, stride, 3)] for r in rows
        ]
        mode = "RGB"
    return pixels, mode


def _unfilter(filter_type, line, previous, bpp):
    if filter_type == 0:
        return line
    if filter_type == 1:
        for i in range(bpp, len(line)):
            line[i] = (line[i] + line[i - bpp]) & 0xFF
        return line
    if filter_type == 2:
        for i in range(len(line)):
            line[i] = (line[i] + previous[i]) & 0xFF
        return line
    if filter_type == 3:
        for i in range(len(line)):
            left = line[i - bpp] if i >= bpp else 0
            line[i] = (line[i] + (left + previous[i]) // 2) & 0xFF
        return line
    if filter_type == 4:
        for i in range(len(line)):
            left = line[i - bpp] if i >= bpp else 0
            up = previous[i]
            up_left = previous[i - bpp] if i >= bpp else 0
            line[i] = (line[i] + _paeth(left, up, up_left)) & 0xFF
        return line
    raise ValueError(f"unknown PNG filter {filter_type}")


def _paeth(a, b, c):
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    if pb <= pc:
        return b
    return c
