import ast
import json
import struct

import numpy as np
from PIL import Image


def write_png(path, pixels):
    Image.fromarray(np.asarray(pixels, dtype=np.uint8)).save(path, format="PNG")
    return path


def table_image(h=392, w=392, seed=0):
    """A page-like image: white background, grid lines, a few dark blocks."""
    rng = np.random.default_rng(seed)
    img = np.full((h, w, 3), 255, dtype=np.uint8)
    for y in range(0, h, 48):
        img[y, :] = 0
    for x in range(0, w, 64):
        img[:, x] = 0
    for _ in range(6):
        y, x = int(rng.integers(0, h - 12)), int(rng.integers(0, w - 24))
        img[y : y + 10, x : x + 20] = rng.integers(0, 128, size=3)
    return img


def read_npy_header_and_payload(path):
    """Parse an NPY v1.0 file by hand so tests exercise the raw format contract."""
    raw = path.read_bytes()
    assert raw[:6] == b"\x93NUMPY"
    assert raw[6:8] == b"\x01\x00"
    (hlen,) = struct.unpack("<H", raw[8:10])
    header = ast.literal_eval(raw[10 : 10 + hlen].decode("latin1").strip())
    payload = raw[10 + hlen :]
    matrix = np.frombuffer(payload, dtype=header["descr"]).reshape(header["shape"])
    return header, matrix


def read_sidecar(npy_path):
    return json.loads(npy_path.with_suffix(".json").read_text())
