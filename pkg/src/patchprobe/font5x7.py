"""Bundled 5x7 monospaced bitmap glyphs.

Covers digits, comma, period, percent, dollar, minus, uppercase A-Z, and
space. No anti-aliasing anywhere: each glyph is a binary mask, so renders
are bit-deterministic.
"""

from __future__ import annotations

import numpy as np

from .errors import UnsupportedGlyph

GLYPH_ROWS = 7
GLYPH_COLS = 5

_GLYPHS = {
    "0": (".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."),
    "1": ("..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."),
    "2": (".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"),
    "3": ("#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."),
    "4": ("...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."),
    "5": ("#####", "#....", "####.", "....#", "....#", "#...#", ".###."),
    "6": ("..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."),
    "7": ("#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."),
    "8": (".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."),
    "9": (".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."),
    ",": (".....", ".....", ".....", ".....", "..##.", "..#..", ".#..."),
    ".": (".....", ".....", ".....", ".....", ".....", "..##.", "..##."),
    "%": ("##..#", "##..#", "...#.", "..#..", ".#...", "#..##", "#..##"),
    "$": ("..#..", ".####", "#.#..", ".###.", "..#.#", "####.", "..#.."),
    "-": (".....", ".....", ".....", "#####", ".....", ".....", "....."),
    " ": (".....", ".....", ".....", ".....", ".....", ".....", "....."),
    "A": (".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"),
    "B": ("####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."),
    "C": (".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."),
    "D": ("####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."),
    "E": ("#####", "#....", "#....", "####.", "#....", "#....", "#####"),
    "F": ("#####", "#....", "#....", "####.", "#....", "#....", "#...."),
    "G": (".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".###."),
    "H": ("#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"),
    "I": (".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."),
    "J": ("..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."),
    "K": ("#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"),
    "L": ("#....", "#....", "#....", "#....", "#....", "#....", "#####"),
    "M": ("#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"),
    "N": ("#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#", "#...#"),
    "O": (".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."),
    "P": ("####.", "#...#", "#...#", "####.", "#....", "#....", "#...."),
    "Q": (".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"),
    "R": ("####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"),
    "S": (".####", "#....", "#....", ".###.", "....#", "....#", "####."),
    "T": ("#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."),
    "U": ("#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."),
    "V": ("#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."),
    "W": ("#...#", "#...#", "#...#", "#.#.#", "#.#.#", "##.##", "#...#"),
    "X": ("#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"),
    "Y": ("#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."),
    "Z": ("#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"),
}

SUPPORTED = frozenset(_GLYPHS)

_MASKS = {
    ch: np.array([[c == "#" for c in row] for row in rows], dtype=bool)
    for ch, rows in _GLYPHS.items()
}


def glyph_mask(ch: str, font_px: int) -> np.ndarray:
    """Boolean mask of shape (font_px, cell_width) via nearest-neighbor scaling."""
    if ch not in _MASKS:
        raise UnsupportedGlyph(f"no glyph for {ch!r}")
    base = _MASKS[ch]
    cell_w = cell_width(font_px)
    rows = (np.arange(font_px) * GLYPH_ROWS) // font_px
    cols = (np.arange(cell_w) * GLYPH_COLS) // cell_w
    return base[np.ix_(rows, cols)]


def cell_width(font_px: int) -> int:
    return max(1, (font_px * GLYPH_COLS) // GLYPH_ROWS)


def glyph_spacing(font_px: int) -> int:
    return max(1, font_px // GLYPH_ROWS)


def text_width(text: str, font_px: int) -> int:
    if not text:
        return 0
    return len(text) * cell_width(font_px) + (len(text) - 1) * glyph_spacing(font_px)


def render_text_mask(text: str, font_px: int) -> np.ndarray:
    """Boolean mask of shape (font_px, text_width) for a whole string."""
    for ch in text:
        if ch not in _MASKS:
            raise UnsupportedGlyph(f"no glyph for {ch!r}")
    out = np.zeros((font_px, text_width(text, font_px)), dtype=bool)
    cw = cell_width(font_px)
    advance = cw + glyph_spacing(font_px)
    for i, ch in enumerate(text):
        out[:, i * advance : i * advance + cw] = glyph_mask(ch, font_px)
    return out
