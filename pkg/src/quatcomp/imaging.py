"""Color image codec, mask pattern generators, and quality metrics.

An RGB image maps to a pure quaternion matrix: the red, green, and blue
channels land on the three imaginary planes and the real plane stays zero.
Metrics (PSNR, SSIM) operate on the three channel planes with a 255 peak.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .completion import Mask
from .quat import DimensionMismatchError, QMatrix


class ImageFormatError(ValueError):
    """Input is not an 8-bit RGB image."""


class GeometryError(ValueError):
    """A mask pattern does not fit inside the grid."""


# -- codec ----------------------------------------------------------------

def encode(image: np.ndarray) -> QMatrix:
    """8-bit RGB (H x W x 3) array to a pure quaternion matrix."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ImageFormatError(f"expected H x W x 3 RGB, got {image.shape}")
    if image.dtype != np.uint8:
        raise ImageFormatError(f"expected uint8 samples, got {image.dtype}")
    chans = image.astype(np.float64)
    zero = np.zeros(image.shape[:2])
    return QMatrix.from_planes(zero, chans[:, :, 0], chans[:, :, 1],
                               chans[:, :, 2])


def decode(q: QMatrix) -> np.ndarray:
    """Quaternion matrix back to uint8 RGB, clamping each channel to [0, 255]."""
    chans = np.clip(np.round(q.planes[1:4]), 0, 255).astype(np.uint8)
    return np.moveaxis(chans, 0, 2)


def load_image(path: str) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def save_image(image: np.ndarray, path: str) -> None:
    Image.fromarray(image, mode="RGB").save(path)


# -- mask patterns --------------------------------------------------------

@dataclass(frozen=True)
class RandomPattern:
    """Each pixel missing independently with probability p."""

    p: float
    seed: int = 0

    def missing(self, m: int, n: int) -> np.ndarray:
        if not 0.0 <= self.p <= 1.0:
            raise GeometryError(f"missing rate {self.p} outside [0, 1]")
        rng = np.random.default_rng(self.seed)
        return rng.random((m, n)) < self.p


@dataclass(frozen=True)
class BlockPattern:
    """Axis-aligned missing rectangle."""

    row: int
    col: int
    height: int
    width: int

    def missing(self, m: int, n: int) -> np.ndarray:
        if (self.row < 0 or self.col < 0 or self.height < 1 or self.width < 1
                or self.row + self.height > m or self.col + self.width > n):
            raise GeometryError(
                f"block {self!r} outside {m}x{n} grid")
        out = np.zeros((m, n), dtype=bool)
        out[self.row:self.row + self.height,
            self.col:self.col + self.width] = True
        return out


@dataclass(frozen=True)
class TrianglePattern:
    """Filled isoceles triangle, apex up, widening to ``base`` columns.

    Height is base * sqrt(3) / 2 rounded, so the shape approximates an
    equilateral triangle on a square pixel grid.
    """

    apex_row: int
    apex_col: int
    base: int

    @property
    def height(self) -> int:
        return max(1, round(self.base * math.sqrt(3.0) / 2.0))

    def missing(self, m: int, n: int) -> np.ndarray:
        h = self.height
        half = self.base / 2.0
        if (self.apex_row < 0 or self.apex_row + h > m
                or self.apex_col - half < -0.5
                or self.apex_col + half > n - 0.5):
            raise GeometryError(f"triangle {self!r} outside {m}x{n} grid")
        out = np.zeros((m, n), dtype=bool)
        for d in range(h):
            hw = half * (d + 1) / h
            lo = int(math.ceil(self.apex_col - hw))
            hi = int(math.floor(self.apex_col + hw))
            out[self.apex_row + d, max(lo, 0):hi + 1] = True
        return out


@dataclass(frozen=True)
class DiamondPattern:
    """Filled diamond |di| + |dj| <= halfdiag around a center pixel."""

    row: int
    col: int
    halfdiag: int

    def missing(self, m: int, n: int) -> np.ndarray:
        t = self.halfdiag
        if (t < 0 or self.row - t < 0 or self.row + t >= m
                or self.col - t < 0 or self.col + t >= n):
            raise GeometryError(f"diamond {self!r} outside {m}x{n} grid")
        ii, jj = np.indices((m, n))
        return np.abs(ii - self.row) + np.abs(jj - self.col) <= t


MaskPattern = RandomPattern | BlockPattern | TrianglePattern | DiamondPattern


def make_mask(patterns: MaskPattern | list[MaskPattern],
              m: int, n: int) -> Mask:
    """Observation mask from one pattern or the union of several."""
    if not isinstance(patterns, list):
        patterns = [patterns]
    missing = np.zeros((m, n), dtype=bool)
    for pat in patterns:
        missing |= pat.missing(m, n)
    return Mask(~missing)


def parse_pattern(text: str) -> MaskPattern:
    """Parse a CLI pattern string such as ``random:p=0.5,seed=7``."""
    kind, _, rest = text.partition(":")
    params: dict[str, float] = {}
    if rest:
        for item in rest.split(","):
            key, _, value = item.partition("=")
            if not value:
                raise ValueError(f"bad pattern parameter {item!r}")
            params[key.strip()] = float(value)
    try:
        if kind == "random":
            return RandomPattern(p=params["p"],
                                 seed=int(params.get("seed", 0)))
        if kind == "block":
            return BlockPattern(row=int(params["row"]), col=int(params["col"]),
                                height=int(params["height"]),
                                width=int(params["width"]))
        if kind == "triangle":
            return TrianglePattern(apex_row=int(params["row"]),
                                   apex_col=int(params["col"]),
                                   base=int(params["base"]))
        if kind == "diamond":
            return DiamondPattern(row=int(params["row"]), col=int(params["col"]),
                                  halfdiag=int(params["half"]))
    except KeyError as exc:
        raise ValueError(f"pattern {kind!r} missing parameter {exc}") from exc
    raise ValueError(f"unknown pattern kind {kind!r}")


# -- mask serialization ---------------------------------------------------

def save_mask_png(mask: Mask, path: str) -> None:
    """255 = observed, 0 = missing."""
    img = np.where(mask.observed, 255, 0).astype(np.uint8)
    Image.fromarray(img, mode="L").save(path)


def load_mask_png(path: str) -> Mask:
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"))
    return Mask(arr >= 128)


def save_mask_json(mask: Mask, path: str) -> None:
    missing = np.argwhere(~mask.observed)
    payload = {"rows": mask.rows, "cols": mask.cols,
               "missing": [[int(i), int(j)] for i, j in missing]}
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_mask_json(path: str) -> Mask:
    with open(path) as fh:
        payload = json.load(fh)
    observed = np.ones((payload["rows"], payload["cols"]), dtype=bool)
    for i, j in payload["missing"]:
        observed[i, j] = False
    return Mask(observed)


def load_mask(path: str) -> Mask:
    if path.endswith(".json"):
        return load_mask_json(path)
    return load_mask_png(path)


# -- metrics --------------------------------------------------------------

def _channels(q: QMatrix) -> np.ndarray:
    return q.planes[1:4]


def psnr(x: QMatrix, y: QMatrix) -> float:
    """Peak signal-to-noise ratio in dB over all three channel planes.

    Identical inputs return +inf.
    """
    if x.shape != y.shape:
        raise DimensionMismatchError(
            f"shape mismatch: {x.shape} vs {y.shape}")
    mse = float(np.mean((_channels(x) - _channels(y)) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 / mse)


def _gaussian_kernel(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    """Normalized 1-D Gaussian; the 2-D window is its outer product."""
    coords = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(coords ** 2) / (2.0 * sigma ** 2))
    return g / g.sum()


def _windowed_means(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Valid-mode Gaussian-weighted local means via separable correlation."""
    tmp = np.apply_along_axis(
        lambda r: np.correlate(r, kernel, mode="valid"), 1, plane)
    return np.apply_along_axis(
        lambda c: np.correlate(c, kernel, mode="valid"), 0, tmp)


def ssim(x: QMatrix, y: QMatrix, window: int = 11, sigma: float = 1.5,
         k1: float = 0.01, k2: float = 0.03, peak: float = 255.0) -> float:
    """Mean local structural similarity, per channel then averaged.

    Gaussian 11x11 window with sigma 1.5 and the standard stabilizers
    C1 = (k1 L)^2, C2 = (k2 L)^2 at peak L = 255.
    """
    if x.shape != y.shape:
        raise DimensionMismatchError(
            f"shape mismatch: {x.shape} vs {y.shape}")
    if x.rows < window or x.cols < window:
        raise DimensionMismatchError(
            f"image {x.shape} smaller than the {window}x{window} window")
    kernel = _gaussian_kernel(window, sigma)
    c1 = (k1 * peak) ** 2
    c2 = (k2 * peak) ** 2
    scores = []
    for xp, yp in zip(_channels(x), _channels(y)):
        mu_x = _windowed_means(xp, kernel)
        mu_y = _windowed_means(yp, kernel)
        mu_xx = _windowed_means(xp * xp, kernel)
        mu_yy = _windowed_means(yp * yp, kernel)
        mu_xy = _windowed_means(xp * yp, kernel)
        var_x = mu_xx - mu_x ** 2
        var_y = mu_yy - mu_y ** 2
        cov = mu_xy - mu_x * mu_y
        num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
        den = (mu_x ** 2 + mu_y ** 2 + c1) * (var_x + var_y + c2)
        scores.append(float(np.mean(num / den)))
    return float(np.mean(scores))
