"""Line-feature detection with a discrete Radon transform.

Images are 2-D float arrays indexed ``img[row, col]``. Geometry uses
center-origin pixel coordinates ``x = col - cx``, ``y = row - cy`` with
``cx = (width - 1) / 2`` and ``cy = (height - 1) / 2``, and a line is the set
``x cos(theta) - y sin(theta) = rho`` with ``theta`` in [0, pi).

The detector runs five stages: Laplacian filter, edge detection, Radon
transform, thresholded peak search, and back-projection of each peak.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .errors import ImageTooSmall


@dataclass(frozen=True)
class DetectionParams:
    """Tuning knobs for :func:`detect_tripwires`.

    threshold, quantile
        Peaks must exceed the absolute sinogram level ``threshold``; when it
        is ``None`` the ``quantile`` of all sinogram values is used.
    nms_window
        (rho, theta) size in bins of the non-maximum suppression window.
    edge_quantile
        Fraction of pixels below the edge-magnitude cut.
    laplacian_sigma
        Gaussian pre-smoothing (pixels) ahead of the five-point Laplacian;
        0 applies the bare stencil.
    sinogram_sigma
        Gaussian smoothing (rho bins, theta bins) of the sinogram before the
        peak search. Line peaks are several bins wide in theta, and noise
        otherwise decides which bin of the plateau wins.
    """

    threshold: float | None = None
    quantile: float = 0.999
    nms_window: tuple[int, int] = (5, 5)
    edge_quantile: float = 0.95
    use_laplacian: bool = True
    laplacian_sigma: float = 0.7
    sinogram_sigma: tuple[float, float] = (0.5, 1.0)
    n_theta: int = 180
    n_rho: int | None = None
    overlay_value: float = 255.0

    def __post_init__(self):
        if self.threshold is None and not 0.0 < self.quantile < 1.0:
            raise ValueError(f"quantile must lie in (0, 1), got {self.quantile}")
        if not 0.0 < self.edge_quantile < 1.0:
            raise ValueError(f"edge_quantile must lie in (0, 1), got {self.edge_quantile}")
        if len(self.nms_window) != 2 or any(w < 1 or w % 2 == 0 for w in self.nms_window):
            raise ValueError(f"nms_window entries must be odd and >= 1, got {self.nms_window}")
        if self.n_theta < 1 or (self.n_rho is not None and self.n_rho < 1):
            raise ValueError("bin counts must be >= 1")
        if self.laplacian_sigma < 0 or min(self.sinogram_sigma) < 0:
            raise ValueError("smoothing scales must be >= 0")


@dataclass(frozen=True)
class Sinogram:
    """Discrete Radon transform; ``values[i_rho, i_theta]``."""

    values: np.ndarray
    rhos: np.ndarray
    thetas: np.ndarray

    @property
    def n_rho(self) -> int:
        return len(self.rhos)

    @property
    def n_theta(self) -> int:
        return len(self.thetas)


class LineFeature(NamedTuple):
    rho: float
    theta: float
    strength: float
    rho_index: int = -1
    theta_index: int = -1


def _as_image(img) -> np.ndarray:
    a = np.asarray(img, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("image intensities must be finite")
    return a


def _require_size(a, minimum=3):
    if a.shape[0] < minimum or a.shape[1] < minimum:
        raise ImageTooSmall(f"image {a.shape[1]}x{a.shape[0]} is smaller than {minimum}x{minimum}")


def laplacian_filter(img) -> np.ndarray:
    """Five-point Laplacian with replicated edges."""
    a = _as_image(img)
    _require_size(a)
    p = np.pad(a, 1, mode="edge")
    return p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:] - 4.0 * a


def gradient_magnitude(img) -> np.ndarray:
    a = _as_image(img)
    p = np.pad(a, 1, mode="edge")
    gx = 0.5 * (p[1:-1, 2:] - p[1:-1, :-2])
    gy = 0.5 * (p[2:, 1:-1] - p[:-2, 1:-1])
    return np.hypot(gx, gy)


def edge_detect(img, params: DetectionParams | None = None) -> np.ndarray:
    """Binary edge map: gradient magnitude above its ``edge_quantile``.

    Pixels with zero gradient are never edges, so flat images give all zeros.
    """
    params = params or DetectionParams()
    a = _as_image(img)
    _require_size(a)
    mag = gradient_magnitude(a)
    level = np.quantile(mag, params.edge_quantile)
    return ((mag > level) & (mag > 0)).astype(float)


def default_n_rho(width: int, height: int) -> int:
    """Odd bin count of at least the image diagonal, so rho = 0 is a bin center."""
    d = math.ceil(math.hypot(width, height))
    return d + 1 if d % 2 == 0 else d


def radon_transform(img, n_theta: int = 180, n_rho: int | None = None) -> Sinogram:
    """Pixel-driven discrete Radon transform.

    For every angle, each pixel adds its full intensity to the rho bin
    nearest to ``x cos(theta) - y sin(theta)``. The rho bins are ``n_rho``
    evenly spaced centers spanning [-D/2, D/2] with ``D = hypot(width,
    height)``, which covers every pixel center, so each angle's column sums
    to the image mass.
    """
    a = _as_image(img)
    if n_theta < 1:
        raise ValueError("n_theta must be >= 1")
    h, w = a.shape
    if n_rho is None:
        n_rho = default_n_rho(w, h)
    if n_rho < 1:
        raise ValueError("n_rho must be >= 1")
    half = 0.5 * math.hypot(w, h)
    rhos = np.linspace(-half, half, n_rho) if n_rho > 1 else np.zeros(1)
    thetas = math.pi * np.arange(n_theta) / n_theta
    values = np.zeros((n_rho, n_theta))

    rows, cols = np.nonzero(a)
    if rows.size == 0:
        return Sinogram(values, rhos, thetas)
    weights = a[rows, cols]
    x = cols - 0.5 * (w - 1)
    y = rows - 0.5 * (h - 1)
    step = rhos[1] - rhos[0] if n_rho > 1 else 1.0
    for k, th in enumerate(thetas):
        rho = x * math.cos(th) - y * math.sin(th)
        if n_rho > 1:
            idx = np.clip(np.rint((rho + half) / step).astype(int), 0, n_rho - 1)
        else:
            idx = np.zeros(rho.shape, dtype=int)
        values[:, k] = np.bincount(idx, weights=weights, minlength=n_rho)
    return Sinogram(values, rhos, thetas)


def _wrap_pad_theta(values, pad):
    # (rho, theta) and (-rho, theta + pi) are the same line, so the theta axis
    # wraps with the rho axis reversed (the rho grid is symmetric about 0)
    if pad == 0:
        return values
    n_theta = values.shape[1]
    idx = np.arange(-pad, n_theta + pad)
    wrapped = idx % n_theta
    out = values[:, wrapped].copy()
    flip = (idx < 0) | (idx >= n_theta)
    out[:, flip] = out[::-1, flip]
    return out


def smooth_sinogram(sino: Sinogram, sigma: tuple[float, float]) -> Sinogram:
    """Gaussian-smooth a sinogram, wrapping theta with the rho axis reversed."""
    s_rho, s_theta = sigma
    if s_rho == 0 and s_theta == 0:
        return sino
    pad = min(int(math.ceil(4 * s_theta)), sino.n_theta)
    v = _wrap_pad_theta(sino.values, pad)
    v = ndimage.gaussian_filter(v, (s_rho, s_theta), mode=("constant", "nearest"))
    return Sinogram(v[:, pad : pad + sino.n_theta], sino.rhos, sino.thetas)


def find_peaks(sino: Sinogram, params: DetectionParams | None = None) -> list[LineFeature]:
    """Sinogram bins above threshold that are maxima of their NMS window.

    A bin qualifies when its value exceeds the threshold and no bin in its
    ``nms_window`` neighborhood is larger. Ties inside a window (plateaus)
    are broken greedily: candidates are taken in descending strength and a
    candidate is dropped if an accepted peak lies inside its window.
    Results are sorted by descending strength.
    """
    params = params or DetectionParams()
    v = sino.values
    if v.size == 0:
        return []
    level = params.threshold if params.threshold is not None else float(np.quantile(v, params.quantile))
    wr, wt = params.nms_window
    hr, ht = wr // 2, wt // 2
    ht_eff = min(ht, v.shape[1])

    padded = _wrap_pad_theta(v, ht_eff)
    local_max = ndimage.maximum_filter(padded, size=(wr, 2 * ht_eff + 1), mode="constant", cval=-np.inf)
    local_max = local_max[:, ht_eff : ht_eff + v.shape[1]]
    cand = np.argwhere((v > level) & (v >= local_max))
    if cand.size == 0:
        return []
    order = np.lexsort((cand[:, 1], cand[:, 0], -v[cand[:, 0], cand[:, 1]]))
    cand = cand[order]

    n_rho, n_theta = v.shape
    accepted: list[tuple[int, int]] = []
    for r, t in cand:
        clash = False
        for ar, at in accepted:
            dt = t - at
            rr = ar
            # bring the accepted peak into the candidate's theta frame
            if dt > n_theta // 2:
                dt -= n_theta
                rr = n_rho - 1 - ar
            elif dt < -(n_theta // 2):
                dt += n_theta
                rr = n_rho - 1 - ar
            if abs(dt) <= ht and abs(r - rr) <= hr:
                clash = True
                break
        if not clash:
            accepted.append((int(r), int(t)))
    return [
        LineFeature(float(sino.rhos[r]), float(sino.thetas[t]), float(v[r, t]), r, t)
        for r, t in accepted
    ]


def backproject_peak(feature: LineFeature, width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    """Rasterize the line of ``feature`` clipped to a ``width`` x ``height`` image.

    Returns ``(rows, cols)`` index arrays. The line is stepped along its
    dominant axis, so every pixel center lies within half a pixel of it.
    """
    th = feature.theta
    c, s = math.cos(th), math.sin(th)
    cx, cy = 0.5 * (width - 1), 0.5 * (height - 1)
    if abs(c) >= abs(s):
        rows = np.arange(height)
        y = rows - cy
        cols = np.rint((feature.rho + y * s) / c + cx).astype(int)
    else:
        cols = np.arange(width)
        x = cols - cx
        rows = np.rint((x * c - feature.rho) / s + cy).astype(int)
    keep = (rows >= 0) & (rows < height) & (cols >= 0) & (cols < width)
    return rows[keep], cols[keep]


def detect_tripwires(img, params: DetectionParams | None = None) -> tuple[list[LineFeature], np.ndarray]:
    """Run the full detector and return ``(features, overlay)``.

    The overlay is a copy of the input with every back-projected line pixel
    set to ``params.overlay_value``.
    """
    params = params or DetectionParams()
    a = _as_image(img)
    _require_size(a)
    work = a
    if params.use_laplacian:
        if params.laplacian_sigma > 0:
            work = ndimage.gaussian_filter(work, params.laplacian_sigma, mode="nearest")
        work = laplacian_filter(work)
    edges = edge_detect(work, params)
    sino = smooth_sinogram(radon_transform(edges, params.n_theta, params.n_rho), params.sinogram_sigma)
    features = find_peaks(sino, params)
    overlay = a.copy()
    h, w = a.shape
    for f in features:
        rows, cols = backproject_peak(f, w, h)
        overlay[rows, cols] = params.overlay_value
    return features, overlay


def render_lines(shape, lines, background=0.0, noise_sigma=0.0, rng=None, width=1.0) -> np.ndarray:
    """Synthetic test image containing straight lines.

    ``lines`` holds ``(rho, theta, contrast)`` triples in the center-origin
    convention; each line adds ``contrast * max(0, 1 - d / width)`` at
    perpendicular distance ``d``. Negative contrast draws a dark line.
    """
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w].astype(float)
    x = xx - 0.5 * (w - 1)
    y = yy - 0.5 * (h - 1)
    img = np.full(shape, float(background))
    for rho, theta, contrast in lines:
        d = np.abs(x * math.cos(theta) - y * math.sin(theta) - rho)
        img += contrast * np.clip(1.0 - d / width, 0.0, None)
    if noise_sigma > 0:
        rng = np.random.default_rng(rng)
        img += rng.normal(0.0, noise_sigma, size=shape)
    return img
