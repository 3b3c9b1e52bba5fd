"""Image patch statistics in the DCT and Daubechies-4 wavelet domains.

Patches are read from 8-bit (or 16-bit) binary PGM files and rescaled to
[0, 1].  Their sorted coefficient magnitudes, averaged rank by rank, are
compared with the expected order statistics of iid models, approximated
by the quantile rule ``|x|*_n ~ Fbar^{-1}(1 - n/(N+1))``.  The rule is an
O(1/N) approximation of the exact expectation and is labelled as such.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import fft

from .distributions import DistributionModel, parse_distribution
from .errors import DomainError
from .rng import make_rng

TRANSFORMS = ("dct", "db4", "identity")

# Hand-tuned model fits to natural-image coefficients
MODEL_PRESETS = {
    "gpd": "ts:1:2.69:8",
    "student": "ts:2:2.64:4.5",
    "ggd": "ggd:0.7:5",
}

_S3 = math.sqrt(3.0)
DB4_LOWPASS = np.array([1 + _S3, 3 + _S3, 3 - _S3, 1 - _S3]) / (4 * math.sqrt(2.0))
DB4_HIGHPASS = np.array([(-1) ** n * DB4_LOWPASS[3 - n] for n in range(4)])


def _square(patch):
    p = np.asarray(patch, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape[0] < 2:
        raise DomainError(f"expected a square patch of side >= 2, got shape {p.shape}")
    return p


def dct2(patch):
    """Orthonormal separable 2D DCT-II."""
    return fft.dctn(_square(patch), type=2, norm="ortho")


def idct2(coeffs):
    return fft.idctn(_square(coeffs), type=2, norm="ortho")


def db4_matrix(length) -> np.ndarray:
    """One analysis level as an orthogonal ``length x length`` matrix.

    Rows ``i < length/2`` hold the lowpass filter at offset ``2i`` and the
    rest the highpass filter, both wrapped periodically.
    """
    if length < 2 or length % 2:
        raise DomainError(f"length must be even and >= 2, got {length}")
    half = length // 2
    w = np.zeros((length, length))
    for i in range(half):
        for n in range(4):
            col = (2 * i + n) % length
            w[i, col] += DB4_LOWPASS[n]
            w[half + i, col] += DB4_HIGHPASS[n]
    return w


def _levels_for(side, levels):
    j = int(round(math.log2(side)))
    if levels is None:
        levels = j
    levels = int(levels)
    if levels < 0 or side % (1 << levels):
        raise DomainError(f"side {side} is not divisible by 2^{levels}")
    return levels


def dwt2_db4(patch, levels=None):
    """Periodic 2D Daubechies-4 wavelet transform (Mallat layout).

    Each level transforms rows and columns of the current coarse block in
    the top-left corner.  The default depth decomposes down to one
    scaling coefficient.
    """
    c = _square(patch).copy()
    side = c.shape[0]
    levels = _levels_for(side, levels)
    size = side
    for _ in range(levels):
        w = db4_matrix(size)
        c[:size, :size] = w @ c[:size, :size] @ w.T
        size //= 2
    return c


def idwt2_db4(coeffs, levels=None):
    c = _square(coeffs).copy()
    side = c.shape[0]
    levels = _levels_for(side, levels)
    for lev in reversed(range(levels)):
        size = side >> lev
        w = db4_matrix(size)
        c[:size, :size] = w.T @ c[:size, :size] @ w
    return c


def transform(patch, kind):
    if kind == "dct":
        return dct2(patch)
    if kind == "db4":
        return dwt2_db4(patch)
    if kind == "identity":  # pixel domain, for checks on iid fills
        return _square(patch)
    raise DomainError(f"unknown transform {kind!r}; choose from {TRANSFORMS}")


# -- images and patches -------------------------------------------------------


def _pgm_tokens(data, count):
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(data) and chr(data[pos]).isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not chr(data[pos]).isspace():
            pos += 1
        if start == pos:
            raise DomainError("truncated PGM header")
        tokens.append(data[start:pos])
    return tokens, pos + 1  # exactly one whitespace byte precedes the raster


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) PGM image as floats in [0, 1]."""
    data = Path(path).read_bytes()
    (magic, w, h, maxval), pos = _pgm_tokens(data, 4)
    if magic != b"P5":
        raise DomainError(f"{path}: not a binary PGM (magic {magic!r})")
    w, h, maxval = int(w), int(h), int(maxval)
    if not 0 < maxval < 65536:
        raise DomainError(f"{path}: bad maxval {maxval}")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
    raster = np.frombuffer(data, dtype=dtype, count=w * h, offset=pos)
    return raster.reshape(h, w).astype(float) / maxval


def write_pgm(path, image, maxval=255):
    """Write a [0, 1] image as an 8-bit P5 PGM."""
    img = np.clip(np.asarray(image, dtype=float), 0.0, 1.0)
    h, w = img.shape
    raster = np.round(img * maxval).astype(np.uint8)
    Path(path).write_bytes(f"P5\n{w} {h}\n{maxval}\n".encode() + raster.tobytes())


@dataclass(frozen=True, eq=False)
class PatchSet:
    patches: np.ndarray  # (count, side, side)
    source: str
    seed: int | None

    def __post_init__(self):
        p = self.patches
        if p.ndim != 3 or p.shape[1] != p.shape[2]:
            raise DomainError(f"patches must have shape (count, side, side), got {p.shape}")

    @property
    def side(self) -> int:
        return self.patches.shape[1]

    def __len__(self):
        return self.patches.shape[0]


def sample_patches(images, side, count, seed, source="images") -> PatchSet:
    """Draw ``count`` patches at uniformly random positions of random images."""
    side, count = int(side), int(count)
    if side < 2 or side & (side - 1):
        raise DomainError(f"patch side must be a power of two >= 2, got {side}")
    usable = [im for im in images if im.shape[0] >= side and im.shape[1] >= side]
    if not usable:
        raise DomainError(f"no image is at least {side}x{side}")
    rng = make_rng(seed, "patches")
    out = np.empty((count, side, side))
    for i in range(count):
        im = usable[rng.integers(len(usable))]
        r = rng.integers(im.shape[0] - side + 1)
        c = rng.integers(im.shape[1] - side + 1)
        out[i] = im[r:r + side, c:c + side]
    return PatchSet(out, source, int(seed))


def load_patch_set(directory, side, count, seed) -> PatchSet:
    paths = sorted(Path(directory).glob("*.pgm"))
    if not paths:
        raise DomainError(f"no .pgm files in {directory}")
    return sample_patches([read_pgm(p) for p in paths], side, count, seed, source=str(directory))


# -- order statistics ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OrderStatCurve:
    ranks: np.ndarray
    values: np.ndarray
    tag: str  # transform name or distribution spec
    kind: str  # "empirical" or "quantile_approximation"


def sorted_magnitudes(coeffs):
    return np.sort(np.abs(np.ravel(coeffs)))[::-1]


def average_sorted_magnitudes(patch_set: PatchSet, kind="dct") -> OrderStatCurve:
    if len(patch_set) == 0:
        raise DomainError("empty patch set")
    total = np.zeros(patch_set.side ** 2)
    for p in patch_set.patches:
        total += sorted_magnitudes(transform(p, kind))
    values = total / len(patch_set)
    return OrderStatCurve(np.arange(1, values.size + 1), values, kind, "empirical")


def expected_order_statistics(dist, n) -> OrderStatCurve:
    """Approximate ``E|x|*_r`` for ``n`` iid draws by ``Fbar^{-1}(1 - r/(n+1))``."""
    if isinstance(dist, str):
        dist = parse_distribution(dist)
    n = int(n)
    if n < 1:
        raise DomainError(f"N must be >= 1, got {n}")
    ranks = np.arange(1, n + 1)
    values = np.atleast_1d(dist.folded_isf(ranks / (n + 1.0)))
    return OrderStatCurve(ranks, values, dist.spec, "quantile_approximation")


def model_curves(n, presets=MODEL_PRESETS) -> dict[str, OrderStatCurve]:
    return {name: expected_order_statistics(spec, n) for name, spec in presets.items()}


def iid_patch_set(dist: DistributionModel, side, count, seed) -> PatchSet:
    """Patches filled with iid draws; a synthetic check on the averaging."""
    data = dist.sample(count * side * side, seed).reshape(count, side, side)
    return PatchSet(data, f"iid {dist.spec}", int(seed))
