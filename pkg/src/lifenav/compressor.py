"""Visual token compression pipeline: exact shape and value semantics.

The pipeline turns a per-frame feature grid into a short token sequence:
patchify -> pad -> N x (PixelUnshuffle, 3x3 conv, per-channel affine,
SiLU) -> optional 2x2 merger -> 2D sinusoidal positional encodings.
Feature values and all weights are seeded pseudo-random stand-ins for a
frozen backbone, so every run is bit-reproducible; what the module pins
down is the shape/count arithmetic and the rearrangement semantics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .rng import derive_key, uniform_signed_array

# per-frame token count of the uncompressed native encoder (reported
# constant for a 720x640 input; used only for ratio reporting)
NATIVE_TOKENS_PER_FRAME = 598

_WEIGHT_TAG_CONV = 101
_WEIGHT_TAG_MERGER = 202


@dataclass
class FeatureGrid:
    data: np.ndarray  # (H, W, C) float64

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass
class TokenSequence:
    tokens: np.ndarray  # (L, C)
    frame_index: int = 0

    def __len__(self) -> int:
        return self.tokens.shape[0]


@dataclass
class CompressionConfig:
    image_height: int = 720
    image_width: int = 640
    patch_size: int = 16
    num_blocks: int = 2
    apply_merger: bool = True
    # output channels per block; the last entry is the interface width
    channel_plan: tuple[int, ...] = (64, 1280)
    feature_channels: int = 32
    weight_seed: int = 0

    def validate(self) -> None:
        if self.patch_size <= 0:
            raise ValidationError("patch_size must be positive")
        if self.num_blocks < 0:
            raise ValidationError("num_blocks must be >= 0")
        if len(self.channel_plan) != self.num_blocks:
            raise ValidationError("channel_plan length must equal num_blocks")
        if self.feature_channels < 1:
            raise ValidationError("feature_channels must be >= 1")
        if self.image_height < self.patch_size or self.image_width < self.patch_size:
            raise ValidationError("image must be at least one patch")

    @property
    def pad_multiple(self) -> int:
        return 2 ** (self.num_blocks + 1) if self.apply_merger else 2 ** self.num_blocks

    def to_dict(self) -> dict:
        return {
            "image_height": self.image_height,
            "image_width": self.image_width,
            "patch_size": self.patch_size,
            "num_blocks": self.num_blocks,
            "apply_merger": self.apply_merger,
            "channel_plan": list(self.channel_plan),
            "feature_channels": self.feature_channels,
            "weight_seed": self.weight_seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CompressionConfig":
        cfg = cls(**{**doc, "channel_plan": tuple(doc.get("channel_plan", (64, 1280)))})
        cfg.validate()
        return cfg


@dataclass
class BlockParams:
    out_channels: int
    weights: np.ndarray | None = None  # (3, 3, c_in, c_out); seeded if None
    scale: np.ndarray | None = None    # per-channel affine; identity if None
    shift: np.ndarray | None = None


def patch_grid_dims(config: CompressionConfig) -> tuple[int, int]:
    config.validate()
    return (config.image_height // config.patch_size,
            config.image_width // config.patch_size)


def _round_up(n: int, multiple: int) -> int:
    return ((n + multiple - 1) // multiple) * multiple


def pad_grid(grid: FeatureGrid, multiple: int) -> FeatureGrid:
    """Zero-pad bottom rows / right columns up to the next multiple."""
    if multiple < 1:
        raise ValidationError("pad multiple must be >= 1")
    h, w = grid.height, grid.width
    ph, pw = _round_up(h, multiple), _round_up(w, multiple)
    if (ph, pw) == (h, w):
        return grid
    out = np.zeros((ph, pw, grid.channels), dtype=grid.data.dtype)
    out[:h, :w, :] = grid.data
    return FeatureGrid(out)


def pixel_unshuffle(grid: FeatureGrid) -> FeatureGrid:
    """(H, W, C) -> (H/2, W/2, 4C); each 2x2 neighborhood moves into
    channels in (top-left, top-right, bottom-left, bottom-right) order."""
    h, w, c = grid.data.shape
    if h % 2 or w % 2:
        raise ValidationError(f"pixel_unshuffle needs even dims, got {h}x{w}")
    x = grid.data.reshape(h // 2, 2, w // 2, 2, c)
    x = x.transpose(0, 2, 1, 3, 4).reshape(h // 2, w // 2, 4 * c)
    return FeatureGrid(np.ascontiguousarray(x))


def conv_weights(weight_seed: int, block_index: int, c_in: int, c_out: int) -> np.ndarray:
    """Seeded 3x3 kernel, uniform in [-a, a] with a = (9*c_in)**-0.5."""
    key = derive_key(weight_seed, _WEIGHT_TAG_CONV, block_index)
    limit = (9 * c_in) ** -0.5
    flat = uniform_signed_array(key, 9 * c_in * c_out) * limit
    return flat.reshape(3, 3, c_in, c_out)


def conv3x3(grid: FeatureGrid, weights: np.ndarray) -> FeatureGrid:
    """Stride-1 same-padded 3x3 convolution."""
    h, w, c = grid.data.shape
    if weights.shape[:3] != (3, 3, c):
        raise ValidationError(f"kernel shape {weights.shape} does not match {c} input channels")
    c_out = weights.shape[3]
    padded = np.zeros((h + 2, w + 2, c), dtype=grid.data.dtype)
    padded[1:-1, 1:-1, :] = grid.data
    cols = np.empty((h, w, 9 * c), dtype=grid.data.dtype)
    k = 0
    for di in range(3):
        for dj in range(3):
            cols[:, :, k * c:(k + 1) * c] = padded[di:di + h, dj:dj + w, :]
            k += 1
    out = cols.reshape(h * w, 9 * c) @ weights.reshape(9 * c, c_out)
    return FeatureGrid(out.reshape(h, w, c_out))


def silu(x: np.ndarray) -> np.ndarray:
    return x / (1.0 + np.exp(-x))


def compression_block(grid: FeatureGrid, params: BlockParams,
                      weight_seed: int = 0, block_index: int = 0) -> FeatureGrid:
    """PixelUnshuffle -> 3x3 conv -> per-channel affine -> SiLU.

    Halves height and width. The affine stage stands in for inference-mode
    normalization with unit statistics; identity unless scale/shift given.
    """
    x = pixel_unshuffle(grid)
    weights = params.weights
    if weights is None:
        weights = conv_weights(weight_seed, block_index, x.channels, params.out_channels)
    y = conv3x3(x, weights).data
    if params.scale is not None:
        y = y * params.scale
    if params.shift is not None:
        y = y + params.shift
    return FeatureGrid(silu(y))


def merger_weights(weight_seed: int, channels: int) -> np.ndarray:
    """Seeded (4C, C) projection for the 2x2 merger."""
    key = derive_key(weight_seed, _WEIGHT_TAG_MERGER, channels)
    limit = (4 * channels) ** -0.5
    return (uniform_signed_array(key, 4 * channels * channels) * limit).reshape(
        4 * channels, channels)


def patch_merger(grid: FeatureGrid, projection: np.ndarray | None = None,
                 weight_seed: int = 0, frame_index: int = 0) -> TokenSequence:
    """Group each 2x2 block, concatenate (4C), project back to C.

    Token order is row-major over the merged (H/2 x W/2) grid. Positional
    encodings are NOT added here; see compress_frame.
    """
    h, w, c = grid.data.shape
    if h % 2 or w % 2:
        raise ValidationError(f"patch_merger needs even dims, got {h}x{w}")
    merged = pixel_unshuffle(grid).data.reshape(h // 2 * (w // 2), 4 * c)
    if projection is None:
        projection = merger_weights(weight_seed, c)
    if projection.shape != (4 * c, c):
        raise ValidationError(f"merger projection must be {(4 * c, c)}, got {projection.shape}")
    return TokenSequence(tokens=merged @ projection, frame_index=frame_index)


def positional_encoding(height: int, width: int, channels: int) -> FeatureGrid:
    """2D sinusoidal encodings: first half of channels encodes the row
    index, second half the column, sin/cos interleaved with geometric
    frequency spacing. All values in [-1, 1]."""
    if channels % 4 != 0:
        raise ValidationError("positional encoding channels must be divisible by 4")
    half = channels // 2
    n_freq = half // 2
    freqs = 10000.0 ** (-np.arange(n_freq, dtype=np.float64) * 2.0 / half)
    out = np.empty((height, width, channels), dtype=np.float64)
    rows = np.arange(height, dtype=np.float64)[:, None] * freqs[None, :]  # (H, n_freq)
    cols = np.arange(width, dtype=np.float64)[:, None] * freqs[None, :]   # (W, n_freq)
    out[:, :, 0:half:2] = np.sin(rows)[:, None, :]
    out[:, :, 1:half:2] = np.cos(rows)[:, None, :]
    out[:, :, half::2] = np.sin(cols)[None, :, :]
    out[:, :, half + 1::2] = np.cos(cols)[None, :, :]
    return FeatureGrid(out)


def pseudo_features(frame_seed: int, height: int, width: int, channels: int) -> FeatureGrid:
    """Deterministic stand-in for a frozen image encoder: uniform [-1, 1]
    values from the splitmix64 stream of frame_seed."""
    if height < 1 or width < 1 or channels < 1:
        raise ValidationError("feature grid dims must be positive")
    flat = uniform_signed_array(frame_seed, height * width * channels)
    return FeatureGrid(flat.reshape(height, width, channels))


def pipeline_dims(config: CompressionConfig) -> list[tuple[int, int]]:
    """Spatial (H, W) after each stage: patchify, pad, each block, merger."""
    config.validate()
    h, w = patch_grid_dims(config)
    dims = [(h, w)]
    m = config.pad_multiple
    h, w = _round_up(h, m), _round_up(w, m)
    dims.append((h, w))
    for _ in range(config.num_blocks):
        h, w = h // 2, w // 2
        dims.append((h, w))
    if config.apply_merger:
        dims.append((h // 2, w // 2))
    return dims


def token_count(config: CompressionConfig) -> int:
    h, w = pipeline_dims(config)[-1]
    return h * w


def compression_ratio(config: CompressionConfig) -> tuple[int, float]:
    """(spatial ratio 4**N, ratio vs. the native per-frame token count)."""
    config.validate()
    return 4 ** config.num_blocks, NATIVE_TOKENS_PER_FRAME / token_count(config)


def compress_frame(frame_seed: int, config: CompressionConfig,
                   frame_index: int = 0) -> TokenSequence:
    """Full pipeline; deterministic in (frame_seed, config.weight_seed)."""
    config.validate()
    h0, w0 = patch_grid_dims(config)
    grid = pseudo_features(frame_seed, h0, w0, config.feature_channels)
    grid = pad_grid(grid, config.pad_multiple)
    for i, c_out in enumerate(config.channel_plan):
        grid = compression_block(grid, BlockParams(out_channels=c_out),
                                 weight_seed=config.weight_seed, block_index=i)
    if config.apply_merger:
        seq = patch_merger(grid, weight_seed=config.weight_seed, frame_index=frame_index)
        enc_h, enc_w = grid.height // 2, grid.width // 2
    else:
        seq = TokenSequence(tokens=grid.data.reshape(-1, grid.channels),
                            frame_index=frame_index)
        enc_h, enc_w = grid.height, grid.width
    enc = positional_encoding(enc_h, enc_w, seq.tokens.shape[1])
    seq.tokens = seq.tokens + enc.data.reshape(-1, seq.tokens.shape[1])
    return seq
