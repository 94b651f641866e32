"""Per-second frame features, their file format, and late fusion.

Feature tracks hold one float32 row per second. The file layout is:
magic ``VFTR``, u32 LE version (1), u32 LE frame count, u32 LE feature
width, then the rows as f32 LE. Fusion concatenates a vision vector to
each language state and projects back through an affine plus rectifier.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np

from ..errors import ConfigError, InputError, ParseError
from ..kernel import ParamSet, relu_vjp
from ..seeding import rng as seeded_rng

MAGIC = b"VFTR"
VERSION = 1


@dataclass
class FrameFeatureTrack:
    features: np.ndarray  # [n_frames, d_v] float32
    duration_s: float

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float32)
        if self.features.ndim != 2:
            raise InputError(f"feature track must be 2-D, got {self.features.shape}")
        if not np.all(np.isfinite(self.features)):
            raise InputError("feature track contains non-finite values")
        if self.duration_s <= 0:
            raise InputError(f"duration must be positive, got {self.duration_s}")
        if self.features.shape[0] != math.ceil(self.duration_s):
            raise InputError(
                f"{self.features.shape[0]} frame rows do not cover "
                f"{self.duration_s:.3f}s at one frame per second"
            )

    @property
    def n_frames(self) -> int:
        return self.features.shape[0]

    @property
    def d_v(self) -> int:
        return self.features.shape[1]


def save_track(track: FrameFeatureTrack, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", VERSION, track.n_frames, track.d_v))
        fh.write(np.ascontiguousarray(track.features, dtype="<f4").tobytes())


def load_track(path: str | Path, duration_s: float | None = None) -> FrameFeatureTrack:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise ParseError(f"not a feature track: bad magic {data[:4]!r}")
    version, n_frames, d_v = struct.unpack_from("<III", data, 4)
    if version != VERSION:
        raise ParseError(f"unsupported feature track version {version}")
    values = np.frombuffer(data, dtype="<f4", count=n_frames * d_v, offset=16)
    features = values.reshape(n_frames, d_v).copy()
    return FrameFeatureTrack(features, float(duration_s or n_frames))


def align_frames(track: FrameFeatureTrack, start_s: float, end_s: float) -> np.ndarray:
    """Mean of frame rows whose second lies in [floor(start), ceil(end)).

    An empty index range falls back to the single row at floor(start),
    clamped into bounds.
    """
    if track.n_frames == 0:
        raise InputError("feature track is empty")
    lo = math.floor(start_s)
    hi = math.ceil(end_s)
    lo_c = max(0, min(lo, track.n_frames - 1))
    hi_c = max(0, min(hi, track.n_frames))
    if hi_c <= lo_c:
        return track.features[lo_c].astype(np.float64)
    return track.features[lo_c:hi_c].astype(np.float64).mean(axis=0)


class VisionEncoder(Protocol):
    d_v: int

    def encode(self, track: FrameFeatureTrack) -> np.ndarray: ...


class MeanPoolVisionEncoder:
    """Temporal mean pool followed by a trainable affine map."""

    def __init__(self, d_v: int, seed: int = 0):
        self.d_v = d_v
        self.params = ParamSet()
        gen = seeded_rng(seed, "vision-encoder")
        self.params.add("w", gen.normal(0.0, d_v**-0.5, size=(d_v, d_v)))
        self.params.add("b", np.zeros(d_v))

    def encode_vjp(self, track: FrameFeatureTrack):
        if track.n_frames == 0:
            raise InputError("feature track is empty")
        if track.d_v != self.d_v:
            raise ConfigError(
                f"track width {track.d_v} does not match encoder width {self.d_v}"
            )
        pooled = track.features.astype(np.float64).mean(axis=0)
        out = pooled @ self.params["w"] + self.params["b"]

        def backward(d_out: np.ndarray) -> None:
            self.params.add_grad("w", np.outer(pooled, d_out))
            self.params.add_grad("b", d_out)

        return out, backward

    def encode(self, track: FrameFeatureTrack) -> np.ndarray:
        return self.encode_vjp(track)[0]


def vision_encode(track: FrameFeatureTrack, encoder: VisionEncoder) -> np.ndarray:
    """One global vision vector for the whole track."""
    return np.asarray(encoder.encode(track), dtype=np.float64)


def init_fusion_params(
    params: ParamSet,
    d_l: int,
    d_v: int,
    rng: np.random.Generator | None = None,
    prefix: str = "fuse.",
    zero: bool = False,
) -> None:
    """Fusion projection (d_l + d_v -> d_l); zero init makes it inert."""
    if zero or rng is None:
        w = np.zeros((d_l + d_v, d_l))
        b = np.zeros(d_l)
    else:
        w = rng.normal(0.0, 0.5 / np.sqrt(d_l + d_v), size=(d_l + d_v, d_l))
        b = np.full(d_l, 0.01)
    params.add(prefix + "w", w)
    params.add(prefix + "b", b)


def fuse_rows_vjp(
    h: np.ndarray, v_rows: np.ndarray, params: ParamSet, prefix: str = "fuse."
):
    """relu(concat(h_i, v_i) @ w + b) for per-position vision rows."""
    w = params[prefix + "w"]
    b = params[prefix + "b"]
    d_l = h.shape[1]
    if v_rows.shape[0] != h.shape[0] or w.shape != (d_l + v_rows.shape[1], d_l):
        raise ConfigError(
            f"fusion shapes disagree: states {h.shape}, vision {v_rows.shape}, "
            f"projection {w.shape}"
        )
    x = np.concatenate([h, v_rows], axis=1)
    pre = x @ w + b
    out, relu_bwd = relu_vjp(pre)

    def backward(g: np.ndarray):
        dpre = relu_bwd(g)
        params.add_grad(prefix + "w", x.T @ dpre)
        params.add_grad(prefix + "b", dpre.sum(axis=0))
        dx = dpre @ w.T
        return dx[:, :d_l], dx[:, d_l:]

    return out, backward


def fuse_vision(
    h: np.ndarray, v: np.ndarray, params: ParamSet, prefix: str = "fuse."
) -> np.ndarray:
    """Fuse one global vision vector onto every language state."""
    v = np.asarray(v, dtype=np.float64).reshape(1, -1)
    v_rows = np.repeat(v, h.shape[0], axis=0)
    out, _ = fuse_rows_vjp(h, v_rows, params, prefix=prefix)
    return out


def fuse_vision_vjp(
    h: np.ndarray, v: np.ndarray, params: ParamSet, prefix: str = "fuse."
):
    """Like :func:`fuse_vision` but returns (dh, dv) from backward."""
    v = np.asarray(v, dtype=np.float64).reshape(1, -1)
    v_rows = np.repeat(v, h.shape[0], axis=0)
    out, rows_bwd = fuse_rows_vjp(h, v_rows, params, prefix=prefix)

    def backward(g: np.ndarray):
        dh, dv_rows = rows_bwd(g)
        return dh, dv_rows.sum(axis=0)

    return out, backward
