"""Resistive-crossbar readout simulation and frame analytics.

Models the ideal zero-potential scan of a rows x cols piezoresistive
crossbar: one column is driven while all others are grounded and every
row is held at virtual ground by a transimpedance stage, so each node
reads back independently (no ghosting).  Also provides the
characterization-style R(F) response with hysteresis, press-script frame
synthesis, and the press-window statistics used to compare repeated
presses (normalized 64x64 images + variance maps).
"""
from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from .config import ReadoutConfig
from .errors import SchemaError, SimulationError

WINDOW_FRAMES = 50          # frames averaged around each press peak
UPSAMPLED_SIZE = 64         # press images are interpolated to this square


class ForceRangeWarning(UserWarning):
    """A scripted force fell outside the calibrated range and was clamped."""


# ---------------------------------------------------------------------------
# response model


@dataclass(frozen=True)
class ResponseModel:
    """Piezoresistive R(F) curve: two log-linear segments plus a constant
    resistance offset on the unloading branch.

    The default endpoints are approximate read-offs from a
    loading/unloading characterization plot (0 N -> ~1200 ohm, knee near
    50 N -> ~650 ohm, 200 N -> ~500 ohm) and can be overridden via
    ReadoutConfig.
    """
    r_zero: float = 1200.0
    r_break: float = 650.0
    r_max: float = 500.0
    break_force: float = 50.0
    max_force: float = 200.0
    hysteresis: float = 40.0
    contact_area_cm2: float = 1.0

    def __post_init__(self):
        if not (self.r_zero > self.r_break > self.r_max > 0):
            raise SimulationError("response resistances must be strictly "
                                  "decreasing and positive")
        if not (0 < self.break_force < self.max_force):
            raise SimulationError("response breakpoint must lie inside "
                                  "(0, max_force)")
        if self.hysteresis < 0:
            raise SimulationError("hysteresis offset must be non-negative")

    @classmethod
    def from_config(cls, cfg: ReadoutConfig) -> "ResponseModel":
        return cls(r_zero=cfg.r_at_zero, r_break=cfg.r_at_break,
                   r_max=cfg.r_at_max, break_force=cfg.break_force,
                   max_force=cfg.max_force, hysteresis=cfg.hysteresis)


def r_of_f(model: ResponseModel, force: float,
           phase: str = "loading") -> float:
    """Resistance (ohm) at a given force (newtons).

    Piecewise log-linear interpolation between the model endpoints;
    the unloading branch is the loading curve shifted up by the
    hysteresis offset.  Out-of-range forces are clamped with a warning.
    """
    if phase not in ("loading", "unloading"):
        raise SimulationError(f"unknown phase {phase!r}")
    if force < 0.0 or force > model.max_force:
        warnings.warn(f"force {force:.3g} N outside [0, {model.max_force}] "
                      "N; clamping", ForceRangeWarning, stacklevel=2)
        force = min(max(force, 0.0), model.max_force)
    if force <= model.break_force:
        t = force / model.break_force
        log_r = np.log(model.r_zero) * (1 - t) + np.log(model.r_break) * t
    else:
        t = ((force - model.break_force)
             / (model.max_force - model.break_force))
        log_r = np.log(model.r_break) * (1 - t) + np.log(model.r_max) * t
    r = float(np.exp(log_r))
    if phase == "unloading" and force > 0.0:
        r += model.hysteresis
    return r


# ---------------------------------------------------------------------------
# crossbar scan


@dataclass
class CrossbarState:
    """Per-taxel resistance matrix of the row/column crossbar."""
    rows: int
    cols: int
    R: np.ndarray
    r_off: float

    def __post_init__(self):
        self.R = np.asarray(self.R, dtype=float)
        if self.R.shape != (self.rows, self.cols):
            raise SimulationError(
                f"resistance matrix shape {self.R.shape} does not match "
                f"{self.rows}x{self.cols}")
        if not np.all(self.R > 0):
            raise SimulationError("all crossbar resistances must be positive")

    @classmethod
    def uniform(cls, cfg: ReadoutConfig) -> "CrossbarState":
        return cls(cfg.rows, cfg.cols,
                   np.full((cfg.rows, cfg.cols), cfg.r_off), cfg.r_off)


@dataclass(frozen=True)
class PressureFrame:
    """One ADC frame: integer counts per taxel at a timestamp."""
    timestamp: float
    counts: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "counts",
                           np.asarray(self.counts, dtype=np.int64))


def scan(state: CrossbarState, cfg: ReadoutConfig,
         timestamp: float = 0.0) -> PressureFrame:
    """Ideal zero-potential scan of the crossbar.

    Each node's output is V_drive * R_f / R(i, j) independent of every
    other node (unscanned columns grounded, rows at virtual ground),
    clamped to the ADC full scale and quantized to ``adc_bits``.
    """
    v = cfg.v_drive * cfg.r_feedback / state.R
    v = np.minimum(v, cfg.full_scale)
    counts = quantize(v, cfg)
    return PressureFrame(timestamp, counts)


def quantize(volts: np.ndarray, cfg: ReadoutConfig) -> np.ndarray:
    """Volts -> ADC counts (round to nearest code)."""
    max_code = (1 << cfg.adc_bits) - 1
    codes = np.rint(np.asarray(volts, dtype=float) / cfg.full_scale
                    * max_code)
    return np.clip(codes, 0, max_code).astype(np.int64)


def dequantize(counts: np.ndarray, cfg: ReadoutConfig) -> np.ndarray:
    """ADC counts -> volts at code centres."""
    max_code = (1 << cfg.adc_bits) - 1
    return np.asarray(counts, dtype=float) / max_code * cfg.full_scale


# ---------------------------------------------------------------------------
# press scripts


@dataclass(frozen=True)
class PressEvent:
    """One repeated-press entry of a script.

    The press force ramps 0 -> force, dwells at the apex, then ramps
    back to 0 over ``duration`` seconds (trapezoid, so both the loading
    and unloading branches of the response are exercised and the apex is
    always sampled), repeating every ``period`` seconds for ``cycles``
    repetitions starting at ``start``.
    """
    region: str
    force: float            # newtons per taxel at the apex
    duration: float         # seconds of contact per cycle
    period: float           # seconds between cycle starts
    cycles: int = 1
    start: float = 0.0

    def __post_init__(self):
        if self.duration <= 0 or self.period < self.duration:
            raise SimulationError("press duration must be positive and "
                                  "no longer than the period")
        if self.cycles < 1:
            raise SimulationError("press cycle count must be >= 1")

    def force_at(self, t: float) -> tuple[float, str]:
        """(force, phase) of this event at absolute time t."""
        rel = t - self.start
        if rel < 0 or rel >= self.cycles * self.period:
            return 0.0, "loading"
        within = rel % self.period
        if within >= self.duration:
            return 0.0, "loading"
        ramp = self.duration * 0.4     # rise / fall time; 20% apex dwell
        if within <= ramp:
            return self.force * (within / ramp), "loading"
        if within < self.duration - ramp:
            return self.force, "loading"
        return self.force * ((self.duration - within) / ramp), "unloading"


def load_script(data) -> list[PressEvent]:
    """Parse a press script (path, JSON text, or already-parsed list)."""
    if isinstance(data, (str, Path)):
        path = Path(data)
        text = path.read_text() if path.exists() else str(data)
        data = json.loads(text)
    if not isinstance(data, list):
        raise SchemaError("press script must be a JSON array")
    events = []
    for entry in data:
        if not isinstance(entry, dict) or "region" not in entry:
            raise SchemaError("each script entry needs a 'region'")
        known = {"region", "force", "duration", "period", "cycles", "start"}
        bad = set(entry) - known
        if bad:
            raise SchemaError(f"unknown script keys: {sorted(bad)}")
        events.append(PressEvent(**entry))
    return events


def press_script(taxel_map: dict[str, list[tuple[int, int]]],
                 script: list[PressEvent], cfg: ReadoutConfig,
                 model: ResponseModel | None = None,
                 settle: float = 0.0) -> list[PressureFrame]:
    """Synthesize a frame stream for a scripted sequence of presses.

    ``taxel_map`` names groups of (row, col) taxels; each script event
    presses one named group.  Frames are produced at the configured rate
    from t=0 until ``settle`` seconds past the last event.
    """
    if model is None:
        model = ResponseModel.from_config(cfg)
    for event in script:
        if event.region not in taxel_map:
            raise SimulationError(f"unknown press region {event.region!r}")
    t_end = max((e.start + e.cycles * e.period for e in script),
                default=1.0) + settle
    n_frames = max(1, int(round(t_end * cfg.frame_rate)))
    frames = []
    state = CrossbarState.uniform(cfg)
    for k in range(n_frames):
        t = k / cfg.frame_rate
        state.R.fill(cfg.r_off)
        for event in script:
            force, phase = event.force_at(t)
            if force <= 0.0:
                continue
            r = r_of_f(model, force, phase)
            for i, j in taxel_map[event.region]:
                state.R[i, j] = min(state.R[i, j], r)
        frames.append(scan(state, cfg, timestamp=t))
    return frames


def detect_peaks(frames: list[PressureFrame],
                 baseline_margin: int = 2) -> list[int]:
    """Indices of local maxima of the per-frame mean count above baseline."""
    means = np.array([f.counts.mean() for f in frames], dtype=float)
    floor = means.min() + baseline_margin
    peaks = []
    for k in range(1, len(means) - 1):
        if means[k] <= floor:
            continue
        if means[k] >= means[k - 1] and means[k] > means[k + 1]:
            peaks.append(k)
    return peaks


# ---------------------------------------------------------------------------
# frame stream IO


def frames_to_jsonl(frames: list[PressureFrame]) -> str:
    """Serialize frames as JSON-lines records {"t": ..., "counts": ...}."""
    lines = []
    for f in frames:
        lines.append(json.dumps(
            {"t": round(float(f.timestamp), 9),
             "counts": f.counts.tolist()}, separators=(",", ":")))
    return "\n".join(lines) + "\n"


def frames_from_jsonl(source) -> list[PressureFrame]:
    """Parse a JSON-lines frame stream (path or text)."""
    if isinstance(source, Path) or (isinstance(source, str)
                                    and "\n" not in source
                                    and Path(source).exists()):
        source = Path(source).read_text()
    frames = []
    for lineno, line in enumerate(source.splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            frames.append(PressureFrame(float(record["t"]),
                                        np.asarray(record["counts"])))
        except (ValueError, KeyError, TypeError) as exc:
            raise SchemaError(
                f"frames: bad record on line {lineno}: {exc}") from exc
    return frames


# ---------------------------------------------------------------------------
# press-window analytics


@dataclass
class PressStats:
    """Per-press normalized images with their cross-press variance map."""
    images: list[np.ndarray]          # one 64x64 float array in [0, 255]
    peak_indices: list[int]           # frame index of each press peak
    truncated: list[bool]             # window clipped at a stream edge?
    variance_map: np.ndarray = field(default=None)
    total_variance: float = 0.0

    def __post_init__(self):
        if self.variance_map is None:
            stack = np.stack(self.images)
            self.variance_map = stack.var(axis=0)
            self.total_variance = float(self.variance_map.sum())


def press_window_stats(frames: list[PressureFrame],
                       presses: list[tuple[float, float]],
                       window: int = WINDOW_FRAMES) -> PressStats:
    """Per-press normalized pressure images and their variance across
    presses.

    For each press interval (t0, t1): find the frame with the maximum
    mean count inside it, average the ``window`` frames centred there
    (truncating at the stream edges, flagged), min-max normalize the
    averaged 16x16 image to [0, 255] (all zeros if flat), and bilinearly
    interpolate to 64x64.  The variance map is the per-pixel variance of
    those images across presses; the total variance is its sum.
    """
    if not presses:
        raise SimulationError("at least one press interval is required")
    if not frames:
        raise SimulationError("empty frame stream")
    times = np.array([f.timestamp for f in frames])
    means = np.array([f.counts.mean() for f in frames], dtype=float)
    images, peak_indices, truncated = [], [], []
    for t0, t1 in presses:
        inside = np.nonzero((times >= t0) & (times <= t1))[0]
        if inside.size == 0:
            raise SimulationError(
                f"no frames inside press interval ({t0}, {t1})")
        peak = int(inside[np.argmax(means[inside])])
        lo = peak - window // 2
        hi = lo + window
        clipped = lo < 0 or hi > len(frames)
        lo, hi = max(lo, 0), min(hi, len(frames))
        avg = np.mean([frames[k].counts for k in range(lo, hi)], axis=0)
        span = avg.max() - avg.min()
        if span <= 0:
            norm = np.zeros_like(avg, dtype=float)
        else:
            norm = (avg - avg.min()) / span * 255.0
        image = cv2.resize(norm.astype(np.float32),
                           (UPSAMPLED_SIZE, UPSAMPLED_SIZE),
                           interpolation=cv2.INTER_LINEAR).astype(float)
        images.append(np.clip(image, 0.0, 255.0))
        peak_indices.append(peak)
        truncated.append(clipped)
    return PressStats(images, peak_indices, truncated)


# ---------------------------------------------------------------------------
# report output


def stats_csv(stats: PressStats) -> str:
    """CSV summary: one row per press plus the total-variance footer."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["press", "peak_frame", "image_min", "image_max",
                     "image_mean", "window_truncated"])
    for k, image in enumerate(stats.images):
        writer.writerow([k, stats.peak_indices[k],
                         f"{image.min():.3f}", f"{image.max():.3f}",
                         f"{image.mean():.3f}",
                         int(stats.truncated[k])])
    writer.writerow(["total_variance", f"{stats.total_variance:.6f}",
                     "", "", "", ""])
    return buf.getvalue()


def write_heatmap(image: np.ndarray, path, title: str,
                  vmax: float = 255.0) -> None:
    """Render one press/variance image as a PNG heatmap."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(4, 4))
    shown = ax.imshow(image, cmap="inferno", vmin=0.0,
                      vmax=vmax if vmax > 0 else None)
    ax.set_title(title)
    ax.set_xticks([])
    ax.set_yticks([])
    fig.colorbar(shown, ax=ax, fraction=0.046)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def write_stats(stats: PressStats, out_dir, prefix: str = "press") -> dict:
    """Write per-press heatmaps, the variance heatmap, and the CSV
    summary; returns {name: filename}."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {}
    for k, image in enumerate(stats.images):
        name = f"{prefix}_{k:02d}.png"
        write_heatmap(image, out_dir / name, f"press {k}")
        files[f"press_{k}"] = name
    vmax = float(stats.variance_map.max())
    name = f"{prefix}_variance.png"
    write_heatmap(stats.variance_map, out_dir / name,
                  f"variance (total {stats.total_variance:.1f})", vmax=vmax)
    files["variance"] = name
    name = f"{prefix}_summary.csv"
    (out_dir / name).write_text(stats_csv(stats))
    files["summary"] = name
    return files
