"""Track and raceline geometry.

A track is a closed (or open) centerline polyline with per-node headings,
curvatures and corridor half-widths, parameterised by arc length ``s``.  A
raceline is the curve a controller actually follows: same plan-view layout,
plus a reference speed per node.

The module provides:

- CSV import/export for both curve kinds,
- Frenet transforms (``cartesian_to_frenet`` / ``frenet_to_cartesian``),
- channel interpolation at arbitrary ``s`` (``track_query``),
- forward-horizon waypoint sampling for observations,
- a curvature-limited velocity profile generator,
- a synthetic oval used by the bundled configs and the test suite.

All angles are radians, wrapped to ``(-pi, pi]``.  All distances are metres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "TrackFormatError",
    "TrackValidationError",
    "TrackLayout",
    "Raceline",
    "FrenetPose",
    "TrackSample",
    "wrap_angle",
    "load_track",
    "load_raceline",
    "save_raceline_csv",
    "save_track_csv",
    "cartesian_to_frenet",
    "frenet_to_cartesian",
    "track_query",
    "sample_forward_waypoints",
    "generate_velocity_profile",
    "synthetic_oval",
    "centerline_raceline",
]

_TRACK_COLUMNS = ("s_m", "x_m", "y_m", "psi_rad", "kappa_radpm", "w_tr_left_m", "w_tr_right_m")
_RACELINE_COLUMNS = ("s_m", "x_m", "y_m", "psi_rad", "kappa_radpm", "vx_mps")

# Consecutive nodes closer than this are treated as duplicates (a closed file
# that repeats its first point trips this on the closing chord).
_DUPLICATE_TOL = 1e-9

# A "closed" track whose closing chord is longer than this many median node
# spacings is really an open curve and gets rejected.
_CLOSURE_FACTOR = 50.0

_NEWTON_ITERS = 8


class TrackFormatError(ValueError):
    """Raised when a track/raceline file cannot be parsed."""


class TrackValidationError(ValueError):
    """Raised when parsed geometry violates a structural invariant."""


def wrap_angle(angle):
    """Wrap an angle (scalar or array) to the half-open interval ``(-pi, pi]``."""
    return np.pi - (np.pi - np.asarray(angle)) % (2.0 * np.pi)


@dataclass(frozen=True)
class FrenetPose:
    """Position in track coordinates: arc length ``s`` and signed lateral
    offset ``d`` (positive toward the left corridor edge)."""

    s: float
    d: float


@dataclass(frozen=True)
class TrackSample:
    """Interpolated track channels at one arc-length station."""

    w_left: float
    w_right: float
    psi_ref: float
    kappa: float
    v_ref: float


class _Curve:
    """Shared geometry core: piecewise-linear plan view with per-node headings.

    Headings are interpolated linearly in unwrapped angle inside a segment, so
    the tangent rotates smoothly across the node grid.  The Frenet projection
    refines the nearest-node guess with a Newton iteration on the
    orthogonality residual ``g(s) = (q - c(s)) . t(s)``.
    """

    __slots__ = (
        "n",
        "n_seg",
        "closed",
        "total_length",
        "x",
        "y",
        "se",
        "xe",
        "ye",
        "psie",
        "ds",
        "dx",
        "dy",
        "dpsi",
    )

    def __init__(self, s, x, y, psi, total_length, closed):
        self.n = int(s.size)
        self.closed = bool(closed)
        self.total_length = float(total_length)
        self.x = x
        self.y = y
        if closed:
            self.se = np.append(s, total_length)
            self.xe = np.append(x, x[0])
            self.ye = np.append(y, y[0])
            dpsi = wrap_angle(np.diff(np.append(psi, psi[0])))
        else:
            self.se = s
            self.xe = x
            self.ye = y
            dpsi = wrap_angle(np.diff(psi))
        # Unwrapped headings so in-segment interpolation never jumps branches.
        self.psie = np.concatenate(([psi[0]], psi[0] + np.cumsum(dpsi)))
        self.ds = np.diff(self.se)
        self.dx = np.diff(self.xe)
        self.dy = np.diff(self.ye)
        self.dpsi = dpsi
        self.n_seg = int(self.ds.size)

    def locate(self, s_query):
        """Map arc lengths to (segment index, in-segment fraction)."""
        sq = np.asarray(s_query, dtype=float)
        if self.closed:
            sw = np.mod(sq, self.total_length)
        else:
            sw = np.clip(sq, 0.0, self.total_length)
        j = np.searchsorted(self.se, sw, side="right") - 1
        j = np.clip(j, 0, self.n_seg - 1)
        t = (sw - self.se[j]) / self.ds[j]
        return j, t

    def point(self, j, t):
        return self.xe[j] + t * self.dx[j], self.ye[j] + t * self.dy[j]

    def heading(self, j, t):
        return wrap_angle(self.psie[j] + t * self.dpsi[j])

    def channel(self, values, j, t):
        """Linearly interpolate a per-node channel (wraps for closed curves)."""
        ext = np.append(values, values[0]) if self.closed else values
        return ext[j] * (1.0 - t) + ext[j + 1] * t

    def _candidate_segments(self, node):
        if self.closed:
            return [(node + off) % self.n_seg for off in (-2, -1, 0, 1)]
        lo = max(node - 2, 0)
        hi = min(node + 1, self.n_seg - 1)
        return list(range(lo, hi + 1))

    def project(self, qx, qy):
        """Project a point onto the curve.

        Returns ``(s, d, dist2)``: arc length of the foot point in
        ``[0, total_length)``, signed lateral offset, and squared distance.
        Candidates where the Newton iteration converged to the orthogonality
        root beat clamped segment endpoints (a node can sit marginally closer
        to the query than the true foot point on the inside of a bend);
        remaining ambiguity resolves toward the smaller distance, then the
        smaller ``s``.
        """
        d2 = (self.x - qx) ** 2 + (self.y - qy) ** 2
        node = int(np.argmin(d2))
        best = None
        for j in sorted(self._candidate_segments(node)):
            dxj = float(self.dx[j])
            dyj = float(self.dy[j])
            dpsij = float(self.dpsi[j])
            x0 = float(self.xe[j])
            y0 = float(self.ye[j])
            psi0 = float(self.psie[j])
            seg2 = dxj * dxj + dyj * dyj
            t = ((qx - x0) * dxj + (qy - y0) * dyj) / seg2
            t = min(max(t, 0.0), 1.0)
            for _ in range(_NEWTON_ITERS):
                psi_t = psi0 + t * dpsij
                ct = math.cos(psi_t)
                st = math.sin(psi_t)
                rx = qx - (x0 + t * dxj)
                ry = qy - (y0 + t * dyj)
                g = rx * ct + ry * st
                gp = -(dxj * ct + dyj * st) + dpsij * (ry * ct - rx * st)
                if gp == 0.0:
                    break
                t = t - g / gp
                t = min(max(t, 0.0), 1.0)
            psi_t = psi0 + t * dpsij
            ct = math.cos(psi_t)
            st = math.sin(psi_t)
            rx = qx - (x0 + t * dxj)
            ry = qy - (y0 + t * dyj)
            dist2 = rx * rx + ry * ry
            d = ry * ct - rx * st
            s_here = float(self.se[j]) + t * float(self.ds[j])
            if self.closed and s_here >= self.total_length:
                s_here -= self.total_length
            g = rx * ct + ry * st
            converged = abs(g) <= 1e-9 * (1.0 + math.sqrt(dist2))
            key = (0 if converged else 1, dist2, s_here)
            if best is None or key < best:
                best = key
                found = (s_here, d, dist2)
        return found


def _as_readonly(values: Iterable[float]) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=float)
    arr.setflags(write=False)
    return arr


def _chord_lengths(x, y, closed):
    dx = np.diff(x)
    dy = np.diff(y)
    seg = np.hypot(dx, dy)
    if closed:
        seg = np.append(seg, math.hypot(x[0] - x[-1], y[0] - y[-1]))
    return seg


def _headings_from_points(x, y, closed):
    n = x.size
    psi = np.empty(n)
    if closed:
        nxt = np.roll(np.arange(n), -1)
        prv = np.roll(np.arange(n), 1)
        psi = np.arctan2(y[nxt] - y[prv], x[nxt] - x[prv])
    else:
        psi[1:-1] = np.arctan2(y[2:] - y[:-2], x[2:] - x[:-2])
        psi[0] = math.atan2(y[1] - y[0], x[1] - x[0])
        psi[-1] = math.atan2(y[-1] - y[-2], x[-1] - x[-2])
    return wrap_angle(psi)


def _curvature_from_headings(s, psi, total_length, closed):
    n = s.size
    kappa = np.empty(n)
    if closed:
        nxt = np.roll(np.arange(n), -1)
        prv = np.roll(np.arange(n), 1)
        dpsi = wrap_angle(psi[nxt] - psi[prv])
        ds = (s[nxt] - s[prv]) % total_length
        kappa = dpsi / ds
    else:
        kappa[1:-1] = wrap_angle(psi[2:] - psi[:-2]) / (s[2:] - s[:-2])
        kappa[0] = wrap_angle(psi[1] - psi[0]) / (s[1] - s[0])
        kappa[-1] = wrap_angle(psi[-1] - psi[-2]) / (s[-1] - s[-2])
    return kappa


def _validate_base_geometry(s, x, y, closed, what):
    n = x.size
    if n < 4:
        raise TrackValidationError(f"{what} needs at least 4 points, got {n}")
    seg = _chord_lengths(x, y, closed)
    body = seg[:-1] if closed else seg
    if np.any(body < _DUPLICATE_TOL):
        idx = int(np.argmax(body < _DUPLICATE_TOL))
        raise TrackValidationError(f"{what} has duplicate consecutive points near row {idx}")
    if closed:
        if seg[-1] < _DUPLICATE_TOL:
            raise TrackValidationError(
                f"closed {what} must not repeat its first point as its last point"
            )
        if seg[-1] > _CLOSURE_FACTOR * float(np.median(seg[:-1])):
            raise TrackValidationError(
                f"{what} declared closed but end point does not return to the start "
                f"(closing gap {seg[-1]:.3g} m)"
            )
    if s is not None:
        if s[0] != 0.0:
            raise TrackValidationError(f"{what} arc length must start at 0, got {s[0]!r}")
        if np.any(np.diff(s) <= 0.0):
            idx = int(np.argmax(np.diff(s) <= 0.0))
            raise TrackValidationError(f"{what} arc length is not strictly increasing at row {idx + 1}")


def _complete_geometry(x, y, s, psi, kappa, closed, what):
    """Fill in s/psi/kappa channels that a file may omit, and validate."""
    x = _as_readonly(x)
    y = _as_readonly(y)
    s = None if s is None else np.ascontiguousarray(s, dtype=float)
    _validate_base_geometry(s, x, y, closed, what)
    seg = _chord_lengths(x, y, closed)
    if s is None:
        s = np.concatenate(([0.0], np.cumsum(seg[: x.size - 1])))
    total_length = float(s[-1] + seg[-1]) if closed else float(s[-1])
    if psi is None:
        psi = _headings_from_points(x, y, closed)
    else:
        psi = wrap_angle(np.ascontiguousarray(psi, dtype=float))
    if kappa is None:
        kappa = _curvature_from_headings(s, psi, total_length, closed)
    else:
        kappa = np.ascontiguousarray(kappa, dtype=float)
    return _as_readonly(s), x, y, _as_readonly(psi), _as_readonly(kappa), total_length


@dataclass(frozen=True)
class TrackLayout:
    """Closed or open centerline with corridor widths.

    Arrays are one value per node, read-only after construction.  ``s`` is
    strictly increasing from 0; for a closed track ``total_length`` includes
    the closing segment back to node 0, so all arc-length queries are periodic
    with period ``total_length``.
    """

    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    psi_ref: np.ndarray
    kappa: np.ndarray
    w_left: np.ndarray
    w_right: np.ndarray
    total_length: float
    closed: bool
    _curve: _Curve = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if np.any(self.w_left <= 0.0) or np.any(self.w_right <= 0.0):
            bad = int(np.argmax((self.w_left <= 0.0) | (self.w_right <= 0.0)))
            raise TrackValidationError(f"track width must be positive, violated at row {bad}")
        object.__setattr__(
            self, "_curve", _Curve(self.s, self.x, self.y, self.psi_ref, self.total_length, self.closed)
        )

    @classmethod
    def from_arrays(cls, x, y, w_left, w_right, *, s=None, psi=None, kappa=None, closed=True):
        """Build a layout from raw columns, deriving any omitted channel.

        ``s`` is recomputed from chord lengths when absent, headings from
        central differences of the points, curvature from central differences
        of the headings.
        """
        s, x, y, psi, kappa, total_length = _complete_geometry(x, y, s, psi, kappa, closed, "track")
        w_left = _as_readonly(np.broadcast_to(np.asarray(w_left, dtype=float), x.shape).copy())
        w_right = _as_readonly(np.broadcast_to(np.asarray(w_right, dtype=float), x.shape).copy())
        if w_left.shape != x.shape or w_right.shape != x.shape:
            raise TrackValidationError("track width columns must match the point count")
        return cls(s, x, y, psi, kappa, w_left, w_right, total_length, closed)

    @property
    def n_points(self) -> int:
        return int(self.s.size)


@dataclass(frozen=True)
class Raceline:
    """A drivable reference line: geometry plus a reference speed per node."""

    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    psi: np.ndarray
    kappa: np.ndarray
    v_ref: np.ndarray
    total_length: float
    closed: bool
    _curve: _Curve = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if np.any(~np.isfinite(self.v_ref)) or np.any(self.v_ref <= 0.0):
            bad = int(np.argmax(~(self.v_ref > 0.0)))
            raise TrackValidationError(f"raceline v_ref must be positive, violated at row {bad}")
        object.__setattr__(
            self, "_curve", _Curve(self.s, self.x, self.y, self.psi, self.total_length, self.closed)
        )

    @classmethod
    def from_arrays(cls, x, y, v_ref, *, s=None, psi=None, kappa=None, closed=True):
        s, x, y, psi, kappa, total_length = _complete_geometry(x, y, s, psi, kappa, closed, "raceline")
        v_ref = _as_readonly(v_ref)
        if v_ref.shape != x.shape:
            raise TrackValidationError("raceline vx column must match the point count")
        return cls(s, x, y, psi, kappa, v_ref, total_length, closed)

    def speed_at(self, s) -> float:
        """Reference speed interpolated at arc length ``s`` (periodic)."""
        j, t = self._curve.locate(s)
        return float(self._curve.channel(self.v_ref, j, t))

    def project(self, x, y):
        """Arc length and lateral offset of the foot point of ``(x, y)``."""
        s, d, _ = self._curve.project(float(x), float(y))
        return FrenetPose(s, d)

    def point_at(self, s):
        """Plan-view position and heading at arc length ``s`` (periodic)."""
        j, t = self._curve.locate(s)
        px, py = self._curve.point(j, t)
        return float(px), float(py), float(self._curve.heading(j, t))


def _parse_csv_columns(path: Path, allowed: Sequence[str], required: Sequence[str], what: str):
    try:
        text = path.read_text()
    except OSError as exc:
        raise TrackValidationError(f"cannot read {what} file {path}: {exc}") from exc
    rows = []
    header = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        cells = [c.strip() for c in line.split(",")]
        if header is None:
            header = cells
            unknown = [c for c in header if c not in allowed]
            if unknown:
                raise TrackFormatError(
                    f"{what} {path}: malformed header, unknown column(s) {unknown}; "
                    f"allowed: {list(allowed)}"
                )
            missing = [c for c in required if c not in header]
            if missing:
                raise TrackFormatError(f"{what} {path}: malformed header, missing column(s) {missing}")
            if len(set(header)) != len(header):
                raise TrackFormatError(f"{what} {path}: malformed header, duplicate column")
            continue
        if len(cells) != len(header):
            raise TrackFormatError(
                f"{what} {path}: line {lineno} has {len(cells)} fields, header has {len(header)}"
            )
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise TrackFormatError(f"{what} {path}: line {lineno}: {exc}") from exc
    if header is None:
        raise TrackFormatError(f"{what} {path}: empty file, expected a header line")
    if not rows:
        raise TrackFormatError(f"{what} {path}: no data rows")
    data = np.asarray(rows, dtype=float)
    return {name: data[:, i] for i, name in enumerate(header)}


def load_track(path, *, closed=True) -> TrackLayout:
    """Load a centerline CSV (``s_m,x_m,y_m,psi_rad,kappa_radpm,w_tr_left_m,w_tr_right_m``).

    Lines starting with ``#`` are comments.  ``s_m``, ``psi_rad`` and
    ``kappa_radpm`` may be omitted and are then recomputed from the points.
    Raises :class:`TrackFormatError` for unparseable files and
    :class:`TrackValidationError` for geometric violations.
    """
    cols = _parse_csv_columns(
        Path(path), _TRACK_COLUMNS, ("x_m", "y_m", "w_tr_left_m", "w_tr_right_m"), "track"
    )
    return TrackLayout.from_arrays(
        cols["x_m"],
        cols["y_m"],
        cols["w_tr_left_m"],
        cols["w_tr_right_m"],
        s=cols.get("s_m"),
        psi=cols.get("psi_rad"),
        kappa=cols.get("kappa_radpm"),
        closed=closed,
    )


def load_raceline(path, track: TrackLayout | None = None, *, closed=True) -> Raceline:
    """Load a raceline CSV (``s_m,x_m,y_m,psi_rad,kappa_radpm,vx_mps``).

    When ``track`` is given, every raceline point must lie inside the track
    corridor; a point outside its local ``[-w_right, w_left]`` band raises
    :class:`TrackValidationError`.
    """
    cols = _parse_csv_columns(Path(path), _RACELINE_COLUMNS, ("x_m", "y_m", "vx_mps"), "raceline")
    line = Raceline.from_arrays(
        cols["x_m"],
        cols["y_m"],
        cols["vx_mps"],
        s=cols.get("s_m"),
        psi=cols.get("psi_rad"),
        kappa=cols.get("kappa_radpm"),
        closed=closed,
    )
    if track is not None:
        for i in range(line.x.size):
            pose = cartesian_to_frenet(track, float(line.x[i]), float(line.y[i]))
            sample = track_query(track, None, pose.s)
            if not (-sample.w_right <= pose.d <= sample.w_left):
                raise TrackValidationError(
                    f"raceline point {i} at s={pose.s:.3f} is outside the track corridor "
                    f"(d={pose.d:.3f}, corridor [-{sample.w_right:.3f}, {sample.w_left:.3f}])"
                )
    return line


def _write_csv(path, header, columns):
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def save_track_csv(track: TrackLayout, path) -> None:
    """Write a track back out in the canonical column order."""
    _write_csv(
        path,
        _TRACK_COLUMNS,
        (track.s, track.x, track.y, track.psi_ref, track.kappa, track.w_left, track.w_right),
    )


def save_raceline_csv(line: Raceline, path) -> None:
    """Write a raceline in the canonical column order."""
    _write_csv(path, _RACELINE_COLUMNS, (line.s, line.x, line.y, line.psi, line.kappa, line.v_ref))


def cartesian_to_frenet(track: TrackLayout, x, y) -> FrenetPose:
    """Project a plan-view point onto the centerline.

    Returns the arc length of the foot point (in ``[0, total_length)``) and
    the signed lateral offset (positive left of the direction of travel).
    Equidistant candidates resolve toward the smaller ``s``.
    """
    s, d, _ = track._curve.project(float(x), float(y))
    return FrenetPose(s, d)


def frenet_to_cartesian(track: TrackLayout, pose: FrenetPose):
    """Map track coordinates back to the plane.

    Returns ``(x, y, psi_ref)`` where ``psi_ref`` is the interpolated
    centerline heading at ``pose.s``.
    """
    j, t = track._curve.locate(pose.s)
    cx, cy = track._curve.point(j, t)
    psi = float(track._curve.heading(j, t))
    return (
        float(cx - pose.d * math.sin(psi)),
        float(cy + pose.d * math.cos(psi)),
        psi,
    )


def track_query(track: TrackLayout, raceline: Raceline | None, s) -> TrackSample:
    """Interpolate corridor widths, heading, curvature and (if a raceline is
    given) reference speed at arc length ``s``.  Queries wrap around on closed
    tracks, so ``s`` and ``s + total_length`` are the same station."""
    j, t = track._curve.locate(s)
    curve = track._curve
    return TrackSample(
        w_left=float(curve.channel(track.w_left, j, t)),
        w_right=float(curve.channel(track.w_right, j, t)),
        psi_ref=float(curve.heading(j, t)),
        kappa=float(curve.channel(track.kappa, j, t)),
        v_ref=float("nan") if raceline is None else raceline.speed_at(s),
    )


def sample_forward_waypoints(track: TrackLayout, raceline: Raceline, s0, spacing, n):
    """World-frame preview points ahead of station ``s0``.

    Returns three ``(n, 2)`` arrays: reference points (raceline, or the
    centerline when ``raceline`` is None), left corridor edge points and
    right corridor edge points, at stations ``s0 + k*spacing`` for
    ``k = 0..n-1`` (wrapping on closed tracks).
    """
    if n < 1:
        raise ValueError(f"waypoint count must be >= 1, got {n}")
    if spacing <= 0.0:
        raise ValueError(f"waypoint spacing must be positive, got {spacing}")
    stations = float(s0) + spacing * np.arange(n)

    ref_curve = track._curve if raceline is None else raceline._curve
    jr, tr = ref_curve.locate(stations)
    ref = np.column_stack(ref_curve.point(jr, tr))

    jt, tt = track._curve.locate(stations)
    cx, cy = track._curve.point(jt, tt)
    psi = track._curve.heading(jt, tt)
    nx = -np.sin(psi)
    ny = np.cos(psi)
    wl = track._curve.channel(track.w_left, jt, tt)
    wr = track._curve.channel(track.w_right, jt, tt)
    left = np.column_stack((cx + wl * nx, cy + wl * ny))
    right = np.column_stack((cx - wr * nx, cy - wr * ny))
    return ref, left, right


def generate_velocity_profile(
    s,
    kappa,
    *,
    a_lat_max,
    a_lon_max,
    a_brake_max,
    v_cap,
    closed=True,
    total_length=None,
):
    """Curvature-limited speed profile over a station grid.

    Starts from the lateral-acceleration cap ``sqrt(a_lat_max / |kappa|)``
    (clamped to ``v_cap``), then runs forward passes limited by ``a_lon_max``
    and backward passes limited by ``a_brake_max`` until the profile is
    consistent, wrapping across the start line for closed tracks.
    """
    for name, val in (
        ("a_lat_max", a_lat_max),
        ("a_lon_max", a_lon_max),
        ("a_brake_max", a_brake_max),
        ("v_cap", v_cap),
    ):
        if not val > 0.0:
            raise ValueError(f"{name} must be positive, got {val}")
    s = np.asarray(s, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    n = s.size
    with np.errstate(divide="ignore"):
        v = np.minimum(np.sqrt(a_lat_max / np.maximum(np.abs(kappa), 1e-12)), v_cap)
    ds = np.diff(s)
    if closed:
        if total_length is None:
            raise ValueError("closed profile needs total_length")
        ds = np.append(ds, total_length - s[-1])

    def forward_pass():
        changed = False
        for i in range(n - 1):
            cap = math.sqrt(v[i] ** 2 + 2.0 * a_lon_max * ds[i])
            if v[i + 1] > cap:
                v[i + 1] = cap
                changed = True
        if closed:
            cap = math.sqrt(v[n - 1] ** 2 + 2.0 * a_lon_max * ds[n - 1])
            if v[0] > cap:
                v[0] = cap
                changed = True
        return changed

    def backward_pass():
        changed = False
        if closed:
            cap = math.sqrt(v[0] ** 2 + 2.0 * a_brake_max * ds[n - 1])
            if v[n - 1] > cap:
                v[n - 1] = cap
                changed = True
        for i in range(n - 2, -1, -1):
            cap = math.sqrt(v[i + 1] ** 2 + 2.0 * a_brake_max * ds[i])
            if v[i] > cap:
                v[i] = cap
                changed = True
        return changed

    # Each pass only lowers speeds and the caps are monotone in the inputs, so
    # this terminates; a handful of laps suffices for any sane closed track.
    for _ in range(64):
        f = forward_pass()
        b = backward_pass()
        if not (f or b):
            break
    return v


def synthetic_oval(
    *,
    straight_length=10.0,
    radius=3.0,
    width_left=0.8,
    width_right=0.8,
    node_spacing=0.05,
) -> TrackLayout:
    """Analytic stadium oval: two straights joined by two semicircles.

    Starts at the beginning of the lower straight heading ``+x`` and runs
    counterclockwise.  Arc length, headings and curvature are exact, which
    makes the oval a convenient geometry oracle for tests as well as the
    default training track.
    """
    if straight_length <= 0.0 or radius <= 0.0:
        raise ValueError("straight_length and radius must be positive")
    total = 2.0 * straight_length + 2.0 * math.pi * radius
    n = max(int(round(total / node_spacing)), 8)
    s = total * np.arange(n) / n
    x = np.empty(n)
    y = np.empty(n)
    psi = np.empty(n)
    kappa = np.empty(n)
    arc = math.pi * radius
    for i, si in enumerate(s):
        if si < straight_length:
            x[i], y[i], psi[i], kappa[i] = si, 0.0, 0.0, 0.0
        elif si < straight_length + arc:
            theta = (si - straight_length) / radius - 0.5 * math.pi
            x[i] = straight_length + radius * math.cos(theta)
            y[i] = radius + radius * math.sin(theta)
            psi[i] = theta + 0.5 * math.pi
            kappa[i] = 1.0 / radius
        elif si < 2.0 * straight_length + arc:
            x[i] = straight_length - (si - straight_length - arc)
            y[i] = 2.0 * radius
            psi[i] = math.pi
            kappa[i] = 0.0
        else:
            theta = 0.5 * math.pi + (si - 2.0 * straight_length - arc) / radius
            x[i] = radius * math.cos(theta)
            y[i] = radius + radius * math.sin(theta)
            psi[i] = theta + 0.5 * math.pi
            kappa[i] = 1.0 / radius
    track = TrackLayout(
        s=_as_readonly(s),
        x=_as_readonly(x),
        y=_as_readonly(y),
        psi_ref=_as_readonly(wrap_angle(psi)),
        kappa=_as_readonly(kappa),
        w_left=_as_readonly(np.full(n, float(width_left))),
        w_right=_as_readonly(np.full(n, float(width_right))),
        total_length=total,
        closed=True,
    )
    return track


def centerline_raceline(
    track: TrackLayout,
    *,
    a_lat_max=3.0,
    a_lon_max=2.5,
    a_brake_max=2.5,
    v_cap=6.0,
) -> Raceline:
    """Raceline that follows the centerline with a feasible speed profile."""
    v = generate_velocity_profile(
        track.s,
        track.kappa,
        a_lat_max=a_lat_max,
        a_lon_max=a_lon_max,
        a_brake_max=a_brake_max,
        v_cap=v_cap,
        closed=track.closed,
        total_length=track.total_length,
    )
    return Raceline(
        s=track.s,
        x=track.x,
        y=track.y,
        psi=track.psi_ref,
        kappa=track.kappa,
        v_ref=_as_readonly(v),
        total_length=track.total_length,
        closed=track.closed,
    )
