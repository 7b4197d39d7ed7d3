import math

import numpy as np
import pytest

from rlpp import trackmodel as tm

OVAL_LENGTH = 20.0 + 6.0 * math.pi  # two 10 m straights, two radius-3 semicircles


def test_wrap_angle_half_open_interval():
    assert tm.wrap_angle(math.pi) == pytest.approx(math.pi)
    assert tm.wrap_angle(-math.pi) == pytest.approx(math.pi)
    assert tm.wrap_angle(0.0) == 0.0
    assert tm.wrap_angle(1.5 * math.pi) == pytest.approx(-0.5 * math.pi)
    arr = tm.wrap_angle(np.array([0.0, 2.0 * math.pi, -3.0 * math.pi]))
    np.testing.assert_allclose(arr, [0.0, 0.0, math.pi], atol=1e-12)


def test_unit_square_perimeter():
    track = tm.TrackLayout.from_arrays(
        x=[0.0, 1.0, 1.0, 0.0],
        y=[0.0, 0.0, 1.0, 1.0],
        w_left=0.2,
        w_right=0.2,
        closed=True,
    )
    assert track.total_length == 4.0
    np.testing.assert_allclose(track.s, [0.0, 1.0, 2.0, 3.0])


def test_oval_analytic_geometry(oval):
    assert oval.total_length == pytest.approx(OVAL_LENGTH, abs=1e-12)
    # curvature is exactly 0 on straights and 1/R on the arcs
    straight = np.abs(oval.kappa) < 1e-15
    arc = np.abs(oval.kappa - 1.0 / 3.0) < 1e-15
    assert np.all(straight | arc)
    # headings at a few analytic stations
    sample = tm.track_query(oval, None, 5.0)
    assert sample.psi_ref == pytest.approx(0.0, abs=1e-12)
    assert sample.kappa == pytest.approx(0.0, abs=1e-12)
    top_of_arc = 10.0 + 1.5 * math.pi  # quarter way around the first semicircle
    sample = tm.track_query(oval, None, top_of_arc)
    assert sample.psi_ref == pytest.approx(0.5 * math.pi, abs=1e-3)
    assert sample.kappa == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_closed_track_closure_consistency(oval):
    x0, y0, psi0 = tm.frenet_to_cartesian(oval, tm.FrenetPose(0.0, 0.0))
    x1, y1, psi1 = tm.frenet_to_cartesian(oval, tm.FrenetPose(oval.total_length, 0.0))
    assert math.hypot(x1 - x0, y1 - y0) < 1e-6
    assert abs(tm.wrap_angle(psi1 - psi0)) < 1e-6


def test_frenet_round_trip_thousand_poses(oval):
    rng = np.random.default_rng(7)
    s_in = rng.uniform(0.0, oval.total_length, 1000)
    d_in = rng.uniform(-0.7, 0.7, 1000)
    worst = 0.0
    for s, d in zip(s_in, d_in):
        x, y, _ = tm.frenet_to_cartesian(oval, tm.FrenetPose(s, d))
        pose = tm.cartesian_to_frenet(oval, x, y)
        x2, y2, _ = tm.frenet_to_cartesian(oval, pose)
        worst = max(worst, math.hypot(x2 - x, y2 - y))
        ds = abs(pose.s - s)
        ds = min(ds, oval.total_length - ds)
        assert ds < 1e-6
        assert abs(pose.d - d) < 1e-6
    assert worst < 1e-6


def test_projection_sign_convention(oval):
    # on the lower straight the car travels +x, so +y is the left edge
    pose = tm.cartesian_to_frenet(oval, 5.0, 0.5)
    assert pose.d == pytest.approx(0.5, abs=1e-9)
    assert pose.s == pytest.approx(5.0, abs=1e-9)
    pose = tm.cartesian_to_frenet(oval, 5.0, -0.3)
    assert pose.d == pytest.approx(-0.3, abs=1e-9)


def test_projection_is_deterministic(oval):
    a = tm.cartesian_to_frenet(oval, 9.97, 2.9)
    b = tm.cartesian_to_frenet(oval, 9.97, 2.9)
    assert a == b


def test_queries_wrap_around(oval, oval_raceline):
    # one full lap later is the same station, up to fp noise in the modulo
    for s in (0.3, 17.2, OVAL_LENGTH - 1e-3):
        a = tm.track_query(oval, oval_raceline, s)
        b = tm.track_query(oval, oval_raceline, s + oval.total_length)
        assert b.w_left == pytest.approx(a.w_left, abs=1e-9)
        assert b.w_right == pytest.approx(a.w_right, abs=1e-9)
        assert tm.wrap_angle(b.psi_ref - a.psi_ref) == pytest.approx(0.0, abs=1e-9)
        assert b.kappa == pytest.approx(a.kappa, abs=1e-9)
        assert b.v_ref == pytest.approx(a.v_ref, abs=1e-9)
        pa = tm.frenet_to_cartesian(oval, tm.FrenetPose(s, 0.1))
        pb = tm.frenet_to_cartesian(oval, tm.FrenetPose(s + oval.total_length, 0.1))
        np.testing.assert_allclose(pb[:2], pa[:2], atol=1e-9)


def test_frenet_to_cartesian_hits_nodes(oval):
    for i in (0, 100, 400):
        x, y, psi = tm.frenet_to_cartesian(oval, tm.FrenetPose(float(oval.s[i]), 0.0))
        assert x == pytest.approx(oval.x[i], abs=1e-12)
        assert y == pytest.approx(oval.y[i], abs=1e-12)
        assert tm.wrap_angle(psi - oval.psi_ref[i]) == pytest.approx(0.0, abs=1e-12)


def test_derived_channels_match_analytic_oval(oval, tmp_path):
    # write only the raw columns and let the loader rebuild s/psi/kappa
    path = tmp_path / "bare.csv"
    lines = ["x_m,y_m,w_tr_left_m,w_tr_right_m"]
    for i in range(oval.n_points):
        lines.append(f"{float(oval.x[i])!r},{float(oval.y[i])!r},0.8,0.8")
    path.write_text("\n".join(lines) + "\n")
    rebuilt = tm.load_track(path)
    assert rebuilt.total_length == pytest.approx(oval.total_length, abs=1e-3)
    np.testing.assert_allclose(rebuilt.s, oval.s, atol=1e-3)
    dpsi = tm.wrap_angle(rebuilt.psi_ref - oval.psi_ref)
    assert np.max(np.abs(dpsi)) < 0.02
    # interior arc nodes away from the joins recover 1/R
    arc_interior = (oval.s > 11.0) & (oval.s < 10.0 + 3.0 * math.pi - 1.0)
    np.testing.assert_allclose(rebuilt.kappa[arc_interior], 1.0 / 3.0, atol=1e-3)


def test_csv_round_trip(oval, oval_raceline, tmp_path):
    tpath = tmp_path / "track.csv"
    tm.save_track_csv(oval, tpath)
    again = tm.load_track(tpath)
    np.testing.assert_array_equal(again.s, oval.s)
    np.testing.assert_array_equal(again.x, oval.x)
    np.testing.assert_array_equal(again.psi_ref, oval.psi_ref)
    np.testing.assert_array_equal(again.w_left, oval.w_left)
    # the reloaded closing segment is a chord, the analytic one an arc
    assert again.total_length == pytest.approx(oval.total_length, abs=1e-6)

    rpath = tmp_path / "raceline.csv"
    tm.save_raceline_csv(oval_raceline, rpath)
    rl = tm.load_raceline(rpath, oval)
    np.testing.assert_array_equal(rl.v_ref, oval_raceline.v_ref)


def test_comments_and_blank_lines_are_ignored(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text(
        "# layout export\n"
        "x_m,y_m,w_tr_left_m,w_tr_right_m\n"
        "\n"
        "0.0,0.0,0.5,0.5  # start\n"
        "1.0,0.0,0.5,0.5\n"
        "1.0,1.0,0.5,0.5\n"
        "0.0,1.0,0.5,0.5\n"
    )
    track = tm.load_track(path)
    assert track.n_points == 4


@pytest.mark.parametrize(
    "header,exc,hint",
    [
        ("x_m,y_m,w_tr_left_m,w_tr_right_m,bogus_col", tm.TrackFormatError, "unknown"),
        ("x_m,y_m,w_tr_left_m", tm.TrackFormatError, "missing"),
        ("x_m,x_m,y_m,w_tr_left_m,w_tr_right_m", tm.TrackFormatError, "duplicate"),
    ],
)
def test_malformed_header_rejected(tmp_path, header, exc, hint):
    path = tmp_path / "bad.csv"
    ncols = len(header.split(","))
    row = ",".join(["0.5"] * ncols)
    path.write_text(header + "\n" + row + "\n")
    with pytest.raises(exc, match=hint):
        tm.load_track(path)


def test_non_numeric_cell_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x_m,y_m,w_tr_left_m,w_tr_right_m\n0.0,zero,0.5,0.5\n")
    with pytest.raises(tm.TrackFormatError, match="line 2"):
        tm.load_track(path)


def test_empty_file_rejected(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("# nothing here\n")
    with pytest.raises(tm.TrackFormatError, match="empty"):
        tm.load_track(path)


def test_non_monotone_s_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(
        "s_m,x_m,y_m,w_tr_left_m,w_tr_right_m\n"
        "0.0,0.0,0.0,0.5,0.5\n"
        "1.0,1.0,0.0,0.5,0.5\n"
        "0.9,1.0,1.0,0.5,0.5\n"
        "3.0,0.0,1.0,0.5,0.5\n"
    )
    with pytest.raises(tm.TrackValidationError, match="strictly increasing"):
        tm.load_track(path)


def test_non_positive_width_rejected():
    with pytest.raises(tm.TrackValidationError, match="width"):
        tm.TrackLayout.from_arrays(
            x=[0.0, 1.0, 1.0, 0.0],
            y=[0.0, 0.0, 1.0, 1.0],
            w_left=[0.5, 0.5, 0.0, 0.5],
            w_right=0.5,
            closed=True,
        )


def test_duplicated_first_point_rejected():
    with pytest.raises(tm.TrackValidationError, match="repeat"):
        tm.TrackLayout.from_arrays(
            x=[0.0, 1.0, 1.0, 0.0, 0.0],
            y=[0.0, 0.0, 1.0, 1.0, 0.0],
            w_left=0.5,
            w_right=0.5,
            closed=True,
        )


def test_open_curve_declared_closed_rejected():
    x = np.linspace(0.0, 100.0, 500)
    with pytest.raises(tm.TrackValidationError, match="closing gap"):
        tm.TrackLayout.from_arrays(x=x, y=np.zeros_like(x), w_left=0.5, w_right=0.5, closed=True)


def test_raceline_corridor_membership(oval):
    # a line displaced past the left edge must be rejected
    off = 1.0
    x = oval.x - off * np.sin(oval.psi_ref)
    y = oval.y + off * np.cos(oval.psi_ref)
    line = tm.Raceline.from_arrays(x=x, y=y, v_ref=np.full(oval.n_points, 2.0), closed=True)
    import tempfile, pathlib

    with tempfile.TemporaryDirectory() as tmp:
        path = pathlib.Path(tmp) / "r.csv"
        tm.save_raceline_csv(line, path)
        with pytest.raises(tm.TrackValidationError, match="corridor"):
            tm.load_raceline(path, oval)


def test_raceline_requires_positive_speed(oval):
    with pytest.raises(tm.TrackValidationError, match="positive"):
        tm.Raceline.from_arrays(
            x=oval.x, y=oval.y, v_ref=np.zeros(oval.n_points), closed=True
        )


def test_velocity_profile_corner_oracle():
    # open straight with one curvature spike: the profile must dip to the
    # lateral limit there and obey accel/brake rates either side
    n = 101
    s = np.linspace(0.0, 10.0, n)
    kappa = np.zeros(n)
    kappa[50] = 1.0
    v = tm.generate_velocity_profile(
        s, kappa, a_lat_max=3.0, a_lon_max=2.5, a_brake_max=2.5, v_cap=8.0, closed=False
    )
    assert v[50] == pytest.approx(math.sqrt(3.0), abs=1e-12)
    ds = np.diff(s)
    dv2 = np.diff(v**2)
    assert np.all(dv2 <= 2.0 * 2.5 * ds + 1e-9)
    assert np.all(-dv2 <= 2.0 * 2.5 * ds + 1e-9)
    assert np.all(v <= 8.0 + 1e-12)


def test_velocity_profile_oval_plateaus(oval, oval_raceline):
    v = oval_raceline.v_ref
    # arcs pin the speed to sqrt(a_lat * R) = 3; the 10 m straights are too
    # short to reach the 6 m/s cap (accelerating 5 m from 3 gives sqrt(34))
    assert np.min(v) == pytest.approx(3.0, abs=1e-9)
    assert math.sqrt(34.0) - 1e-9 <= np.max(v) <= math.sqrt(34.5)
    arc = np.abs(oval.kappa - 1.0 / 3.0) < 1e-15
    np.testing.assert_allclose(v[arc], 3.0, atol=1e-9)


def test_velocity_profile_feasible_across_start_line(oval, oval_raceline):
    v = oval_raceline.v_ref
    s = oval.s
    ds = np.append(np.diff(s), oval.total_length - s[-1])
    v_next = np.append(v[1:], v[0])
    dv2 = v_next**2 - v**2
    assert np.all(dv2 <= 2.0 * 2.5 * ds + 1e-9)
    assert np.all(-dv2 <= 2.0 * 2.5 * ds + 1e-9)


def test_velocity_profile_rejects_bad_limits(oval):
    with pytest.raises(ValueError, match="a_lat_max"):
        tm.generate_velocity_profile(
            oval.s, oval.kappa, a_lat_max=0.0, a_lon_max=1.0, a_brake_max=1.0, v_cap=5.0,
            closed=True, total_length=oval.total_length,
        )


def test_forward_waypoints_geometry(oval, oval_raceline):
    ref, left, right = tm.sample_forward_waypoints(oval, oval_raceline, 2.0, 0.5, 20)
    assert ref.shape == left.shape == right.shape == (20, 2)
    # first station sits on the raceline at s0
    x0, y0, _ = oval_raceline.point_at(2.0)
    np.testing.assert_allclose(ref[0], [x0, y0], atol=1e-12)
    # edge points sit one half-width off the centerline
    for k in range(20):
        s_k = 2.0 + 0.5 * k
        cx, cy, _ = tm.frenet_to_cartesian(oval, tm.FrenetPose(s_k, 0.0))
        assert math.hypot(left[k, 0] - cx, left[k, 1] - cy) == pytest.approx(0.8, abs=1e-9)
        assert math.hypot(right[k, 0] - cx, right[k, 1] - cy) == pytest.approx(0.8, abs=1e-9)


def test_forward_waypoints_wrap_past_start(oval, oval_raceline):
    s0 = oval.total_length - 1.0
    ref, _, _ = tm.sample_forward_waypoints(oval, oval_raceline, s0, 0.5, 20)
    # station 4 has wrapped: s = L - 1 + 2.0 -> s = 1.0
    x, y, _ = oval_raceline.point_at(1.0)
    np.testing.assert_allclose(ref[4], [x, y], atol=1e-9)


def test_forward_waypoints_validates_arguments(oval, oval_raceline):
    with pytest.raises(ValueError, match="spacing"):
        tm.sample_forward_waypoints(oval, oval_raceline, 0.0, 0.0, 5)
    with pytest.raises(ValueError, match="count"):
        tm.sample_forward_waypoints(oval, oval_raceline, 0.0, 0.5, 0)
