import numpy as np
import numpy.testing as npt
import pytest

from weakforce.dynamics import PhasePoint, PotentialParams, integrate
from weakforce.fileio import (
    format_float,
    parse_inline_configuration,
    read_configuration_csv,
    read_trajectory_csv,
    write_configuration_csv,
    write_text,
    write_trajectory_csv,
)
from weakforce.presets import circular_two_body


def test_format_float_round_trips():
    for v in (0.1, 1.0 / 3.0, 1e-17, -2.5e300, 0.0):
        assert float(format_float(v)) == v
    assert format_float(1.0) == "1.0"


def test_configuration_round_trip(tmp_path):
    x = np.array([[0.1, -2.0, 3.5], [1.0 / 3.0, 4.0, -5.25]])
    path = tmp_path / "config.csv"
    write_configuration_csv(path, x)
    back = read_configuration_csv(path)
    npt.assert_array_equal(back, x)


def test_configuration_write_is_deterministic(tmp_path):
    x = np.array([[0.1, 0.2], [0.3, 0.4], [0.5, 0.6]])
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_configuration_csv(p1, x)
    write_configuration_csv(p2, x)
    assert p1.read_bytes() == p2.read_bytes()


def test_configuration_read_rejects_garbage(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x1_1,x1_2\n1.0,2.0\n")
    with pytest.raises(ValueError):
        read_configuration_csv(path)
    path.write_text("# bodies=2 dim=2\nx1_1,x1_2,x2_1,x2_2\n1.0,2.0,3.0\n")
    with pytest.raises(ValueError):
        read_configuration_csv(path)


def test_parse_inline_configuration():
    x = parse_inline_configuration("1,2; 3,4 ;5,6")
    npt.assert_array_equal(x, [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    x = parse_inline_configuration("1.5,-2e3;0,4e-2")
    npt.assert_array_equal(x, [[1.5, -2000.0], [0.0, 0.04]])


def test_parse_inline_rejects_bad_text():
    with pytest.raises(ValueError):
        parse_inline_configuration("")
    with pytest.raises(ValueError):
        parse_inline_configuration("1,2;3")
    with pytest.raises(ValueError):
        parse_inline_configuration("1,spam")
    # one row is not a many-body configuration
    with pytest.raises(ValueError):
        parse_inline_configuration("1.5,-2e3")


def test_trajectory_round_trip(tmp_path):
    state, params, period = circular_two_body()
    traj = integrate(state, period, params, t_eval=np.linspace(0.0, period, 17))
    path = tmp_path / "traj.csv"
    write_trajectory_csv(path, traj, params)
    times, positions, velocities, meta = read_trajectory_csv(path)
    npt.assert_array_equal(times, traj.times)
    npt.assert_array_equal(positions, traj.positions)
    npt.assert_array_equal(velocities, traj.velocities)
    assert meta["bodies"] == 2 and meta["dim"] == 2
    assert meta["alpha"] == params.alpha
    npt.assert_array_equal(meta["masses"], params.masses)


def test_trajectory_header_line(tmp_path):
    state, params, period = circular_two_body()
    traj = integrate(state, 0.5, params, t_eval=np.array([0.0, 0.5]))
    path = tmp_path / "traj.csv"
    write_trajectory_csv(path, traj, params)
    first = path.read_text().splitlines()[0]
    assert first.startswith("# bodies=2 dim=2 alpha=0.5 masses=")


def test_trajectory_read_rejects_missing_header(tmp_path):
    path = tmp_path / "traj.csv"
    path.write_text("t,x1_1\n0.0,1.0\n")
    with pytest.raises(ValueError):
        read_trajectory_csv(path)


def test_write_text_newline_guarantee(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    write_text(a, "report")
    write_text(b, "report\n")
    assert a.read_bytes() == b.read_bytes() == b"report\n"
