import math
import time

import numpy as np
import pytest

from fermi_trap.constants import REFERENCE_N
from fermi_trap.exceptions import ConvergenceError
from fermi_trap.lib.exports import read_config_header, read_csv_columns
from fermi_trap.runner import FigureError, FigureId, JobStatus, run_figures
from fermi_trap.schemas.config import RunConfig


def test_weak_coupling_figures(tmp_path):
    config = RunConfig(out_dir=tmp_path)
    results = run_figures(config, figures=[FigureId.FIG1, FigureId.FIG2])
    assert [result.figure for result in results] == [FigureId.FIG1, FigureId.FIG2]
    assert all(result.status == JobStatus.OK for result in results)

    P = read_csv_columns(tmp_path / "fig1.csv")["P"]
    assert P[13] + P[14] == pytest.approx(1.0, abs=1e-9)
    assert math.fsum(P) == pytest.approx(14.0, abs=1e-9)
    assert read_config_header(tmp_path / "fig1.csv", RunConfig) == config

    columns = read_csv_columns(tmp_path / "fig2.csv")
    assert columns["m"][0] == 1.0
    assert len(columns["value"]) == results[1].num_rows


def test_figures_are_deterministic(tmp_path):
    config = RunConfig(N=6, out_dir=tmp_path)
    run_figures(config, figures=[FigureId.FIG1])
    first = (tmp_path / "fig1.csv").read_bytes()
    run_figures(config, figures=[FigureId.FIG1], max_workers=1)
    assert (tmp_path / "fig1.csv").read_bytes() == first


def test_failed_figure_writes_nothing(tmp_path):
    config = RunConfig(N=2, initial_nodes=16, tolerance=1e-30, out_dir=tmp_path)
    with pytest.raises(FigureError) as error:
        run_figures(config, figures=[FigureId.FIG5])
    assert error.value.figure == FigureId.FIG5
    assert isinstance(error.value.cause, ConvergenceError)
    assert list(tmp_path.iterdir()) == []


def _detrended(x: np.ndarray, values: np.ndarray) -> np.ndarray:
    period = math.pi / math.sqrt(2 * REFERENCE_N - 1)
    half = round(period / (x[1] - x[0])) // 2
    padded = np.pad(values, half, mode="edge")
    return values - np.convolve(padded, np.full(2 * half + 1, 1.0 / (2 * half + 1)), "valid")


def _profile_columns(path) -> dict[str, np.ndarray]:
    return {name: np.array(column) for name, column in read_csv_columns(path).items()}


def test_interacting_density_is_smoother(tmp_path):
    run_figures(RunConfig(out_dir=tmp_path), figures=[FigureId.FIG3])
    columns = _profile_columns(tmp_path / "fig3.csv")
    inside = np.abs(columns["z"]) < math.sqrt(2 * REFERENCE_N - 1)

    def sign_changes(curve: str) -> int:
        detrended = _detrended(columns["z"], columns[curve])[inside]
        return int(np.count_nonzero(np.diff(np.sign(detrended))))

    assert sign_changes("interacting") < sign_changes("free")


@pytest.mark.slow
def test_all_figures(tmp_path):
    started = time.perf_counter()
    results = run_figures(RunConfig(out_dir=tmp_path))
    assert time.perf_counter() - started < 300.0
    assert [result.figure for result in results] == list(FigureId)
    headers = {
        FigureId.FIG1: "m,P",
        FigureId.FIG2: "m,value",
        FigureId.FIG3: "z,free,interacting",
        FigureId.FIG4: "k,free,interacting",
        FigureId.FIG5: "m,P",
        FigureId.FIG6: "k,free,interacting",
    }
    first = {}
    for figure, header in headers.items():
        path = tmp_path / f"{figure}.csv"
        assert header in path.read_text().splitlines()
        first[figure] = path.read_bytes()

    columns = _profile_columns(tmp_path / "fig4.csv")
    central = np.abs(columns["k"]) < 0.5 * math.sqrt(2 * REFERENCE_N - 1)
    amplitudes = {
        curve: np.ptp(_detrended(columns["k"], columns[curve])[central])
        for curve in ("free", "interacting")
    }
    assert amplitudes["interacting"] > amplitudes["free"]

    run_figures(RunConfig(out_dir=tmp_path))
    for figure in headers:
        assert (tmp_path / f"{figure}.csv").read_bytes() == first[figure]
