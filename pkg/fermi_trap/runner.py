import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from enum import StrEnum
from pathlib import Path

import numpy as np

from fermi_trap.constants import MAX_WORKERS
from fermi_trap.exceptions import FermiTrapError
from fermi_trap.lib.common import CustomBaseModel
from fermi_trap.lib.exports import CsvValue, config_preamble, write_csv
from fermi_trap.lib.helpers import partition
from fermi_trap.schemas.config import RunConfig
from fermi_trap.theory.couplings import (
    EffectiveCouplings,
    free_couplings,
    im1_couplings,
    im2_couplings,
)
from fermi_trap.theory.matrix_elements import MatrixElementTable, build_table, default_quadrature
from fermi_trap.theory.observables import DensityProfile, momentum_density, particle_density

logger = logging.getLogger(__name__)

# Effective couplings of the reference figures
WEAK_COUPLING = -1.0
STRONG_COUPLING = -10.0


class FigureId(StrEnum):
    FIG1 = "fig1"
    FIG2 = "fig2"
    FIG3 = "fig3"
    FIG4 = "fig4"
    FIG5 = "fig5"
    FIG6 = "fig6"


class TableKey(StrEnum):
    FREE = "free"
    IM1_WEAK = "im1_weak"
    IM1_STRONG = "im1_strong"
    IM2 = "im2"


class JobStatus(StrEnum):
    OK = "OK"
    FAILED = "FAILED"


class FigureError(FermiTrapError):
    def __init__(self, figure: FigureId, cause: Exception):
        super().__init__(f"{figure} failed: {cause}")
        self.figure = figure
        self.cause = cause


class FigureResult(CustomBaseModel):
    figure: FigureId
    status: JobStatus
    path: Path | None = None
    error: str | None = None
    num_rows: int = 0


type Tables = dict[TableKey, MatrixElementTable]
type Rows = list[tuple[CsvValue, ...]]
type FigureData = tuple[tuple[str, ...], Rows]
type Density = Callable[[MatrixElementTable, np.ndarray], DensityProfile]


def _occupation_rows(table: MatrixElementTable) -> Rows:
    return [(m, float(P)) for m, P in enumerate(table.occupations())]


def _profile_rows(
    config: RunConfig, free: MatrixElementTable, interacting: MatrixElementTable, density: Density
) -> Rows:
    grid = config.grid()
    free_values = density(free, grid).values
    interacting_values = density(interacting, grid).values
    return [
        (float(x), float(a), float(b))
        for x, a, b in zip(grid, free_values, interacting_values, strict=True)
    ]


def _fig1(config: RunConfig, tables: Tables) -> FigureData:
    return ("m", "P"), _occupation_rows(tables[TableKey.IM1_WEAK])


def _fig2(config: RunConfig, tables: Tables) -> FigureData:
    table = tables[TableKey.IM1_WEAK]
    return ("m", "value"), [(m, table.value(m, 1)) for m in range(1, table.m_max + 1)]


def _fig3(config: RunConfig, tables: Tables) -> FigureData:
    free, interacting = tables[TableKey.FREE], tables[TableKey.IM1_WEAK]
    return ("z", "free", "interacting"), _profile_rows(config, free, interacting, particle_density)


def _fig4(config: RunConfig, tables: Tables) -> FigureData:
    free, interacting = tables[TableKey.FREE], tables[TableKey.IM1_STRONG]
    return ("k", "free", "interacting"), _profile_rows(config, free, interacting, momentum_density)


def _fig5(config: RunConfig, tables: Tables) -> FigureData:
    return ("m", "P"), _occupation_rows(tables[TableKey.IM2])


def _fig6(config: RunConfig, tables: Tables) -> FigureData:
    free, interacting = tables[TableKey.FREE], tables[TableKey.IM2]
    return ("k", "free", "interacting"), _profile_rows(config, free, interacting, momentum_density)


FIGURE_BUILDERS: dict[FigureId, Callable[[RunConfig, Tables], FigureData]] = {
    FigureId.FIG1: _fig1,
    FigureId.FIG2: _fig2,
    FigureId.FIG3: _fig3,
    FigureId.FIG4: _fig4,
    FigureId.FIG5: _fig5,
    FigureId.FIG6: _fig6,
}

FIGURE_TABLES: dict[FigureId, tuple[TableKey, ...]] = {
    FigureId.FIG1: (TableKey.IM1_WEAK,),
    FigureId.FIG2: (TableKey.IM1_WEAK,),
    FigureId.FIG3: (TableKey.FREE, TableKey.IM1_WEAK),
    FigureId.FIG4: (TableKey.FREE, TableKey.IM1_STRONG),
    FigureId.FIG5: (TableKey.IM2,),
    FigureId.FIG6: (TableKey.FREE, TableKey.IM2),
}


class FigureJob(CustomBaseModel):
    figure: FigureId
    config: RunConfig

    @property
    def path(self) -> Path:
        return self.config.out_dir / f"{self.figure}.csv"

    @property
    def tables(self) -> tuple[TableKey, ...]:
        return FIGURE_TABLES[self.figure]

    def compute(self, tables: Tables) -> FigureData:
        return FIGURE_BUILDERS[self.figure](self.config, tables)


def _table_couplings(key: TableKey, config: RunConfig) -> EffectiveCouplings:
    match key:
        case TableKey.FREE:
            return free_couplings()
        case TableKey.IM1_WEAK:
            return im1_couplings(WEAK_COUPLING)
        case TableKey.IM1_STRONG:
            return im1_couplings(STRONG_COUPLING)
        case TableKey.IM2:
            return im2_couplings(WEAK_COUPLING, config.decay)


def build_figure_table(key: TableKey, config: RunConfig) -> MatrixElementTable:
    couplings = _table_couplings(key, config)
    return build_table(
        config.trap(),
        couplings,
        m_max=config.m_max,
        p_max=config.p_max,
        quadrature=config.quadrature(default_quadrature(couplings)),
        tail_tolerance=config.tail_tolerance,
    )


type Outcome = tuple[FigureResult, FigureData | None, Exception | None]


def run_figures(
    config: RunConfig,
    figures: Sequence[FigureId] = tuple(FigureId),
    max_workers: int = MAX_WORKERS,
) -> list[FigureResult]:
    """
    Computes the tables the requested figures need, then the figures, and writes one CSV per
    figure. Nothing is written unless every figure succeeded; files are written in figure order.

    Raises:
        FigureError: naming the first requested figure that failed.
    """
    jobs = [FigureJob(figure=figure, config=config) for figure in figures]
    keys = sorted({key for job in jobs for key in job.tables})

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = {key: executor.submit(build_figure_table, key, config) for key in keys}
        tables: Tables = {}
        table_errors: dict[TableKey, Exception] = {}
        for key, future in futures.items():
            try:
                tables[key] = future.result()
            except FermiTrapError as error:
                table_errors[key] = error

        def run(job: FigureJob) -> Outcome:
            try:
                missing = next((key for key in job.tables if key in table_errors), None)
                if missing is not None:
                    raise table_errors[missing]
                data = job.compute(tables)
            except FermiTrapError as error:
                failed = FigureResult(figure=job.figure, status=JobStatus.FAILED, error=str(error))
                return failed, None, error
            result = FigureResult(
                figure=job.figure, status=JobStatus.OK, path=job.path, num_rows=len(data[1])
            )
            return result, data, None

        outcomes = list(executor.map(run, jobs))

    succeeded, failed = partition(lambda outcome: outcome[0].status == JobStatus.OK, outcomes)
    if failed:
        result, _, error = failed[0]
        assert error is not None
        raise FigureError(result.figure, error)

    preamble = config_preamble("figures", config)
    for result, data, _ in succeeded:
        assert data is not None and result.path is not None
        header, rows = data
        write_csv(result.path, header, rows, preamble)
        logger.info(f"{result.figure} done ({result.num_rows} rows)")
    return [result for result, _, _ in succeeded]
