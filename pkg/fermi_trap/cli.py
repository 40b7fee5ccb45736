from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Annotated

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from fermi_trap.constants import LOG_LEVEL
from fermi_trap.exceptions import DomainError, NumericalError, ResolutionError
from fermi_trap.lib.exports import config_preamble, write_csv
from fermi_trap.logger import setup_rich_logger
from fermi_trap.runner import FigureError, run_figures
from fermi_trap.schemas.config import (
    DipoleConfig,
    EdgeConfig,
    ModelName,
    RunConfig,
    resolve_config,
)
from fermi_trap.theory.couplings import InteractionModel
from fermi_trap.theory.dipole import PhysicalParams, v1_estimate, v1d_scan
from fermi_trap.theory.fermi_edge import EdgeModel, sample_edge
from fermi_trap.theory.matrix_elements import MatrixElementTable, build_table, default_quadrature
from fermi_trap.theory.observables import (
    DensityProfile,
    friedel_stats,
    momentum_density,
    occupation_probabilities,
    particle_density,
    sum_rule_excess,
)

EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3

rich_console = Console()
app = typer.Typer(name="fermi-trap", no_args_is_help=True)

ConfigOption = Annotated[
    Path | None,
    typer.Option("--config", exists=True, dir_okay=False, help="JSON file with configuration"),
]
NOption = Annotated[int | None, typer.Option("--N", help="Particles per component")]
ModelOption = Annotated[ModelName | None, typer.Option("--model", help="Interaction model")]
AlphaOption = Annotated[
    float | None, typer.Option("--alpha-bar-1", help="Effective coupling of mode m=1 (<= 0)")
]
DecayOption = Annotated[float | None, typer.Option("--r", help="IM2 decay constant")]
PMaxOption = Annotated[int | None, typer.Option("--p-max", help="Largest |p| tabulated")]
MMaxOption = Annotated[int | None, typer.Option("--m-max", help="Largest m tabulated")]
GridStepOption = Annotated[float | None, typer.Option("--grid-step", help="Density grid step")]
OutDirOption = Annotated[Path | None, typer.Option("--out-dir", help="Output directory")]
ToleranceOption = Annotated[
    float | None, typer.Option("--tolerance", help="Relative quadrature tolerance")
]


@contextmanager
def reported_errors() -> Iterator[None]:
    """Prints errors through the console and maps them to exit codes."""
    try:
        yield
    except FigureError as error:
        rich_console.print(f"[red bold]Figure {error.figure} failed:[/] {error.cause}")
        numerical = isinstance(error.cause, NumericalError)
        raise typer.Exit(EXIT_NUMERICAL_ERROR if numerical else EXIT_CONFIG_ERROR) from error
    except NumericalError as error:
        rich_console.print(f"[red bold]Numerical failure:[/] {error}")
        raise typer.Exit(EXIT_NUMERICAL_ERROR) from error
    except (ValidationError, DomainError, ValueError, OSError) as error:
        rich_console.print(f"[red bold]Invalid configuration:[/] {error}")
        raise typer.Exit(EXIT_CONFIG_ERROR) from error


def _run_config(config_file: Path | None, **flags) -> RunConfig:
    return resolve_config(RunConfig, config_file, flags)


def _build_table(config: RunConfig, p_max: int | None = None) -> MatrixElementTable:
    couplings = config.couplings()
    return build_table(
        config.trap(),
        couplings,
        m_max=config.m_max,
        p_max=config.p_max if p_max is None else p_max,
        quadrature=config.quadrature(default_quadrature(couplings)),
        tail_tolerance=config.tail_tolerance,
    )


def _report(title: str, rows: list[tuple[str, str]]):
    table = Table(title=title, show_header=True)
    table.add_column("Quantity", style="cyan bold", no_wrap=True)
    table.add_column("Value", style="white")
    for name, value in rows:
        table.add_row(name, value)
    rich_console.print(table)


@app.callback()
def main(
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Debug logging")] = False,
):
    """Bosonized two-component Fermi gas in a one-dimensional harmonic trap."""
    setup_rich_logger("DEBUG" if verbose else LOG_LEVEL)


@app.command(name="couplings")
def couplings(
    config_file: ConfigOption = None,
    N: NOption = None,
    model: ModelOption = None,
    alpha_bar_1: AlphaOption = None,
    r: DecayOption = None,
):
    """Print the Bogoliubov parameters and effective couplings of a model."""
    with reported_errors():
        config = _run_config(config_file, N=N, model=model, alpha_bar_1=alpha_bar_1, r=r)
        effective = config.couplings()

    rows = [("model", str(effective.model)), ("V(1)", f"{effective.V1 or 0.0:.10g}")]
    if effective.mode_1 is not None:
        for nu, branch in ((+1, effective.mode_1.plus), (-1, effective.mode_1.minus)):
            rows += [
                (f"zeta_1({nu:+d})", f"{branch.zeta:.10g}"),
                (f"alpha_1({nu:+d})", f"{branch.alpha:.10g}"),
                (f"gamma_1({nu:+d})", f"{branch.gamma:.10g}"),
                (f"epsilon_1({nu:+d})", f"{branch.epsilon:.10g}"),
            ]
    rows += [
        ("alpha_bar_1", f"{effective.alpha_bar_1:.10g}"),
        ("gamma_bar_1", f"{effective.gamma_bar_1:.10g}"),
    ]
    if effective.model == InteractionModel.IM2:
        rows += [
            ("r", f"{effective.r_alpha:.10g}"),
            ("alpha_bar_0", f"{effective.alpha_bar_0:.10g}"),
            ("gamma_bar_0", f"{effective.gamma_bar_0:.10g}"),
            ("Z_alpha", f"{effective.Z_alpha:.10g}"),
            ("Z_gamma", f"{effective.Z_gamma:.10g}"),
            ("modes", str(effective.num_modes)),
        ]
    _report("Effective couplings", rows)


@app.command(name="table")
def table(
    config_file: ConfigOption = None,
    N: NOption = None,
    model: ModelOption = None,
    alpha_bar_1: AlphaOption = None,
    r: DecayOption = None,
    p_max: PMaxOption = None,
    m_max: MMaxOption = None,
    tolerance: ToleranceOption = None,
    out_dir: OutDirOption = None,
):
    """Tabulate the one-particle matrix elements M(m, p)."""
    with reported_errors():
        config = _run_config(
            config_file,
            N=N,
            model=model,
            alpha_bar_1=alpha_bar_1,
            r=r,
            p_max=p_max,
            m_max=m_max,
            tolerance=tolerance,
            out_dir=out_dir,
        )
        elements = _build_table(config)
        path = elements.to_csv(config.out_dir / "table.csv", config_preamble("table", config))
        residual = elements.reflection_residual()

    _report(
        f"Matrix elements ({config.model}, N={config.N})",
        [
            ("m_max", str(elements.m_max)),
            ("p_max", str(elements.p_max)),
            ("reflection residual", f"{residual:.3g}"),
            ("file", str(path)),
        ],
    )


@app.command(name="occupation")
def occupation(
    config_file: ConfigOption = None,
    N: NOption = None,
    model: ModelOption = None,
    alpha_bar_1: AlphaOption = None,
    r: DecayOption = None,
    m_max: MMaxOption = None,
    tolerance: ToleranceOption = None,
    out_dir: OutDirOption = None,
):
    """Occupation probabilities P(m) of the oscillator states and the sum rule excess."""
    with reported_errors():
        config = _run_config(
            config_file,
            N=N,
            model=model,
            alpha_bar_1=alpha_bar_1,
            r=r,
            m_max=m_max,
            tolerance=tolerance,
            out_dir=out_dir,
        )
        P = occupation_probabilities(_build_table(config, p_max=0))
        path = write_csv(
            config.out_dir / "occupation.csv",
            ("m", "P"),
            ((m, float(value)) for m, value in enumerate(P)),
            config_preamble("occupation", config),
        )

    _report(
        f"Occupations ({config.model}, N={config.N})",
        [
            ("P(N-1) + P(N)", f"{P[config.N - 1] + P[config.N]:.12g}"),
            ("sum rule excess", f"{sum_rule_excess(P, config.N):.6g}"),
            ("file", str(path)),
        ],
    )


def _profile_command(command: str, config: RunConfig) -> tuple[DensityProfile, Path]:
    elements = _build_table(config)
    density = particle_density if command == "density" else momentum_density
    profile = density(elements, config.grid())
    path = profile.to_csv(config.out_dir / f"{command}.csv", config_preamble(command, config))
    return profile, path


def _report_profile(title: str, profile: DensityProfile, path: Path):
    rows = [("integral", f"{profile.integral():.10g}")]
    try:
        stats = friedel_stats(profile)
    except ResolutionError as error:
        rich_console.print(f"[yellow]Friedel statistics skipped:[/] {error}")
    else:
        rows += [
            ("maxima inside L_F", str(stats.num_maxima)),
            ("oscillation amplitude", f"{stats.amplitude:.6g}"),
            ("relative amplitude", f"{stats.relative_amplitude:.6g}"),
            ("period", f"{stats.period_estimate:.6g}"),
        ]
    _report(title, [*rows, ("file", str(path))])


@app.command(name="density")
def density(
    config_file: ConfigOption = None,
    N: NOption = None,
    model: ModelOption = None,
    alpha_bar_1: AlphaOption = None,
    r: DecayOption = None,
    p_max: PMaxOption = None,
    m_max: MMaxOption = None,
    grid_step: GridStepOption = None,
    tolerance: ToleranceOption = None,
    out_dir: OutDirOption = None,
):
    """Particle density n(z) in units of the oscillator length."""
    with reported_errors():
        config = _run_config(
            config_file,
            N=N,
            model=model,
            alpha_bar_1=alpha_bar_1,
            r=r,
            p_max=p_max,
            m_max=m_max,
            grid_step=grid_step,
            tolerance=tolerance,
            out_dir=out_dir,
        )
        profile, path = _profile_command("density", config)
    _report_profile(f"Particle density ({config.model}, N={config.N})", profile, path)


@app.command(name="momentum")
def momentum(
    config_file: ConfigOption = None,
    N: NOption = None,
    model: ModelOption = None,
    alpha_bar_1: AlphaOption = None,
    r: DecayOption = None,
    p_max: PMaxOption = None,
    m_max: MMaxOption = None,
    grid_step: GridStepOption = None,
    tolerance: ToleranceOption = None,
    out_dir: OutDirOption = None,
):
    """Momentum density p(k) in units of the inverse oscillator length."""
    with reported_errors():
        config = _run_config(
            config_file,
            N=N,
            model=model,
            alpha_bar_1=alpha_bar_1,
            r=r,
            p_max=p_max,
            m_max=m_max,
            grid_step=grid_step,
            tolerance=tolerance,
            out_dir=out_dir,
        )
        profile, path = _profile_command("momentum", config)
    _report_profile(f"Momentum density ({config.model}, N={config.N})", profile, path)


@app.command(name="edge")
def edge(
    config_file: ConfigOption = None,
    N: NOption = None,
    r: DecayOption = None,
    gamma_bar_0: Annotated[float | None, typer.Option("--gamma-bar-0")] = None,
    points: Annotated[int | None, typer.Option("--points", help="Samples of P(dk)")] = None,
    out_dir: OutDirOption = None,
):
    """Linearized occupation P(dk) at the Fermi edge."""
    with reported_errors():
        config = resolve_config(
            EdgeConfig,
            config_file,
            {
                "N": N,
                "r_gamma": r,
                "gamma_bar_0": gamma_bar_0,
                "n_points": points,
                "out_dir": out_dir,
            },
        )
        model = EdgeModel.create(config.N, config.r_gamma, config.gamma_bar_0)
        delta_k, P = sample_edge(model, config.n_points)
        path = write_csv(
            config.out_dir / "edge.csv",
            ("dk", "P"),
            zip(delta_k.tolist(), P.tolist(), strict=True),
            config_preamble("edge", config),
        )

    _report(
        f"Fermi edge (N={config.N})",
        [
            ("slope", f"{model.slope:.12g}"),
            ("slope per state", f"{model.slope_per_state:.12g}"),
            ("linear window |dk| <=", f"{model.window:.6g}"),
            ("file", str(path)),
        ],
    )


@app.command(name="dipole")
def dipole(
    config_file: ConfigOption = None,
    mu_bohr: Annotated[float | None, typer.Option("--mu-bohr", help="Moment [mu_B]")] = None,
    mass_u: Annotated[float | None, typer.Option("--mass-u", help="Atomic mass [u]")] = None,
    omega_ell: Annotated[float | None, typer.Option("--omega-ell", help="[rad/s]")] = None,
    omega_t: Annotated[float | None, typer.Option("--omega-t", help="[rad/s]")] = None,
    F: Annotated[float | None, typer.Option("--F", help="Filling factor N w_l / w_t")] = None,
    N: NOption = None,
    k_max: Annotated[float | None, typer.Option("--k-max", help="Scan range [1/m]")] = None,
    points: Annotated[int | None, typer.Option("--points", help="Samples of V_1D")] = None,
    out_dir: OutDirOption = None,
):
    """Dipolar coupling strength V(1) and the effective 1D potential."""
    with reported_errors():
        config = resolve_config(
            DipoleConfig,
            config_file,
            {
                "mu_bohr": mu_bohr,
                "mass_u": mass_u,
                "omega_ell": omega_ell,
                "omega_t": omega_t,
                "F": F,
                "N": N,
                "k_max": k_max,
                "n_points": points,
                "out_dir": out_dir,
            },
        )
        params = PhysicalParams.from_lab_units(
            config.mu_bohr, config.mass_u, config.omega_ell, config.omega_t, config.F, config.N
        )
        estimate = v1_estimate(params)
        k, potential = v1d_scan(params, config.k_max, config.n_points)
        path = write_csv(
            config.out_dir / "dipole.csv",
            ("k", "V1D"),
            zip(k.tolist(), potential.tolist(), strict=True),
            config_preamble("dipole", config),
        )

    _report(
        "Dipolar coupling",
        [
            ("V(1)", f"{estimate.V1:.10g}"),
            ("F", f"{estimate.F:.10g}"),
            ("alpha_t [1/m]", f"{params.alpha_t:.6g}"),
            ("calibrated (N=14)", str(estimate.calibrated)),
            ("file", str(path)),
        ],
    )


@app.command(name="figures")
def figures(
    config_file: ConfigOption = None,
    N: NOption = None,
    r: DecayOption = None,
    p_max: PMaxOption = None,
    m_max: MMaxOption = None,
    grid_step: GridStepOption = None,
    tolerance: ToleranceOption = None,
    out_dir: OutDirOption = None,
):
    """Data of the six reference figures as fig1.csv ... fig6.csv."""
    with reported_errors():
        config = _run_config(
            config_file,
            N=N,
            r=r,
            p_max=p_max,
            m_max=m_max,
            grid_step=grid_step,
            tolerance=tolerance,
            out_dir=out_dir,
        )
        results = run_figures(config)

    summary = Table(title=f"Figures (N={config.N})", show_header=True)
    summary.add_column("Figure", style="magenta")
    summary.add_column("Status", style="green")
    summary.add_column("Rows")
    summary.add_column("File")
    for result in results:
        summary.add_row(
            str(result.figure), str(result.status), str(result.num_rows), str(result.path)
        )
    rich_console.print(summary)


if __name__ == "__main__":
    app()
