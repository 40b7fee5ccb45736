import csv
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path

from pydantic import BaseModel

logger = logging.getLogger(__name__)

COMMENT_PREFIX = "# "
CONFIG_PREFIX = "config: "

type CsvValue = int | float | str


def format_value(value: CsvValue) -> str:
    if isinstance(value, float):
        # Full double precision, identical bytes across runs
        return f"{value:.17g}"
    return str(value)


def config_preamble(command: str, config: BaseModel) -> list[str]:
    return [f"fermi-trap {command}", f"{CONFIG_PREFIX}{config.model_dump_json()}"]


def write_csv(
    path: Path,
    header: Sequence[str],
    rows: Iterable[Sequence[CsvValue]],
    preamble: Sequence[str] | None = None,
) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as file:
        for line in preamble or ():
            file.write(f"{COMMENT_PREFIX}{line}\n")
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([format_value(value) for value in row] for row in rows)
    logger.info(f"Wrote {path}")
    return path


def read_preamble(path: Path) -> list[str]:
    lines = []
    with path.open(encoding="utf-8") as file:
        for line in file:
            if not line.startswith(COMMENT_PREFIX):
                break
            lines.append(line.removeprefix(COMMENT_PREFIX).rstrip("\n"))
    return lines


def read_config_header[T: BaseModel](path: Path, model: type[T]) -> T:
    """Parses the `# config: {...}` line of a CSV written with `config_preamble`."""
    for line in read_preamble(path):
        if line.startswith(CONFIG_PREFIX):
            return model.model_validate_json(line.removeprefix(CONFIG_PREFIX))
    raise ValueError(f"{path} has no configuration header")


def read_csv_columns(path: Path) -> dict[str, list[float]]:
    """Numeric columns of a CSV written by `write_csv`, keyed by header name."""
    with path.open(encoding="utf-8") as file:
        lines = [line for line in file if not line.startswith(COMMENT_PREFIX)]
    reader = csv.DictReader(lines)
    columns: dict[str, list[float]] = {name: [] for name in reader.fieldnames or ()}
    for row in reader:
        for name, value in row.items():
            columns[name].append(float(value))
    return columns
