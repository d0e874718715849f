import logging
import math
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

LOG_LEVELS = {0: logging.WARNING, 1: logging.INFO}


def setup_logging(verbosity: int = 0, console: Optional[Console] = None) -> logging.Logger:
    """Route the package loggers through rich on standard error."""
    logger = logging.getLogger("bmv")
    level = LOG_LEVELS.get(verbosity, logging.DEBUG)
    logger.setLevel(level)
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    handler = RichHandler(
        console=console or Console(stderr=True),
        show_path=False,
        rich_tracebacks=verbosity > 1,
    )
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    logger.addHandler(handler)
    logger.propagate = False
    return logger


def format_float(x: float) -> str:
    """17 significant digits, enough to round-trip a double."""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def parse_assignment(text: str) -> tuple[str, str]:
    """Split ``NAME=VALUE``."""
    name, sep, value = text.partition("=")
    if not sep or not name.strip() or not value.strip():
        raise ValueError(f"expected NAME=VALUE, got {text!r}")
    return name.strip(), value.strip()


def parse_random_size(text: str) -> int:
    """Accept ``N`` or ``n=N``."""
    if "=" in text:
        name, value = parse_assignment(text)
        if name != "n":
            raise ValueError(f"expected n=N, got {text!r}")
        text = value
    n = int(text)
    if n < 1:
        raise ValueError(f"matrix size must be positive, got {n}")
    return n


def _check(flag: bool) -> str:
    return "[green]pass[/green]" if flag else "[red]FAIL[/red]"


def render_measure(measure, console: Console, max_rows: int = 12) -> None:
    """Atoms in full, density summarized."""
    atoms = Table(title="Atoms")
    atoms.add_column("s", justify="right")
    atoms.add_column("weight", justify="right")
    for s, weight in measure.atoms:
        atoms.add_row(format_float(s), format_float(weight))
    console.print(atoms)

    if measure.s_values.size:
        density = Table(title=f"Density ({measure.s_values.size} samples)")
        density.add_column("s", justify="right")
        density.add_column("w", justify="right")
        step = max(1, math.ceil(measure.s_values.size / max_rows))
        for s, w in measure.density_grid[::step]:
            density.add_row(format_float(s), format_float(w))
        console.print(density)
    console.print(
        f"shift {format_float(measure.shift)} ({measure.coordinates} coordinates), "
        f"radius {measure.radius}, nodes {measure.nodes_count}, precision {measure.precision}"
    )


def render_report(report, console: Console) -> None:
    table = Table(title="Verification")
    table.add_column("check")
    table.add_column("value", justify="right")
    table.add_column("tolerance", justify="right")
    table.add_column("result")
    tol = report.tolerances
    table.add_row(
        "Laplace round-trip",
        f"{report.max_rel_error:.3e}",
        f"{tol['tau_laplace']:.1e}",
        _check(report.laplace_pass),
    )
    table.add_row(
        "Sum over all branches",
        f"{report.lemma1_max:.3e}",
        f"{tol['tau_lemma1']:.1e}",
        _check(report.lemma1_pass),
    )
    table.add_row(
        "Minimum density",
        f"{report.min_density:.3e}",
        f"-{tol['tau_positivity']:.1e}",
        _check(report.positivity_pass),
    )
    table.add_row("Derivative error", f"{report.derivative_error:.3e}", "", "")
    table.add_row("Total mass error", f"{report.mass_error:.3e}", "", "")
    if report.monotonicity:
        table.add_row("Monotonicity minimum", f"{min(report.monotonicity):.3e}", "", "")
    for name, value in report.branch.items():
        table.add_row(f"Branch {name}", f"{value:.3e}", "", "")
    console.print(table)
    console.print(
        f"radius {report.radius}, nodes {report.nodes_count}, precision {report.precision}, "
        f"shift {format_float(report.shift)}"
    )


def render_coefficients(result, console: Console) -> None:
    console.print(" ".join(format_float(float(c)) for c in result.coefficients), soft_wrap=True)
