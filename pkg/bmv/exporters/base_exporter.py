"""Base exporter with payload dispatch and the shared dictionary forms."""

import math
from pathlib import Path
from typing import Any

from bmv.errors import ParameterError
from bmv.exporters.base import ExportTarget, IExporter
from bmv.laplace_verify import PolynomialResult, VerificationReport, report_to_dict
from bmv.measure import MeasureRepresentation


def finite_or_none(x: float):
    """JSON has no inf/nan; map them to null."""
    return x if math.isfinite(x) else None


def measure_to_dict(measure: MeasureRepresentation) -> dict:
    return {
        "atoms": [{"s": s, "weight": weight} for s, weight in measure.atoms],
        "support": list(measure.support),
        "density": [{"s": s, "w": w} for s, w in measure.density_grid],
        "shift": measure.shift,
        "coordinates": measure.coordinates,
        "perturbation": measure.perturbation,
        "points_per_interval": measure.points_per_interval,
        "radius": measure.radius,
        "nodes_count": measure.nodes_count,
        "precision": measure.precision,
        "convergence": [finite_or_none(x) for x in measure.convergence],
    }


def polynomial_to_dict(result: PolynomialResult) -> dict:
    return {
        "p": result.p,
        "coefficients": list(result.coefficients),
        "tolerance": result.tolerance,
        "nonnegative": result.nonnegative,
    }


class BaseExporter(IExporter):
    """Common behaviour: target checks, path resolution and payload dispatch."""

    default_names = {"measure": "measure", "report": "report", "polynomial": "coefficients"}

    def export(self, payload: Any, target: ExportTarget) -> list[Path]:
        self.validate_target(target)
        if isinstance(payload, MeasureRepresentation):
            return self._export_measure(payload, target)
        if isinstance(payload, VerificationReport):
            return self._export_report(payload, target)
        if isinstance(payload, PolynomialResult):
            return self._export_polynomial(payload, target)
        raise ParameterError(f"cannot export {type(payload).__name__}")

    def validate_target(self, target: ExportTarget) -> bool:
        if not target.path:
            raise ParameterError("export target needs a path")
        fmt = target.format.lower() if target.format else ""
        if fmt and fmt != self.get_format_name():
            raise ParameterError(
                f"{self.get_format_name()} exporter cannot write format {target.format!r}"
            )
        return True

    def resolve(self, target: ExportTarget, kind: str) -> Path:
        """The file to write: the target itself if it has a suffix, else a default name in it."""
        path = Path(target.path)
        if not path.suffix:
            path = path / f"{self.default_names[kind]}.{self.get_format_name()}"
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def _export_measure(self, measure: MeasureRepresentation, target: ExportTarget) -> list[Path]:
        raise NotImplementedError("Subclasses must implement _export_measure")

    def _export_report(self, report: VerificationReport, target: ExportTarget) -> list[Path]:
        raise NotImplementedError("Subclasses must implement _export_report")

    def _export_polynomial(self, result: PolynomialResult, target: ExportTarget) -> list[Path]:
        raise NotImplementedError("Subclasses must implement _export_polynomial")


def report_dict(report: VerificationReport) -> dict:
    data = report_to_dict(report)
    data.pop("config", None)
    return data
