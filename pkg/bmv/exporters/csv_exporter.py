"""CSV exporter. Every file opens with '#' comment lines holding the run configuration,
followed by a header row; numbers carry 17 significant digits."""

import csv
import json
from pathlib import Path

from bmv.exporters.base import ExportTarget
from bmv.exporters.base_exporter import BaseExporter
from bmv.utils import format_float


class CsvExporter(BaseExporter):
    def get_format_name(self) -> str:
        return "csv"

    def _directory(self, target: ExportTarget) -> Path:
        path = Path(target.path)
        directory = path.parent if path.suffix else path
        directory.mkdir(parents=True, exist_ok=True)
        return directory

    def _write(self, path: Path, header: list, rows: list, target: ExportTarget, meta=None) -> Path:
        with open(path, "w", newline="") as f:
            f.write(f"# config: {json.dumps(target.config, sort_keys=True)}\n")
            for key, value in (meta or {}).items():
                f.write(f"# {key}: {value}\n")
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_float(x) if isinstance(x, float) else x for x in row])
        return path

    def _export_measure(self, measure, target):
        directory = self._directory(target)
        meta = {
            "shift": format_float(measure.shift),
            "coordinates": measure.coordinates,
            "precision": measure.precision,
        }
        atoms = self._write(
            directory / "atoms.csv", ["s", "weight"], measure.atoms, target, meta
        )
        density = self._write(
            directory / "density.csv", ["s", "w"], measure.density_grid, target, meta
        )
        return [atoms, density]

    def _export_report(self, report, target):
        rows = zip(report.t_grid, report.f_direct, report.f_from_measure)
        meta = {
            "all_passed": report.all_passed,
            "max_rel_error": format_float(report.max_rel_error),
            "lemma1_max": format_float(report.lemma1_max),
            "min_density": format_float(report.min_density),
        }
        path = self.resolve(target, "report")
        return [self._write(path, ["t", "f_direct", "f_from_measure"], list(rows), target, meta)]

    def _export_polynomial(self, result, target):
        rows = [(k, float(c)) for k, c in enumerate(result.coefficients)]
        meta = {"p": result.p, "nonnegative": result.nonnegative}
        path = self.resolve(target, "polynomial")
        return [self._write(path, ["k", "coefficient"], rows, target, meta)]
