"""JSON exporter: one file per payload with the run configuration under "config"."""

import json
from pathlib import Path

from bmv.exporters.base import ExportTarget
from bmv.exporters.base_exporter import (
    BaseExporter,
    finite_or_none,
    measure_to_dict,
    polynomial_to_dict,
    report_dict,
)


def _clean(value):
    if isinstance(value, float):
        return finite_or_none(value)
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


class JsonExporter(BaseExporter):
    def get_format_name(self) -> str:
        return "json"

    def _write(self, data: dict, target: ExportTarget, kind: str) -> list[Path]:
        path = self.resolve(target, kind)
        document = _clean({**data, "config": target.config})
        with open(path, "w") as f:
            json.dump(document, f, indent=2, sort_keys=True)
            f.write("\n")
        return [path]

    def _export_measure(self, measure, target):
        return self._write(measure_to_dict(measure), target, "measure")

    def _export_report(self, report, target):
        return self._write(report_dict(report), target, "report")

    def _export_polynomial(self, result, target):
        return self._write(polynomial_to_dict(result), target, "polynomial")
