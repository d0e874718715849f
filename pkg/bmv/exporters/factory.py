"""Factory for creating exporter instances."""

from pathlib import Path
from typing import Dict, Type

from bmv.errors import ParameterError
from bmv.exporters.base import ExportTarget, IExporter
from bmv.exporters.csv_exporter import CsvExporter
from bmv.exporters.json_exporter import JsonExporter


class ExporterFactory:
    """Creates exporters by format name, falling back to the target's file suffix."""

    _exporters: Dict[str, Type[IExporter]] = {
        "json": JsonExporter,
        "csv": CsvExporter,
    }

    _suffixes = {
        ".json": "json",
        ".csv": "csv",
    }

    @classmethod
    def create(cls, target: ExportTarget) -> IExporter:
        fmt = (target.format or "").lower()
        if fmt in cls._exporters:
            return cls._exporters[fmt]()

        inferred = cls._infer_format_from_path(target.path)
        if inferred and not fmt:
            target.format = inferred
            return cls._exporters[inferred]()

        raise ParameterError(
            f"Unsupported export format: {target.format or target.path}. "
            f"Available: {', '.join(cls.get_supported_formats())}"
        )

    @classmethod
    def _infer_format_from_path(cls, path: str) -> str | None:
        return cls._suffixes.get(Path(path).suffix.lower())

    @classmethod
    def get_supported_formats(cls) -> list[str]:
        return sorted(cls._exporters)
