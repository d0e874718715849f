"""
Exporters package: writes measures, verification reports and polynomial coefficients
as JSON or CSV artifacts.
"""

from bmv.exporters.base import ExportTarget, IExporter
from bmv.exporters.factory import ExporterFactory

__all__ = ["ExportTarget", "IExporter", "ExporterFactory"]
