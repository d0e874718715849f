"""Base interfaces for artifact exporters."""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any


@dataclass
class ExportTarget:
    """Where and how to write one artifact.

    ``path`` is a file or a directory; exporters that write several files use it as a
    directory. ``config`` is the effective run configuration embedded in the output.
    """

    format: str
    path: str
    config: dict = field(default_factory=dict)


class IExporter(ABC):
    """Interface for artifact exporters."""

    @abstractmethod
    def export(self, payload: Any, target: ExportTarget) -> list[Path]:
        """Write the payload and return the files created."""
        pass

    @abstractmethod
    def get_format_name(self) -> str:
        pass

    @abstractmethod
    def validate_target(self, target: ExportTarget) -> bool:
        pass
