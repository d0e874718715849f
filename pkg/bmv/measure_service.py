"""Service for loading inputs, running the computations and exporting artifacts."""

import logging
from contextlib import nullcontext
from pathlib import Path
from typing import Optional

from rich.console import Console

from bmv.config_manager import ConfigurationManager, RunConfig
from bmv.errors import ParameterError
from bmv.exporters import ExporterFactory, ExportTarget, IExporter
from bmv.laplace_verify import (
    PolynomialResult,
    VerificationReport,
    bmv_poly_coeffs,
    coefficients_nonnegative,
    verify,
)
from bmv.matrix_core import HermitianPair, load_matrix, random_pair, random_psd_pair, reduce_pair
from bmv.measure import MeasureRepresentation, assemble_measure, atoms_only
from bmv.spectral_curve import dump_contour_csv

logger = logging.getLogger(__name__)


class MeasureService:
    """Runs atoms / density / verify / poly for the command line."""

    def __init__(
        self,
        config_manager: Optional[ConfigurationManager] = None,
        console: Optional[Console] = None,
    ):
        self.config_manager = config_manager or ConfigurationManager()
        self.console = console or Console(stderr=True)
        self._exporter_cache: dict[str, IExporter] = {}

    def load_pair(
        self,
        matrix_a: Optional[str] = None,
        matrix_b: Optional[str] = None,
        random_n: Optional[int] = None,
        seed: int = 0,
        psd: bool = False,
        tol: float = 1e-12,
    ) -> HermitianPair:
        """Pair from two matrix files, or a seeded random instance."""
        if random_n is not None:
            if matrix_a or matrix_b:
                raise ParameterError("use either --random or --matrix-a/--matrix-b, not both")
            pair = random_psd_pair(random_n, seed) if psd else random_pair(random_n, seed)
            logger.info("random %dx%d instance, seed %d", random_n, random_n, seed)
            return pair
        if not (matrix_a and matrix_b):
            raise ParameterError("both --matrix-a and --matrix-b are required")
        return HermitianPair.from_arrays(load_matrix(matrix_a), load_matrix(matrix_b), tol)

    def _status(self, message: str, show_spinner: bool):
        return self.console.status(message) if show_spinner else nullcontext()

    def atoms(self, pair: HermitianPair, config: RunConfig) -> MeasureRepresentation:
        measure = atoms_only(reduce_pair(pair, config.eps_split))
        return self._coordinates(measure, config)

    def density(
        self, pair: HermitianPair, config: RunConfig, show_spinner: bool = True
    ) -> MeasureRepresentation:
        reduced = reduce_pair(pair, config.eps_split)
        with self._status("Tracking branches and sampling the density...", show_spinner):
            measure = assemble_measure(reduced, config)
        logger.info(
            "density on %d nodes at radius %.6g (%s)",
            measure.nodes_count,
            measure.radius,
            measure.precision,
        )
        return self._coordinates(measure, config)

    def verify(
        self, pair: HermitianPair, config: RunConfig, show_spinner: bool = True
    ) -> VerificationReport:
        with self._status("Verifying the Laplace representation...", show_spinner):
            return verify(pair, config)

    def poly(self, pair: HermitianPair, p: int, config: RunConfig) -> PolynomialResult:
        coeffs = bmv_poly_coeffs(pair, p)
        return PolynomialResult(
            p=p,
            coefficients=coeffs,
            tolerance=config.tau_poly,
            nonnegative=coefficients_nonnegative(coeffs, config.tau_poly),
            config=config.to_dict(),
        )

    def _coordinates(self, measure: MeasureRepresentation, config: RunConfig):
        if config.coordinates == "original":
            return measure.in_original_coordinates()
        return measure

    def _get_exporter(self, target: ExportTarget) -> IExporter:
        key = (target.format or "").lower()
        if key and key in self._exporter_cache:
            return self._exporter_cache[key]
        exporter = ExporterFactory.create(target)
        self._exporter_cache[exporter.get_format_name()] = exporter
        return exporter

    def export(self, payload, fmt: Optional[str], path: str, config: RunConfig) -> list[Path]:
        target = ExportTarget(format=fmt or "", path=path, config=config.to_dict())
        try:
            written = self._get_exporter(target).export(payload, target)
        except OSError as exc:
            raise ParameterError(f"cannot write {path}: {exc.strerror}") from exc
        for file in written:
            logger.info("wrote %s", file)
        return written


    def dump_contour(self, measure: MeasureRepresentation, path: str) -> Optional[Path]:
        """Branch values of the measure's contour as CSV; None for atom-only measures."""
        if measure.contour is None:
            logger.info("no contour to dump: the measure has no density part")
            return None
        try:
            written = dump_contour_csv(measure.contour, path)
        except OSError as exc:
            raise ParameterError(f"cannot write {path}: {exc.strerror}") from exc
        logger.info("wrote %s", written)
        return written
