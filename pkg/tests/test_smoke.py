"""
Simple smoke tests: the package imports and its defaults are consistent.
"""

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))


def test_imports():
    """Test that all modules can be imported."""
    import bmv
    from bmv.cli import main
    from bmv.config_manager import ConfigurationManager
    from bmv.exporters import ExporterFactory
    from bmv.measure_service import MeasureService

    assert bmv.__version__
    assert main is not None
    assert ConfigurationManager is not None
    assert ExporterFactory is not None
    assert MeasureService is not None


def test_default_table_matches_run_config():
    """config/default_config.json is the documented defaults table."""
    from bmv.config_manager import RunConfig, default_config_path

    with open(default_config_path()) as f:
        table = json.load(f)
    assert table == RunConfig().to_dict()


def test_trace_exp_basic():
    """A tiny end-to-end computation works."""
    import numpy as np

    from bmv.laplace_verify import trace_exp
    from bmv.matrix_core import HermitianPair

    pair = HermitianPair.from_arrays(np.zeros((2, 2)), np.diag([1.0, 2.0]))
    assert abs(trace_exp(pair, 1.0) - (np.exp(-1.0) + np.exp(-2.0))) < 1e-14


if __name__ == "__main__":
    print("Running smoke tests...")
    test_imports()
    print("✓ Imports work")

    test_default_table_matches_run_config()
    print("✓ Defaults table matches")

    test_trace_exp_basic()
    print("✓ trace_exp works")

    print("\nAll smoke tests passed! ✓")
