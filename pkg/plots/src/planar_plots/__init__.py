"""Figure regeneration for binplanar sweep outputs.

Pure CSV-to-image transforms over the harness tables: measurement error
vs mean photon number, 1D chain infidelity vs loss, the threshold scatter,
and the sub-threshold scaling exponent.  See ``cli`` for the ``plot``
entry point.
"""

from .io import FAMILY_TABLES, ResultTable, load_schema, read_table
from .figures import (plot_alpha, plot_chain1d, plot_measurement_error,
                      plot_threshold_scatter)

__version__ = "0.1.0"

__all__ = [
    "FAMILY_TABLES",
    "ResultTable",
    "load_schema",
    "read_table",
    "plot_alpha",
    "plot_chain1d",
    "plot_measurement_error",
    "plot_threshold_scatter",
]
