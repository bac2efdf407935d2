"""Figure rendering for vorticity stability lab outputs.

Consumes only the documented on-disk artifacts (report JSON schema version 1,
conservation CSV logs, VSF1 field snapshots); never imports the simulation
code.
"""

__version__ = "0.1.0"

from .reports import load_report, read_field_vsf  # noqa: F401
from .figures import plot_field, plot_sweep, plot_timeseries  # noqa: F401
