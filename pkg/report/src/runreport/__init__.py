"""Post-hoc report rendering for simulator run directories: the decay figure
with its fitted-rate annotation, the conservation-drift figure, the entropy
balance figure, and a one-page text summary.  Read-only over series.csv and
summary.json; rates are copied from the summary, never refit."""

from .frames import SchemaError, SeriesFrame, load_run_dir, load_summary
from .figures import (
    render_conservation,
    render_decay,
    render_entropy,
    write_text_summary,
)
from .cli import make_report

__version__ = "0.1.0"
