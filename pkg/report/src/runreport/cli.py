"""make-report: render the figures and text summary for one run directory.

    make-report --run RUN_DIR --out OUT_DIR

Reads RUN_DIR/series.csv and RUN_DIR/summary.json (the simulator's documented
artifacts) and writes decay.svg, conservation.svg, entropy.svg and
summary.txt into OUT_DIR.  Exit codes: 0 ok, 2 schema/usage error, 4 I/O
failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from .figures import (
    render_conservation,
    render_decay,
    render_entropy,
    write_text_summary,
)
from .frames import SchemaError, load_run_dir


def make_report(run_dir: str, out_dir: str, echo=print) -> dict:
    series, summary = load_run_dir(run_dir)
    os.makedirs(out_dir, exist_ok=True)
    decay = render_decay(series, summary, os.path.join(out_dir, "decay.svg"))
    cons = render_conservation(series, os.path.join(out_dir, "conservation.svg"))
    ent = render_entropy(series, os.path.join(out_dir, "entropy.svg"))
    write_text_summary(series, summary, os.path.join(out_dir, "summary.txt"))
    if decay["placeholder"]:
        echo(f"report written to {out_dir} (no decay to plot)")
    else:
        echo(f"report written to {out_dir} ({decay['annotation']})")
    return {"decay": decay, "conservation": cons, "entropy": ent}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="make-report",
                                     description="render run-directory figures")
    parser.add_argument("--run", required=True, help="run directory with series.csv + summary.json")
    parser.add_argument("--out", required=True, help="output directory for figures")
    args = parser.parse_args(argv)
    try:
        make_report(args.run, args.out)
    except SchemaError as err:
        print(f"schema error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
