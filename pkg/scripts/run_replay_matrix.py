#!/usr/bin/env python3
"""Run the bundled replay experiments and print their reports.

Without arguments this runs both bundled configurations: the templated path
over all five cases, then all four generation methods on the sequential
marketing case.  Pass one or more config paths to run those instead.
"""

from __future__ import annotations

import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from dagforge.harness import MatrixConfig, render_report, run_matrix  # noqa: E402

DEFAULT_CONFIGS = (
    REPO / "configs" / "replay_templated.yaml",
    REPO / "configs" / "replay_all_methods.yaml",
)


def main(argv=None) -> int:
    paths = [Path(p) for p in (argv or sys.argv[1:])] or list(DEFAULT_CONFIGS)
    for path in paths:
        config = MatrixConfig.from_file(path)
        print(f"== {path.name} -> {config.run_dir} ==\n")
        matrix = run_matrix(config)
        print(render_report(matrix, "text"))
        errored = [cell for cell in matrix.cells if cell.status == "error"]
        if errored:
            print(f"{len(errored)} cell(s) errored:")
            for cell in errored:
                print(f"  {cell.case}/{cell.model}/{cell.method}: {cell.error}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
