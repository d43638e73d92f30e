"""
snnbench - Result Reports
CSV, JSON and aligned-text tables with best-value marking.
"""

import csv
import io
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

from .harness import ExperimentResult, RunResult

logger = logging.getLogger("snnbench")

# column -> True when larger is better
BEST_COLUMNS: Dict[str, bool] = {
    "accuracy": True,
    "conversion_loss": False,
    "wall_clock_ms": False,
    "energy_mj": False,
}

CSV_COLUMNS = [
    "network",
    "platform",
    "cell",
    "accuracy",
    "accuracy_std",
    "ann_accuracy",
    "conversion_loss",
    "wall_clock_ms",
    "energy_mj",
    "batch_size",
    "instances",
    "repetitions",
    "hil",
    "error",
]

TABLE_DIGITS = (
    ("accuracy", 2),
    ("conversion_loss", 2),
    ("wall_clock_ms", 2),
    ("energy_mj", 4),
)


def best_marks(results: Sequence[RunResult]) -> Set[Tuple[int, str]]:
    """
    (row, column) pairs holding the best value of their network block.

    Ties are all marked; failed rows never are.
    """
    marks: Set[Tuple[int, str]] = set()
    blocks: Dict[str, List[int]] = {}
    for i, r in enumerate(results):
        if r.ok:
            blocks.setdefault(r.network, []).append(i)
    for rows in blocks.values():
        for column, larger in BEST_COLUMNS.items():
            values = {i: getattr(results[i], column) for i in rows}
            values = {i: v for i, v in values.items() if v is not None}
            if not values:
                continue
            best = max(values.values()) if larger else min(values.values())
            marks.update((i, column) for i, v in values.items() if v == best)
    return marks


def _cell_label(r: RunResult) -> str:
    return ",".join(f"{k}={v}" for k, v in sorted(r.cell.items()))


def _fmt(value, digits: int) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.{digits}f}"
    return str(value)


def _csv_value(value):
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else value


def to_csv(results: Sequence[RunResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in results:
        row = r.to_dict()
        row["cell"] = _cell_label(r)
        writer.writerow([_csv_value(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def to_json(results: Sequence[RunResult]) -> str:
    return json.dumps([r.to_dict() for r in results], indent=2, sort_keys=True) + "\n"


def format_table(results: Sequence[RunResult]) -> str:
    """
    Aligned text table; best values per network carry a ``*``.

    Example:
        network  platform  cell  accuracy  loss   wall clock [ms]  energy [mJ]  batch
        spikey   ideal           88.10*    1.02*  5070.00*         10.1400*     10000
    """
    marks = best_marks(results)
    header = [
        "network",
        "platform",
        "cell",
        "accuracy",
        "loss",
        "wall clock [ms]",
        "energy [mJ]",
        "batch",
    ]
    rows = [header]
    for i, r in enumerate(results):
        if not r.ok:
            error = f"error: {r.error}"
            rows.append([r.network, r.platform, _cell_label(r), error, "", "", "", ""])
            continue
        cells = [r.network, r.platform, _cell_label(r)]
        for column, digits in TABLE_DIGITS:
            text = _fmt(getattr(r, column), digits)
            cells.append(text + ("*" if (i, column) in marks else ""))
        cells.append(_fmt(r.batch_size, 0))
        rows.append(cells)
    widths = [max(len(row[c]) for row in rows) for c in range(len(header))]
    lines = [
        "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
        for row in rows
    ]
    return "\n".join(lines) + "\n"


def report(
    experiment: Union[ExperimentResult, Sequence[RunResult]],
    out_dir: Optional[Union[str, Path]] = None,
) -> Dict[str, str]:
    """
    Render all artefacts; with ``out_dir`` also write them.

    Files: spec.json (only for a full experiment), results.csv,
    results.json and table.txt. Nothing time dependent is written, so a
    repeated experiment produces identical files.
    """
    if isinstance(experiment, ExperimentResult):
        results = experiment.results
        artefacts = {"spec.json": experiment.spec.to_json() + "\n"}
    else:
        results = list(experiment)
        artefacts = {}
    if not results:
        raise ValueError("nothing to report")
    artefacts["results.csv"] = to_csv(results)
    artefacts["results.json"] = to_json(results)
    artefacts["table.txt"] = format_table(results)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in artefacts.items():
            (out / name).write_text(text)
        logger.info(f"Wrote {', '.join(sorted(artefacts))} to {out}")
    return artefacts


def load_results(path: Union[str, Path]) -> List[RunResult]:
    """Read a results.json back."""
    return [RunResult(**row) for row in json.loads(Path(path).read_text())]
