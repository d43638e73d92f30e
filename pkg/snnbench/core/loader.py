"""
snnbench - Ledger Loader
Routes result artefacts written by the CLI into the ledger tables.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

from .database import get_session
from .models import Experiment, HilEpochRow, NasEvaluation, RunResultRow

logger = logging.getLogger("snnbench")

RUN_RESULT_FIELDS = (
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
)


def load(json_files: Union[str, Path, List[Union[str, Path]]]) -> int:
    """
    Load result files into the ledger.

    Accepts ``results.json`` (a sibling ``spec.json`` names the experiment),
    NAS traces (``.jsonl``) and HIL traces (JSON with ``"kind": "hil_trace"``).

    Returns:
        Number of rows added

    Examples:
        >>> import snnbench
        >>> snnbench.load(["out/results.json", "out/nas_trace.jsonl"])
    """
    if isinstance(json_files, (str, Path)):
        json_files = [json_files]

    session = get_session()
    added = 0
    try:
        for json_file in json_files:
            logger.info(f"Loading: {json_file}")
            added += _load_file(session, Path(json_file))
            logger.info(f"✓ Completed: {json_file}")
        session.commit()
        logger.info(f"✓ Loaded {len(json_files)} file(s), {added} rows")
    except Exception as e:
        session.rollback()
        logger.error(f"✗ Error loading results: {e}")
        raise
    finally:
        session.close()
    return added


def _load_file(session, path: Path) -> int:
    if path.suffix == ".jsonl":
        return _load_nas_trace(session, path)

    with open(path, encoding="utf-8") as f:
        data = json.load(f)

    if isinstance(data, list):
        return _load_results(session, path, data)
    if isinstance(data, dict) and data.get("kind") == "hil_trace":
        return _load_hil_trace(session, path, data)
    logger.warning(f"⚠ Unrecognised result file: {path}")
    return 0


def _load_results(session, path: Path, rows: List[Dict[str, Any]]) -> int:
    spec_file = path.with_name("spec.json")
    spec = json.loads(spec_file.read_text()) if spec_file.exists() else {}
    experiment = Experiment(
        name=spec.get("name", path.parent.name),
        network=spec.get("network"),
        platform=spec.get("platform"),
        seed=spec.get("seed"),
        spec=spec or None,
        source_file=str(path),
    )
    session.add(experiment)
    session.flush()
    for row in rows:
        values = {k: row.get(k) for k in RUN_RESULT_FIELDS}
        experiment.results.append(RunResultRow(**values))
    logger.info(f"  ✓ Experiment {experiment.name}: {len(rows)} cells")
    return 1 + len(rows)


def _load_nas_trace(session, path: Path) -> int:
    count = 0
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            r = json.loads(line)
            session.add(
                NasEvaluation(
                    search=path.stem,
                    generation=r["generation"],
                    slot=r.get("slot"),
                    genome_hash=r.get("hash"),
                    dims=r.get("dims"),
                    edges=r.get("edges"),
                    sequential=r.get("sequential"),
                    accuracy=r.get("accuracy"),
                    neurons=r.get("neurons"),
                    elite=r.get("elite"),
                )
            )
            count += 1
    logger.info(f"  ✓ NAS trace {path.stem}: {count} evaluations")
    return count


def _load_hil_trace(session, path: Path, data: Dict[str, Any]) -> int:
    hil = data.get("provenance", {}).get("hil", {})
    for r in data.get("trace", []):
        session.add(
            HilEpochRow(
                run=path.stem,
                profile=hil.get("profile"),
                device_seed=hil.get("device_seed"),
                epoch=r["epoch"],
                device_accuracy=r["device_accuracy"],
                loss=r.get("loss"),
            )
        )
    logger.info(f"  ✓ HIL trace {path.stem}: {len(data.get('trace', []))} epochs")
    return len(data.get("trace", []))
