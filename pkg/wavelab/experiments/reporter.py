"""Run directories, the run manifest and the markdown summary."""
import logging
import math
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from .. import __version__
from .base_experiment import BaseExperiment, ExperimentResult

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
REPORT_NAME = "report.md"


class RunManifest(BaseModel):
    """Everything needed to reproduce and judge a run."""

    subcommand: str
    version: str
    started: str
    finished: Optional[str] = None
    seed: Optional[int] = None
    config: Dict[str, Any] = Field(default_factory=dict)
    derived: Dict[str, Any] = Field(default_factory=dict)
    success: bool = False
    summary: Dict[str, Any] = Field(default_factory=dict)
    partial: bool = True
    error: Optional[str] = None
    artifacts: List[str] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)


def to_jsonable(value: Any) -> Any:
    """numpy scalars to Python, Fractions to 'p/q', non-finite floats to their names."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


def utc_stamp(moment: Optional[datetime] = None) -> str:
    moment = moment or datetime.now(timezone.utc)
    return moment.strftime("%Y%m%dT%H%M%S%fZ")


def make_run_dir(root: Path, subcommand: str) -> Path:
    """Fresh ``<root>/<subcommand>-<UTC timestamp>`` directory; a suffix breaks collisions."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    base = f"{subcommand}-{utc_stamp()}"
    candidate = root / base
    n = 1
    while True:
        try:
            candidate.mkdir()
            return candidate
        except FileExistsError:
            candidate = root / f"{base}-{n}"
            n += 1


def write_manifest(run_dir: Path, manifest: RunManifest) -> Path:
    path = Path(run_dir) / MANIFEST_NAME
    try:
        path.write_text(manifest.model_dump_json(indent=2), encoding="utf-8")
        logger.info(f"Saved manifest to {path}")
    except Exception as e:
        logger.error(f"Error saving manifest: {str(e)}")
        raise
    return path


def read_manifest(run_dir: Path) -> RunManifest:
    return RunManifest.model_validate_json((Path(run_dir) / MANIFEST_NAME).read_text(encoding="utf-8"))


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, dict):
        return ", ".join(f"{k}={_format_value(v)}" for k, v in value.items())
    if isinstance(value, (list, tuple)):
        return ", ".join(_format_value(v) for v in value)
    return str(value)


def _bullets(data: Dict[str, Any]) -> str:
    if not data:
        return "_none_"
    return "\n".join(f"- **{key}**: {_format_value(value)}" for key, value in data.items())


def render_report(manifest: RunManifest) -> str:
    """Data-only markdown summary of a manifest."""
    status = "success" if manifest.success else "failure"
    eq = manifest.config.get("eq", {})
    artifacts = "\n".join(f"- `{name}`" for name in manifest.artifacts) or "_none_"
    warnings = "\n".join(f"- {w}" for w in manifest.warnings) or "_none_"
    error = f"\n**Error:** {manifest.error}\n" if manifest.error else ""
    return f"""# Wave Laboratory Run: {manifest.subcommand}

**Outcome:** {status}{" (partial outputs)" if manifest.partial else ""}
{error}
**Equation:** alpha = {eq.get("alpha")}, b = {eq.get("b")}, s = {eq.get("s")}, regime {eq.get("theorem")}

## Summary

{_bullets(manifest.summary)}

## Derived Quantities

{_bullets(manifest.derived)}

## Artifacts

{artifacts}

## Warnings

{warnings}

Run started {manifest.started}, finished {manifest.finished}, wavelab {manifest.version}
"""


def write_report(run_dir: Path, manifest: RunManifest) -> Path:
    path = Path(run_dir) / REPORT_NAME
    try:
        path.write_text(render_report(manifest), encoding="utf-8")
    except Exception as e:
        logger.error(f"Error generating report: {str(e)}")
        raise
    return path


def record_run(experiment: BaseExperiment, subcommand: str) -> Tuple[RunManifest, ExperimentResult]:
    """Run one experiment in its directory and leave exactly one manifest behind.

    A failure inside the experiment still writes the manifest, flagged partial,
    before the exception propagates.
    """
    manifest = RunManifest(
        subcommand=subcommand,
        version=__version__,
        started=datetime.now(timezone.utc).isoformat(),
        seed=experiment.config.probes.seed,
        config=experiment.config.echo(),
    )
    try:
        manifest.derived = to_jsonable(experiment.derived_quantities())
        result = experiment.run()
    except Exception as e:
        manifest.error = f"{type(e).__name__}: {e}"
        raise
    else:
        manifest.success = result.success
        manifest.summary = to_jsonable(result.summary)
        manifest.derived.update(to_jsonable(result.derived))
        manifest.partial = False
        return manifest, result
    finally:
        manifest.finished = datetime.now(timezone.utc).isoformat()
        manifest.artifacts = list(experiment.artifacts)
        manifest.warnings = list(experiment.warnings)
        write_manifest(experiment.run_dir, manifest)
        write_report(experiment.run_dir, manifest)
