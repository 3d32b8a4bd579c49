"""Contraction-ratio sweep over T, one Picard run per value."""
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List

from tqdm import tqdm

from ..config import RunConfig
from ..core.errors import WaveLabError
from ..core.picard import Outcome, ScalingReport
from .base_experiment import BaseExperiment, ExperimentResult
from .picard_runner import PicardExperiment
from .reporter import record_run


def sweep_point(config: RunConfig, run_dir: str, T: float) -> Dict[str, Any]:
    """One Picard run with its own manifest; module level so worker processes can import it."""
    experiment = PicardExperiment(config, Path(run_dir), T=T, oracle=False)
    try:
        _, result = record_run(experiment, "picard")
    except WaveLabError as e:
        return {"T": T, "max_ratio": math.inf, "final_ratio": None, "iterations": 0, "outcome": f"error: {e}"}
    s = result.summary
    max_ratio = s.get("max_ratio", math.inf)
    if s.get("outcome") not in (Outcome.CONVERGED.value, Outcome.MAX_ITERS.value):
        max_ratio = math.inf
    return {
        "T": T,
        "max_ratio": max_ratio,
        "final_ratio": s.get("final_ratio"),
        "iterations": s.get("iterations", 0),
        "outcome": s.get("outcome"),
    }


class SweepExperiment(BaseExperiment):
    """Max contraction ratio against T; defaults to {T, T/2, T/4}."""

    name = "sweep"

    def t_values(self) -> List[float]:
        T = self.config.time.T
        return sorted(self.config.sweep.t_values or [T, T / 2, T / 4], reverse=True)

    def run(self) -> ExperimentResult:
        values = self.t_values()
        dirs = [str(self.run_dir / f"T-{i:02d}-{T:g}") for i, T in enumerate(values)]
        workers = self.config.sweep.workers
        if workers > 1:
            self.logger.info(f"Dispatching {len(values)} Picard runs to {workers} processes")
            with ProcessPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(sweep_point, [self.config] * len(values), dirs, values))
        else:
            rows = [
                sweep_point(self.config, d, T)
                for d, T in tqdm(list(zip(dirs, values)), desc="sweep", disable=not self.progress)
            ]
        self.artifacts.extend(f"{Path(d).name}/manifest.json" for d in dirs)

        scaling = ScalingReport.from_rows(rows, self.engine.theta_min)
        frame = scaling.to_frame()
        self.save_csv(frame, "sweep.csv")
        finite = frame[frame["max_ratio"].map(lambda v: math.isfinite(float(v)) and float(v) > 0)]
        if len(finite) > 0:
            self.save_svg(
                self.line_figure(finite["T"], {"max ratio": finite["max_ratio"]}, "Contraction ratio", "T", log_y=True),
                "sweep.svg",
            )
        theta1, theta2 = self.engine.thetas
        summary = {
            "t_values": values,
            "theta1": theta1,
            "theta2": theta2,
            "theta_min": scaling.theta_min,
            "slopes": scaling.slopes,
            "slopes_within_25pct": scaling.within(0.25),
            "monotone": scaling.monotone(),
            "outcomes": [r["outcome"] for r in scaling.rows],
        }
        if not summary["slopes_within_25pct"]:
            self.warnings.append(
                f"measured slopes {[round(s, 3) for s in scaling.slopes]} differ from min(theta1, theta2) = "
                f"{scaling.theta_min:.4g} by more than 25%"
            )
        self.save_json(summary, "sweep.json")
        success = all(r["outcome"] == Outcome.CONVERGED.value for r in scaling.rows)
        return ExperimentResult(success=success, summary=summary)
