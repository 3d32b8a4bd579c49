"""Continuation to a long horizon and the small-data threshold search."""
import pandas as pd

from ..core.errors import ConfigError
from ..core.picard import SmallDataReport
from .base_experiment import BaseExperiment, ExperimentResult


class ContinuationExperiment(BaseExperiment):
    """Chain local Picard solutions up to ``time.horizon``.

    With ``continuation.bisect_delta`` the data amplitude is bisected for the
    largest delta that still reaches the horizon within twice the linear
    energy norm, and 10 delta* is rerun.
    """

    name = "continue"

    def run(self) -> ExperimentResult:
        c = self.config
        cfg = self.picard_config()
        horizon = c.time.horizon
        phi, psi = self.initial_data()
        report = self.engine.continue_solution(
            phi, psi, horizon, cfg, max_retries=c.continuation.max_retries, keep_trajectory=False
        )
        frame = report.to_frame()
        self.save_csv(frame, "intervals.csv")
        if len(frame) > 0:
            self.save_svg(
                self.line_figure(frame["t_start"], {"length": frame["length"]}, "Interval lengths", "t"),
                "intervals.svg",
            )
        summary = {
            "horizon": horizon,
            "reached": report.reached,
            "reached_horizon": report.reached_horizon,
            "intervals": len(report.intervals),
            "energy_norm_max": report.energy_norm_max,
            "max_interval_drift": float(frame["relative_drift"].max()) if len(frame) else 0.0,
            "failure": report.failure,
        }
        success = report.reached_horizon
        if c.continuation.bisect_delta:
            threshold = self._threshold(horizon)
            summary["delta_star"] = threshold.delta_star
            summary["follow_up"] = threshold.follow_up
            success = success and threshold.delta_star is not None
        self.save_json(summary, "continuation.json")
        return ExperimentResult(success=success, summary=summary)

    def _threshold(self, horizon: float) -> SmallDataReport:
        c = self.config
        if c.data.amplitude == 0 and c.data.psi_amplitude == 0:
            raise ConfigError(["continuation.bisect_delta needs nonzero data.amplitude or data.psi_amplitude"])
        base = c.data.amplitude or c.data.psi_amplitude
        report = self.engine.small_data_threshold(
            lambda delta: self.initial_data(delta / base),
            horizon,
            self.picard_config(),
            delta_low=c.continuation.delta_low,
            delta_high=c.continuation.delta_high,
            steps=c.continuation.delta_steps,
            max_retries=c.continuation.max_retries,
        )
        trials = pd.DataFrame(report.trials)
        self.save_csv(trials, "small_data.csv")
        return report
