"""Bounded-ratio probe runs."""
from typing import Any, Dict

from ..core.probes import (
    DILATION_DRIFT_LIMIT,
    ProbeContext,
    dilation_drift,
    nonlinear_time_scaling,
    probe_inequality,
)
from .base_experiment import BaseExperiment, ExperimentResult


class ProbeExperiment(BaseExperiment):
    """Runs every probe named in ``probes.name`` with the configured family, count and seed."""

    name = "probe"

    def context(self) -> ProbeContext:
        c = self.config
        return ProbeContext(
            self.sgrid,
            self.params,
            T=c.time.T,
            snapshots=c.time.snapshots,
            rule=c.time.quadrature,
            pair_set=list(c.pairs()) if c.pairs() is not None else None,
            space_scale=c.picard.space_scale,
            gamma=c.eq.gamma,
            epsilon=c.eq.epsilon,
        )

    def run(self) -> ExperimentResult:
        c = self.config.probes
        ctx = self.context()
        results: Dict[str, Any] = {}
        success = True
        for name in c.name:
            report = probe_inequality(name, c.family, c.samples, c.seed, ctx, workers=c.workers, progress=self.progress)
            self.save_csv(report.to_frame(), f"probe_{name}.csv")
            entry = report.summary()
            if name == "besov_embedding":
                drift = dilation_drift(ctx)
                entry["dilation_ratios"] = {str(k): v for k, v in drift["ratios"].items()}
                entry["dilation_drift"] = drift["drift"]
                entry["dilation_passed"] = drift["drift"] <= DILATION_DRIFT_LIMIT
                success = success and entry["dilation_passed"]
            if name == "nonlinear":
                phi, _ = self.initial_data()
                entry["time_scaling"] = nonlinear_time_scaling(phi, ctx)
            if not report.passed:
                self.warnings.append(f"probe {name} failed: slope {report.slope:.4f}, violations {report.violations}")
            success = success and report.passed
            results[name] = entry
        self.save_json(results, "probes.json")
        return ExperimentResult(success=success, summary=results)
