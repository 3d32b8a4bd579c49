"""Local Picard solve with oracle cross-check."""
from typing import Optional

from ..core.errors import DivergenceError
from ..core.picard import SOURCE_HS_TARGET, Outcome
from .base_experiment import BaseExperiment, ExperimentResult


class PicardExperiment(BaseExperiment):
    """solve_local on [0, T], then the distance to the reference integrator."""

    name = "picard"

    def __init__(self, *args, T: Optional[float] = None, oracle: bool = True, **kwargs):
        super().__init__(*args, **kwargs)
        self.T = T
        self.oracle = oracle

    def run(self) -> ExperimentResult:
        cfg = self.picard_config(self.T)
        phi, psi = self.initial_data()
        self.logger.info(f"Picard iteration on [0, {cfg.T:g}] ({'Ḣ^s' if self.hs_mode else 'L²'} mode)")
        try:
            traj, report = self.engine.solve_local(phi, psi, cfg)
        except DivergenceError as e:
            self.logger.error(f"Error in Picard iteration: {str(e)}")
            summary = {"T": cfg.T, "outcome": "divergence", "error": str(e)}
            self.save_json(summary, "picard.json")
            return ExperimentResult(success=False, summary=summary)

        frame = report.to_frame()
        self.save_csv(frame, "picard.csv")
        if len(frame) > 0:
            self.save_svg(
                self.line_figure(frame["k"], {"d_k": frame["d_k"]}, "Picard differences", "k", log_y=True),
                "contraction.svg",
            )
        summary = report.summary()
        summary["theta1"], summary["theta2"] = self.engine.thetas
        summary["pair_set"] = [p.label() for p in self.engine.pair_set(cfg)]
        if self.hs_mode:
            summary["source_contraction_target"] = str(SOURCE_HS_TARGET)
        success = report.outcome is Outcome.CONVERGED
        if self.oracle and success:
            gap = self.engine.reference_gap(traj, phi, psi, self.config.time.dt)
            summary["reference_gap"] = gap
            self.logger.info(f"Discrete L^inf_t L^2_x gap to the reference integrator: {gap:.3e}")
            tol = self.config.picard.oracle_tol
            if gap > tol:
                self.warnings.append(f"reference gap {gap:.3e} exceeds picard.oracle_tol = {tol:g}")
                success = False
        self.save_json(summary, "picard.json")
        return ExperimentResult(
            success=success,
            summary=summary,
            derived={"a": report.a, "pair_set": summary["pair_set"]},
        )
