"""Base experiment for the wave laboratory."""
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd
import plotly.graph_objects as go

from ..config import RunConfig
from ..core.dynamics import WeightField
from ..core.errors import DomainError
from ..core.exponents import Params, Theorem, classify_pair, default_gamma, default_pair_set, theta1, theta2
from ..core.grid import Field, SpectralGrid
from ..core.picard import PicardConfig, PicardEngine
from ..core.profiles import initial_data
from ..core.propagator import PropagatorPlan

logger = logging.getLogger(__name__)


@dataclass
class ExperimentResult:
    """What an experiment hands back to the workflow for the manifest."""

    success: bool
    summary: Dict[str, Any] = field(default_factory=dict)
    derived: Dict[str, Any] = field(default_factory=dict)


class BaseExperiment:
    """Base class for laboratory experiments.

    Owns the run directory and the lab objects built from the config.
    """

    name = "experiment"

    def __init__(self, config: RunConfig, run_dir: Path, progress: bool = False):
        self.config = config
        self.logger = logging.getLogger(self.__class__.__name__)
        self.run_dir = Path(run_dir)
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self.progress = progress
        self.artifacts: List[str] = []
        self.warnings: List[str] = []

    # lab objects

    @cached_property
    def params(self) -> Params:
        return self.config.params()

    @cached_property
    def sgrid(self) -> SpectralGrid:
        return SpectralGrid(self.config.grid_spec(), dealias=self.config.grid.dealias)

    @cached_property
    def plan(self) -> PropagatorPlan:
        return PropagatorPlan(self.sgrid)

    @cached_property
    def weight(self) -> WeightField:
        return WeightField.build(self.sgrid, float(self.params.b), self.config.eq.epsilon)

    @property
    def alpha(self) -> float:
        return float(self.params.alpha)

    def initial_data(self, scale: float = 1.0) -> Tuple[Field, Field]:
        d = self.config.data
        return initial_data(
            self.sgrid, d.profile, scale * d.amplitude, d.width, scale * d.psi_amplitude, d.psi_profile
        )

    def picard_config(self, T: Optional[float] = None) -> PicardConfig:
        c = self.config
        return PicardConfig(
            T=c.time.T if T is None else T,
            max_iters=c.picard.max_iters,
            tol=c.picard.tol,
            a_policy=c.picard.a_policy,
            snapshots=c.time.snapshots,
            quadrature=c.time.quadrature,
            contraction_target=c.picard.contraction_target,
            pair_set=c.pairs(),
            space_scale=c.picard.space_scale,
        )

    @cached_property
    def engine(self) -> PicardEngine:
        return PicardEngine(
            self.sgrid,
            self.params,
            self.weight,
            theorem=self.config.eq.theorem,
            gamma=self.config.eq.gamma,
            progress=self.progress,
        )

    @property
    def hs_mode(self) -> bool:
        return self.config.eq.theorem is Theorem.T1_3

    def derived_quantities(self) -> Dict[str, Any]:
        """θ₁, θ₂ and the classified pair set, where the parameters admit them."""
        derived: Dict[str, Any] = {}
        p = self.params
        try:
            derived["theta1"] = str(theta1(p.alpha, p.b))
        except DomainError as e:
            derived["theta1_error"] = str(e)
        try:
            gamma = self.config.eq.gamma if self.config.eq.gamma is not None else default_gamma(p.b)
            derived["gamma_lebesgue"] = str(gamma)
            derived["theta2"] = str(theta2(p.alpha, gamma, p.b))
            pairs = self.config.pairs() or tuple(default_pair_set(p, gamma))
            derived["pair_set"] = {pair.label(): classify_pair(pair).status.value for pair in pairs}
        except DomainError as e:
            derived["theta2_error"] = str(e)
        return derived

    # persistence

    def _wants(self, fmt: str) -> bool:
        return fmt in self.config.output.formats

    def save_json(self, data: Dict[str, Any], filename: str) -> None:
        """Save data to a JSON file in the run directory."""
        if not self._wants("json"):
            return
        try:
            output_path = self.run_dir / filename
            with open(output_path, "w") as f:
                json.dump(data, f, indent=2, default=str)
            self.artifacts.append(filename)
            self.logger.info(f"Saved data to {output_path}")
        except Exception as e:
            self.logger.error(f"Error saving data: {str(e)}")
            raise

    def save_csv(self, frame: pd.DataFrame, filename: str) -> None:
        """Header row, '.' decimals, '\\n' line endings."""
        if not self._wants("csv"):
            return
        try:
            output_path = self.run_dir / filename
            frame.to_csv(output_path, index=False, lineterminator="\n", float_format="%.17g")
            self.artifacts.append(filename)
            self.logger.info(f"Saved table to {output_path}")
        except Exception as e:
            self.logger.error(f"Error saving table: {str(e)}")
            raise

    def save_svg(self, figure: go.Figure, filename: str) -> None:
        """Static export; failures are recorded, never fatal."""
        if not self._wants("svg"):
            return
        try:
            figure.write_image(str(self.run_dir / filename), format="svg")
            self.artifacts.append(filename)
        except Exception as e:
            message = f"SVG export of {filename} failed: {e}"
            self.logger.warning(message)
            self.warnings.append(message)

    def line_figure(self, x, ys: Dict[str, Any], title: str, x_title: str, log_y: bool = False) -> go.Figure:
        fig = go.Figure()
        for label, y in ys.items():
            fig.add_trace(go.Scatter(x=list(x), y=list(y), mode="lines+markers", name=label))
        fig.update_layout(title=title, xaxis_title=x_title, template="simple_white")
        if log_y:
            fig.update_yaxes(type="log")
        return fig

    def run(self) -> ExperimentResult:
        raise NotImplementedError
