"""Laboratory experiments, one per subcommand."""
from .base_experiment import BaseExperiment, ExperimentResult
from .continuation import ContinuationExperiment
from .exponent_checker import ExponentChecker
from .norm_survey import NormSurvey
from .picard_runner import PicardExperiment
from .probe_runner import ProbeExperiment
from .reporter import RunManifest, make_run_dir, read_manifest, record_run
from .simulation import SimulationExperiment
from .sweep import SweepExperiment

__all__ = [
    "BaseExperiment",
    "ContinuationExperiment",
    "ExperimentResult",
    "ExponentChecker",
    "NormSurvey",
    "PicardExperiment",
    "ProbeExperiment",
    "RunManifest",
    "SimulationExperiment",
    "SweepExperiment",
    "make_run_dir",
    "read_manifest",
    "record_run",
]
