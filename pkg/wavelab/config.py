"""Run configuration: the ``section.key = value`` text format and its pydantic schema.

Grammar (UTF-8)::

    # comment
    section.key = value      # trailing comments allowed

Values are integers, reals, exact rationals ``p/q``, ``true``/``false``,
``inf``, comma-separated lists or bare strings. Parsing keeps raw strings;
the pydantic models coerce them. Loading reports every violation it finds.
"""
import logging
import math
import os
from fractions import Fraction
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, ValidationError

from .core.dynamics import STABILITY_MARGIN
from .core.errors import ConfigError, DomainError
from .core.exponents import (
    INF,
    AdmissiblePair,
    Params,
    Theorem,
    classify_pair,
    gamma_interval,
    to_rational,
    validate_params,
)
from .core.grid import GridMode, GridSpec
from .core.probes import FAMILIES, PROBES
from .core.profiles import PROFILES, support_radius

logger = logging.getLogger(__name__)

DEFAULT_OUTPUT_DIR = "data/runs"
SUBCOMMANDS = ("check-exponents", "simulate", "picard", "continue", "norms", "probe", "sweep")
# subcommands whose numerics rely on the theorem hypotheses
ELIGIBILITY_REQUIRED = ("picard", "continue", "probe", "sweep")


def _rational(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise ValueError("use an exact rational such as 1/2, not a float literal")
    try:
        return to_rational(value)
    except DomainError as e:
        raise ValueError(str(e)) from e


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


Rational = Annotated[Fraction, BeforeValidator(_rational), PlainSerializer(str, return_type=str)]
StrList = Annotated[List[str], BeforeValidator(_split_list)]
FloatList = Annotated[List[float], BeforeValidator(_split_list)]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True)


class GridSection(_Section):
    mode: GridMode = GridMode.RADIAL1D
    n: int = 256
    box_length: float = 40.0
    dealias: bool = False
    compare_full3d: bool = False


class EqSection(_Section):
    alpha: Rational = Fraction(1, 2)
    b: Rational = Fraction(1, 2)
    s: Rational = Fraction(0)
    epsilon: Optional[float] = Field(default=None, ge=0)
    theorem: Theorem = Theorem.T1_1
    gamma: Optional[Rational] = None


class DataSection(_Section):
    profile: str = "bump"
    amplitude: float = 0.1
    width: float = 2.0
    psi_amplitude: float = 0.0
    psi_profile: str = "zero"


class TimeSection(_Section):
    T: float = Field(default=0.5, gt=0)
    dt: float = Field(default=1e-3, gt=0)
    snapshots: int = Field(default=33, ge=9)
    quadrature: Literal["simpson", "trapezoid"] = "simpson"
    horizon: float = Field(default=10.0, gt=0)
    drift_tol: float = Field(default=1e-4, gt=0)
    min_order: float = Field(default=1.9, ge=0)


class PicardSection(_Section):
    max_iters: int = Field(default=50, ge=1)
    tol: float = Field(default=1e-10, gt=0)
    a_policy: Union[Literal["auto"], float] = "auto"
    pair_set: StrList = ["auto"]
    contraction_target: float = Field(default=0.5, gt=0, lt=1)
    space_scale: int = Field(default=3, ge=1)
    oracle_tol: float = Field(default=1e-4, gt=0)


class ContinuationSection(_Section):
    max_retries: int = Field(default=4, ge=0)
    bisect_delta: bool = False
    delta_low: float = Field(default=1e-3, gt=0)
    delta_high: float = Field(default=1.0, gt=0)
    delta_steps: int = Field(default=8, ge=1)


class ProbesSection(_Section):
    name: StrList = ["nonlinear"]
    family: str = "band_limited"
    samples: int = Field(default=100, ge=4)
    seed: Optional[int] = Field(default=None, ge=0)
    workers: int = Field(default=1, ge=1)


class SweepSection(_Section):
    t_values: FloatList = []
    workers: int = Field(default=1, ge=1)


class OutputSection(_Section):
    dir: Optional[str] = None
    formats: StrList = ["csv", "json", "svg"]
    snapshots: bool = False


class RunConfig(_Section):
    grid: GridSection = GridSection()
    eq: EqSection = EqSection()
    data: DataSection = DataSection()
    time: TimeSection = TimeSection()
    picard: PicardSection = PicardSection()
    continuation: ContinuationSection = ContinuationSection()
    probes: ProbesSection = ProbesSection()
    sweep: SweepSection = SweepSection()
    output: OutputSection = OutputSection()

    def params(self) -> Params:
        return Params(self.eq.alpha, self.eq.b, self.eq.s)

    def grid_spec(self) -> GridSpec:
        return GridSpec(self.grid.mode, self.grid.n, self.grid.box_length)

    def pairs(self) -> Optional[Tuple[AdmissiblePair, ...]]:
        """Explicit pair set, or None for the default set."""
        if self.picard.pair_set == ["auto"]:
            return None
        return tuple(parse_pair(item) for item in self.picard.pair_set)

    def output_dir(self) -> Path:
        return Path(self.output.dir or os.getenv("WAVELAB_OUTPUT_DIR", DEFAULT_OUTPUT_DIR))

    def echo(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def parse_pair(text: str) -> AdmissiblePair:
    """``q:r`` with ``inf`` allowed for either exponent."""
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError(f"pair {text!r} is not of the form q:r")
    q, r = (p.strip() for p in parts)
    return AdmissiblePair.of(INF if q.lower() == "inf" else q, INF if r.lower() == "inf" else r)


def parse_text(text: str) -> Tuple[Dict[str, Dict[str, str]], Dict[str, int]]:
    """Parse the key-value format into nested raw strings plus a key -> line map."""
    tree: Dict[str, Dict[str, str]] = {}
    lines: Dict[str, int] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError([f"expected 'section.key = value', got {raw.strip()!r}"], line=number)
        key, value = (part.strip() for part in line.split("=", 1))
        if key.count(".") != 1 or not all(key.split(".")):
            raise ConfigError([f"key {key!r} is not of the form section.key"], line=number)
        if not value:
            raise ConfigError([f"key {key!r} has no value"], line=number)
        if key in lines:
            raise ConfigError([f"duplicate key {key!r} (first set on line {lines[key]})"], line=number)
        section, name = key.split(".")
        tree.setdefault(section, {})[name] = value
        lines[key] = number
    return tree, lines


def _describe(error: Dict[str, Any], lines: Dict[str, int]) -> str:
    loc = ".".join(str(part) for part in error["loc"][:2])
    where = f" (line {lines[loc]})" if loc in lines else ""
    return f"{loc}: {error['msg']}{where}"


def stability_limit_for(spec: GridSpec) -> float:
    xi_max = math.sqrt(spec.d) * math.pi * spec.n_points / spec.box_length
    return STABILITY_MARGIN * 2.0 / xi_max


def wraparound_violations(cfg: RunConfig, t_final: float) -> List[str]:
    """Finite speed of propagation: the data support must stay clear of the periodic boundary."""
    radius = support_radius(cfg.data.profile, cfg.data.width)
    if cfg.data.psi_amplitude:
        radius = max(radius, support_radius(cfg.data.psi_profile, cfg.data.width))
    clearance = cfg.grid.box_length / 2 - radius
    if clearance <= t_final:
        return [f"wrap-around: L/2 - support radius = {clearance:g} must exceed t = {t_final:g}"]
    return []


def cross_check(cfg: RunConfig, subcommand: Optional[str] = None, seed_required: bool = False) -> List[str]:
    """Module preconditions that the schema cannot express."""
    problems: List[str] = []
    try:
        spec = cfg.grid_spec()
    except DomainError as e:
        problems.append(f"grid: {e}")
        spec = None
    try:
        params = cfg.params()
    except DomainError as e:
        problems.append(f"eq: {e}")
        params = None
    if params is not None and (subcommand is None or subcommand in ELIGIBILITY_REQUIRED):
        report = validate_params(params, cfg.eq.theorem)
        problems.extend(f"eq: {v}" for v in report.violations)
    if cfg.eq.gamma is not None:
        try:
            low, high = gamma_interval(cfg.eq.b)
            if not low < cfg.eq.gamma < high:
                problems.append(f"eq.gamma = {cfg.eq.gamma} must lie in (2, 3/b) = (2, {high})")
        except DomainError as e:
            problems.append(f"eq.gamma: {e}")
    if cfg.eq.epsilon == 0 and cfg.grid.mode is not GridMode.RADIAL1D:
        problems.append("eq.epsilon = 0 requires grid.mode = radial1d")
    if cfg.grid.compare_full3d and cfg.grid.mode is not GridMode.RADIAL1D:
        problems.append("grid.compare_full3d requires grid.mode = radial1d")
    if spec is not None:
        limit = stability_limit_for(spec)
        if cfg.time.dt > limit:
            problems.append(f"time.dt = {cfg.time.dt:g} exceeds the reference stability limit {limit:g}")
        if cfg.grid.compare_full3d and spec.mode is GridMode.RADIAL1D:
            limit_3d = stability_limit_for(GridSpec(GridMode.FULL3D, spec.n_points, spec.box_length))
            if cfg.time.dt > limit_3d:
                problems.append(f"time.dt = {cfg.time.dt:g} exceeds the full3d stability limit {limit_3d:g}")
        t_final = cfg.time.T
        if subcommand == "continue":
            t_final = cfg.time.horizon
        elif subcommand == "sweep":
            t_final = max([cfg.time.T, *cfg.sweep.t_values])
        problems.extend(wraparound_violations(cfg, t_final))
    for item in cfg.picard.pair_set:
        if item == "auto":
            continue
        try:
            pair = parse_pair(item)
        except (ValueError, DomainError) as e:
            problems.append(f"picard.pair_set: {e}")
            continue
        if not classify_pair(pair).is_optimal:
            problems.append(f"picard.pair_set: {pair.label()} is not an optimal admissible pair")
    if cfg.data.profile not in PROFILES or cfg.data.psi_profile not in PROFILES:
        problems.append(f"data: profiles must be one of {', '.join(PROFILES)}")
    if cfg.data.width <= 0:
        problems.append("data.width must be positive")
    unknown = [n for n in cfg.probes.name if n not in PROBES]
    if unknown:
        problems.append(f"probes.name: unknown probe(s) {', '.join(unknown)}")
    if cfg.probes.family not in FAMILIES:
        problems.append(f"probes.family must be one of {', '.join(FAMILIES)}")
    if seed_required and cfg.probes.seed is None:
        problems.append("probes.seed is mandatory for probe runs")
    if cfg.continuation.delta_low >= cfg.continuation.delta_high:
        problems.append("continuation.delta_low must be below continuation.delta_high")
    if any(T <= 0 for T in cfg.sweep.t_values):
        problems.append("sweep.t_values must be positive")
    return problems


def build_config(
    tree: Dict[str, Dict[str, Any]],
    lines: Optional[Dict[str, int]] = None,
    subcommand: Optional[str] = None,
    seed: Optional[int] = None,
) -> RunConfig:
    """Validate a raw tree; raises ConfigError listing every violation."""
    lines = lines or {}
    if seed is not None:
        tree = {**tree, "probes": {**tree.get("probes", {}), "seed": seed}}
    try:
        cfg = RunConfig.model_validate(tree)
    except ValidationError as e:
        violations = [_describe(err, lines) for err in e.errors()]
        logger.error(f"Error validating config: {len(violations)} violation(s)")
        raise ConfigError(violations) from e
    seed_required = subcommand == "probe" or "probes" in tree
    problems = cross_check(cfg, subcommand, seed_required)
    if problems:
        logger.error(f"Error validating config: {len(problems)} violation(s)")
        raise ConfigError(problems)
    return cfg


def load_config(path: Union[str, Path], subcommand: Optional[str] = None, seed: Optional[int] = None) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError([f"cannot read config {path}: {e}"]) from e
    tree, lines = parse_text(text)
    cfg = build_config(tree, lines, subcommand, seed)
    logger.info(f"Loaded config {path}")
    return cfg
