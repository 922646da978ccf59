from __future__ import annotations

import hashlib
import json
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator

from fatou_lab.core.constants import MEASURE_SUM_TOLERANCE
from fatou_lab.core.exceptions import ConfigurationError
from fatou_lab.core.numbers import HalfInt


class GroupKind(str, Enum):
    FREE = "free"
    FREE_PRODUCT_CYCLIC = "fpc"
    SMALL_CANCELLATION = "sc"
    LATTICE = "lattice"


class DeltaMethod(str, Enum):
    FOUR_POINT = "four-point"
    THIN_TRIANGLE = "thin-triangle"


class GreenMethod(str, Enum):
    MONTE_CARLO = "mc"
    LINEAR = "linear"


class TubeVerdict(str, Enum):
    IN = "in"
    OUT = "out"
    UNCERTAIN = "uncertain"


class StopKind(str, Enum):
    FIXED_STEPS = "fixed"
    EXIT_BALL = "exit"
    FIRST_OF = "first-of"


class StepKind(str, Enum):
    SRW = "srw"
    LAZY = "lazy"
    EXPLICIT = "explicit"


# ========== CONFIGURATION ==========


class GroupSpec(BaseModel):
    """Presentation of a group backend, as read from config or the command line"""
    model_config = ConfigDict(frozen=True)

    kind: GroupKind
    rank: Optional[int] = None
    orders: Tuple[int, ...] = ()
    generators: Tuple[str, ...] = ()
    relators: Tuple[str, ...] = ()
    dimension: Optional[int] = None

    @model_validator(mode="after")
    def check_kind_fields(self) -> GroupSpec:
        if self.kind == GroupKind.FREE and (self.rank is None or self.rank < 2):
            raise ValueError("free groups need rank >= 2")
        if self.kind == GroupKind.FREE_PRODUCT_CYCLIC:
            if len(self.orders) < 2 or any(n < 2 for n in self.orders):
                raise ValueError("free products need at least two cyclic factors of order >= 2")
        if self.kind == GroupKind.SMALL_CANCELLATION and (not self.generators or not self.relators):
            raise ValueError("small cancellation presentations need generators and relators")
        if self.kind == GroupKind.LATTICE and (self.dimension is None or self.dimension < 1):
            raise ValueError("lattices need dimension >= 1")
        return self

    @classmethod
    def parse(cls, text: str) -> GroupSpec:
        """
        Parse the shorthand used on the command line:
        free:2, fpc:2,2,2, surface:2, lattice:2, sc:a,b,c,d|a b a' b' c d c' d'
        """
        kind, _, arg = text.strip().partition(":")
        kind = kind.strip().lower()
        try:
            if kind == "free":
                return cls(kind=GroupKind.FREE, rank=int(arg))
            if kind == "fpc":
                return cls(kind=GroupKind.FREE_PRODUCT_CYCLIC,
                           orders=tuple(int(n) for n in arg.split(",")))
            if kind == "lattice":
                return cls(kind=GroupKind.LATTICE, dimension=int(arg))
            if kind == "surface":
                return cls.surface(int(arg))
            if kind == "sc":
                gens, _, rels = arg.partition("|")
                return cls(kind=GroupKind.SMALL_CANCELLATION,
                           generators=tuple(g.strip() for g in gens.split(",") if g.strip()),
                           relators=tuple(r.strip() for r in rels.split(";") if r.strip()))
        except ValueError as e:
            raise ConfigurationError(f"Invalid group '{text}': {e}") from e
        raise ConfigurationError(f"Unknown group kind '{kind}' in '{text}'")

    @classmethod
    def surface(cls, genus: int) -> GroupSpec:
        """Genus-g surface group <a1,b1,...|[a1,b1]...[ag,bg]>"""
        if genus < 1:
            raise ConfigurationError("surface genus must be >= 1")
        if genus <= 2:
            names = "abcd"[: 2 * genus]
        else:
            names = [f"{p}{i}" for i in range(1, genus + 1) for p in "ab"]
        letters = []
        for i in range(genus):
            x, y = names[2 * i], names[2 * i + 1]
            letters += [x, y, f"{x}'", f"{y}'"]
        return cls(kind=GroupKind.SMALL_CANCELLATION,
                   generators=tuple(names),
                   relators=(" ".join(letters),))

    @property
    def label(self) -> str:
        if self.kind == GroupKind.FREE:
            return f"free:{self.rank}"
        if self.kind == GroupKind.FREE_PRODUCT_CYCLIC:
            return "fpc:" + ",".join(str(n) for n in self.orders)
        if self.kind == GroupKind.LATTICE:
            return f"lattice:{self.dimension}"
        return "sc:" + ",".join(self.generators) + "|" + ";".join(self.relators)


class StepSpec(BaseModel):
    """Step distribution nu, given by shorthand or explicit (word, probability) pairs"""
    model_config = ConfigDict(frozen=True)

    kind: StepKind = StepKind.SRW
    laziness: str = "1/2"
    weights: Tuple[Tuple[str, str], ...] = ()

    @field_validator("laziness")
    @classmethod
    def validate_laziness(cls, v: str) -> str:
        value = Fraction(v)
        if not 0 <= value < 1:
            raise ValueError("laziness must lie in [0, 1)")
        return v

    @classmethod
    def parse(cls, text: str) -> StepSpec:
        """srw, lazy, lazy:1/3, or explicit pairs 'a:1/4,a':1/4,...'"""
        text = text.strip()
        if text == "srw":
            return cls(kind=StepKind.SRW)
        if text.startswith("lazy"):
            _, _, arg = text.partition(":")
            return cls(kind=StepKind.LAZY, laziness=arg or "1/2")
        pairs = []
        for item in text.split(","):
            word, sep, prob = item.rpartition(":")
            if not sep:
                raise ConfigurationError(f"Invalid step pair '{item}', expected word:probability")
            pairs.append((word.strip(), prob.strip()))
        return cls(kind=StepKind.EXPLICIT, weights=tuple(pairs))

    @property
    def label(self) -> str:
        if self.kind == StepKind.SRW:
            return "srw"
        if self.kind == StepKind.LAZY:
            return f"lazy:{self.laziness}"
        return ",".join(f"{w}:{p}" for w, p in self.weights)


def _default_budget(name: str) -> int:
    from fatou_lab.config import settings
    return getattr(settings, name)


class Budgets(BaseModel):
    ball_elements: int = Field(default_factory=lambda: _default_budget("ball_element_budget"))
    steps: int = Field(default_factory=lambda: _default_budget("step_cap"))
    trajectories: int = Field(default_factory=lambda: _default_budget("trajectory_budget"))


class ExperimentConfig(BaseModel):
    """A complete, reproducible description of one run"""
    group: GroupSpec
    step: StepSpec = Field(default_factory=StepSpec)
    operation: str
    params: Dict[str, Any] = Field(default_factory=dict)
    seed: int = Field(default_factory=lambda: _default_budget("default_seed"))
    output: Optional[str] = None
    budgets: Budgets = Field(default_factory=Budgets)

    @field_validator("group", mode="before")
    @classmethod
    def parse_group(cls, v: Any) -> Any:
        if isinstance(v, str):
            return GroupSpec.parse(v)
        return v

    @field_validator("step", mode="before")
    @classmethod
    def parse_step(cls, v: Any) -> Any:
        if isinstance(v, str):
            return StepSpec.parse(v)
        return v

    def canonical_json(self) -> str:
        payload = self.model_dump(mode="json", exclude={"output"})
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


# ========== GEOMETRY ==========


class DeltaEstimate(BaseModel):
    twice: int = Field(ge=0)
    method: DeltaMethod
    radius: int
    sample_count: int = 0  # 0 = exhaustive
    witness: List[str] = Field(default_factory=list)

    @property
    def value(self) -> HalfInt:
        return HalfInt(self.twice)

    @computed_field  # type: ignore[misc]
    @property
    def delta(self) -> float:
        return self.twice / 2


class StabilizationReport(BaseModel):
    point: str
    depths: List[int]
    values: List[float]
    max_successive_deviation: float
    final_deviation: float
    stabilized: bool


# ========== WALKS ==========


class AdmissibilityReport(BaseModel):
    m1: int
    c0: float
    l: int
    passed: bool
    check_radius: int
    center: str = "e"
    diagnosis: Optional[str] = None


# ========== POTENTIAL ==========


class GreenEstimate(BaseModel):
    x: str
    y: str
    value: float = Field(ge=0)
    method: GreenMethod
    stderr: Optional[float] = None
    truncation_radius: Optional[int] = None
    n_traj: Optional[int] = None
    seed: Optional[int] = None


class HarmonicityReport(BaseModel):
    max_abs_laplacian: float
    worst_point: Optional[str]
    region_size: int
    tolerance: float
    passed: bool


class HarmonicBin(BaseModel):
    label: str
    cell: Optional[Tuple[int, ...]] = None
    count: int
    probability: float


class HarmonicMeasureEstimate(BaseModel):
    z: str
    radius: int
    level: Optional[int] = None
    bins: Dict[str, HarmonicBin]
    n_traj: int
    seed: int

    @model_validator(mode="after")
    def check_total_mass(self) -> HarmonicMeasureEstimate:
        if self.n_traj and self.bins:
            total = sum(b.probability for b in self.bins.values())
            if abs(total - 1.0) > MEASURE_SUM_TOLERANCE:
                raise ValueError(f"Bin probabilities sum to {total}, expected 1")
        return self

    def sigma(self, label: str) -> float:
        p = self.bins[label].probability if label in self.bins else 0.0
        return (p * (1 - p) / self.n_traj) ** 0.5

    def coarsen(self, level: int, group: Any) -> HarmonicMeasureEstimate:
        """Merge sphere cells into their ancestors at a shallower level (same sample set)"""
        if self.level is None or level > self.level:
            raise ValueError("can only coarsen sphere-cell binnings to a shallower level")
        counts: Dict[Tuple[int, ...], int] = {}
        for b in self.bins.values():
            parent = tuple(b.cell[:level])  # type: ignore[index]
            counts[parent] = counts.get(parent, 0) + b.count
        bins = {}
        for cell in sorted(counts, key=lambda c: (len(c), c)):
            label = group.format_word(cell)
            bins[label] = HarmonicBin(label=label, cell=cell, count=counts[cell],
                                      probability=counts[cell] / self.n_traj)
        return HarmonicMeasureEstimate(z=self.z, radius=self.radius, level=level,
                                       bins=bins, n_traj=self.n_traj, seed=self.seed)


class MartingaleReport(BaseModel):
    identity_max_error: float
    visited_states: int
    times: List[int]
    means: List[float]
    stderrs: List[float]
    max_z_score: float
    sigmas: float
    passed: bool


class StrongMarkovReport(BaseModel):
    """Post-exit increments against nu, one chi-square test per exit cell"""
    radius: int
    level: int
    n_traj: int
    cells: Dict[str, int]
    p_values: Dict[str, float]
    min_p_value: Optional[float] = None
    alpha: float
    passed: bool


class DesintegrationReport(BaseModel):
    functional: str
    left: float
    left_stderr: float
    right: float
    right_stderr: float
    z_score: float
    n_outer: int
    n_inner: int
    max_renorm_defect: float
    passed: bool


# ========== EXPERIMENTS ==========


class NtVerdicts(BaseModel):
    bounded: bool
    convergent: bool
    saturating: bool
    limit: Optional[float] = None
    censored: bool = False


class NtReport(BaseModel):
    theta: str
    c: float
    radii: List[Tuple[int, int]]
    sup_per_annulus: List[Optional[float]]
    osc_per_annulus: List[Optional[float]]
    points_per_annulus: List[int]
    uncertain_per_annulus: List[int]
    empty_annuli: List[int] = Field(default_factory=list)
    verdicts: NtVerdicts

    @model_validator(mode="after")
    def convergent_implies_bounded(self) -> NtReport:
        if self.verdicts.convergent and not self.verdicts.bounded:
            raise ValueError("a convergent verdict must also be bounded")
        return self


class StochasticReport(BaseModel):
    theta: str
    n_traj: int
    window: int
    sup_thickened: List[float]
    sup_path: List[float]
    tail_osc: List[float]
    limits: List[float]
    bounded: List[bool]
    convergent: List[bool]
    censored: int
    fraction_bounded: float
    fraction_convergent: float
    max_renorm_defect: float

    @model_validator(mode="after")
    def thickened_dominates_path(self) -> StochasticReport:
        for thick, path in zip(self.sup_thickened, self.sup_path):
            if thick < path:
                raise ValueError("thickened supremum below the path supremum")
        return self


class Contingency(BaseModel):
    """2x2 bounded-vs-convergent counts"""
    bounded_convergent: int = 0
    bounded_not_convergent: int = 0
    unbounded_convergent: int = 0
    unbounded_not_convergent: int = 0
    censored: int = 0

    @property
    def total(self) -> int:
        return (self.bounded_convergent + self.bounded_not_convergent
                + self.unbounded_convergent + self.unbounded_not_convergent + self.censored)

    @property
    def censored_fraction(self) -> float:
        return self.censored / self.total if self.total else 0.0

    def add(self, other: Contingency) -> Contingency:
        return Contingency(**{k: getattr(self, k) + getattr(other, k) for k in Contingency.model_fields})


class TheoremReport(BaseModel):
    function: str
    n_thetas: int
    radius: int
    c_values: List[float]
    per_c: Dict[str, Contingency]
    pooled: Contingency
    censored_fraction: float
    max_censored_fraction: float
    passed: bool


class Lemma61Report(BaseModel):
    alpha: float
    oracle_bound: float
    minimum: float
    minimum_sigma: float
    argmin: Tuple[str, str]
    pairs: int
    translation_max_z: Optional[float] = None
    passed: bool


class Lemma62Report(BaseModel):
    c: float
    delta_hat: float
    points: List[str]
    probabilities: List[float]
    eta_hat: float
    eta_sigma: float
    lower_bound: float = 0.0
    passed: bool


class TailInTubeReport(BaseModel):
    thetas: List[str]
    frequency: float
    threshold: float
    passed: bool


class SpikeReport(BaseModel):
    theta: str
    tube_radii: List[float]
    spike_radius: List[Optional[int]]
    passed: bool


class NtStabilityReport(BaseModel):
    c_values: List[float]
    bounded_at: Dict[str, int]
    consistent: int
    censored: int
    passed: bool


class CorollaryReport(BaseModel):
    tail_in_tube: TailInTubeReport
    spikes: List[SpikeReport]
    nt_stability: NtStabilityReport
    passed: bool


class EtaBoundReport(BaseModel):
    eta_hat: float
    points: List[str]
    p_not_in_e: List[float]
    p_tau_finite: List[float]
    min_margin_z: float
    trend_depths: List[int] = Field(default_factory=list)
    trend_p_tau: List[float] = Field(default_factory=list)
    trend_ok: bool = True
    passed: bool


class StoppedMartingaleReport(BaseModel):
    m: float
    n_traj: int
    stopped: int
    violations: int
    max_ratio: float
    passed: bool


class Prop52Report(BaseModel):
    bound: float
    thetas: List[str]
    bounded_thetas: int
    convergent_among_bounded: int
    fraction: float
    passed: bool


class Lemma53Report(BaseModel):
    region: str
    thetas: List[str]
    in_region: List[bool]
    nt_limits: List[Optional[float]]
    stochastic_limits: List[Optional[float]]
    agreement: float
    tolerance: float
    passed: bool


# ========== RUNS ==========


class RunReport(BaseModel):
    """Deterministic part of a run: byte-identical across reruns with the same config"""
    command: str
    config: ExperimentConfig
    config_hash: str
    seeds: Dict[str, int]
    delta_hat: Optional[float] = None
    admissibility: Optional[AdmissibilityReport] = None
    budgets: Budgets
    passed: bool
    result: Dict[str, Any]


class RunMetadata(BaseModel):
    started_at: str
    finished_at: str
    duration_seconds: float
    version: str
    workers: int


class LabStats(BaseModel):
    runs_total: int = 0
    passed_total: int = 0
    failed_total: int = 0
    by_command: Dict[str, int] = Field(default_factory=dict)


ReportModel = Union[
    DeltaEstimate, AdmissibilityReport, GreenEstimate, HarmonicMeasureEstimate,
    HarmonicityReport, MartingaleReport, DesintegrationReport, NtReport, StochasticReport,
    TheoremReport, Lemma61Report, Lemma62Report, CorollaryReport, EtaBoundReport,
    StoppedMartingaleReport, Prop52Report, Lemma53Report,
]
