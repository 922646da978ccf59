from __future__ import annotations

import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from io import StringIO
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import structlog
from pydantic import BaseModel

from fatou_lab.boundary.rays import BoundaryRay, periodic_ray
from fatou_lab.boundary.shadows import BoundaryRegion
from fatou_lab.boundary.tubes import TubeSpec, tube_points
from fatou_lab.conditioning.kernel import ConditionedKernel
from fatou_lab.conditioning.simulate import (
    CappedVisits,
    ConditionedSimulator,
    ConstantOne,
    ReturnIndicator,
    desintegration_check,
)
from fatou_lab.config import applied_budgets, settings
from fatou_lab.core.exceptions import BudgetExceeded, ConfigurationError, FatouLabError
from fatou_lab.core.numbers import HalfInt
from fatou_lab.core.schemas import (
    AdmissibilityReport,
    DeltaMethod,
    ExperimentConfig,
    GreenMethod,
    LabStats,
    RunMetadata,
    RunReport,
)
from fatou_lab.experiments import (
    corollary_checks,
    default_annuli,
    eta_tau_bound_check,
    harmonic_function,
    lemma53_check,
    lemma61_check,
    lemma62_check,
    nt_report,
    prop52_check,
    stochastic_report,
    stopped_martingale_check,
    theorem_experiment,
)
from fatou_lab.geometry.delta import estimate_delta
from fatou_lab.geometry.metric import ball
from fatou_lab.groups.base import GroupBackend, Word
from fatou_lab.groups.factory import build_group
from fatou_lab.potential.green import (
    boundary_stabilization,
    green_estimate_linear,
    green_mc,
    is_harmonic,
    martin_kernel,
)
from fatou_lab.potential.measure import ExitInRegion, ShadowBins, SphereCell, harmonic_measure, poisson_integral
from fatou_lab.renderer import Jinja2Renderer, csv_text, scalars, write_run
from fatou_lab.walks.batch import map_trajectories, write_jsonl
from fatou_lab.walks.distribution import StepDistribution, validate
from fatou_lab.walks.engine import ExitBall
from fatou_lab.walks.rng import Purpose

logger = structlog.get_logger(__name__)

COMMANDS = (
    "delta", "ball", "admissible", "green", "martin", "measure", "poisson", "condition", "desintegrate",
    "nt", "stochastic", "theorem", "lemma61", "lemma62", "corollaries", "eta-bound",
    "stopped-martingale", "bounded-convergent", "poisson-limits",
)


@dataclass
class RunContext:
    """What every operation gets: the parsed group, nu, delta-hat and its parameters"""
    config: ExperimentConfig
    group: GroupBackend
    nu: StepDistribution
    delta_hat: HalfInt
    workers: Optional[int]

    @property
    def seed(self) -> int:
        return self.config.seed

    def get(self, name: str, default: Any = None) -> Any:
        return self.config.params.get(name, default)

    def word(self, name: str, default: str = "e") -> Word:
        return self.group.word(str(self.get(name, default)))

    def ray(self, name: str, default: str = "a") -> BoundaryRay:
        return periodic_ray(self.group, str(self.get(name, default)))

    def region(self, name: str = "region", default: str = "a") -> BoundaryRegion:
        text = str(self.get(name, default)).strip()
        if text == "full":
            return BoundaryRegion.full()
        if text == "empty":
            return BoundaryRegion.empty()
        return BoundaryRegion.cylinders([w for w in text.split("+") if w.strip()], self.group)

    def integers(self, name: str, default: Any) -> List[int]:
        value = self.get(name, default)
        if isinstance(value, str):
            value = [v for v in value.split(",") if v.strip()]
        return [int(v) for v in value]

    def halves(self, name: str, default: Any) -> List[HalfInt]:
        value = self.get(name, default)
        if isinstance(value, str):
            value = [v for v in value.split(",") if v.strip()]
        if not isinstance(value, (list, tuple)):
            value = [value]
        return [HalfInt.of(v) for v in value]


@dataclass
class OpResult:
    model: BaseModel
    headline: str
    passed: bool = True
    tables: Dict[str, str] = field(default_factory=dict)

    def result(self) -> Dict[str, Any]:
        return self.model.model_dump(mode="json")


@dataclass
class RunOutcome:
    report: RunReport
    metadata: RunMetadata
    headline: str
    summary: str
    tables: Dict[str, str]
    path: Optional[Path] = None


class Extra(BaseModel):
    """Result container for operations that return plain values"""
    model_config = {"extra": "allow"}


def _functional(text: str, group: GroupBackend):
    kind, _, arg = text.partition(":")
    if kind == "one":
        return ConstantOne()
    if kind == "return":
        n, _, w = arg.partition("@")
        return ReturnIndicator(int(n), group.word(w or "e"), name=w or "e")
    if kind == "visits":
        w, _, cap = arg.partition(",")
        return CappedVisits(group.word(w), int(cap or 3), name=w)
    raise ConfigurationError(f"Unknown trajectory functional '{text}'")


class LabService:
    """Main orchestrator: builds the run context, dispatches, records and writes runs"""

    def __init__(self, workers: Optional[int] = None):
        self.renderer = Jinja2Renderer(settings.template_dir)
        self.workers = workers
        self._runs: List[Dict[str, Any]] = []
        self._passed_count = 0
        self._failed_count = 0
        self._operations: Dict[str, Callable[[RunContext], OpResult]] = {
            "delta": self.delta,
            "ball": self.ball,
            "admissible": self.admissible,
            "green": self.green,
            "martin": self.martin,
            "measure": self.measure,
            "poisson": self.poisson,
            "condition": self.condition,
            "desintegrate": self.desintegrate,
            "nt": self.nt,
            "stochastic": self.stochastic,
            "theorem": self.theorem,
            "lemma61": self.lemma61,
            "lemma62": self.lemma62,
            "corollaries": self.corollaries,
            "eta-bound": self.eta_bound,
            "stopped-martingale": self.stopped_martingale,
            "bounded-convergent": self.bounded_convergent,
            "poisson-limits": self.poisson_limits,
        }
        logger.info("Lab service initialized", operations=len(self._operations))

    # ========== RUNS ==========

    def context(self, config: ExperimentConfig) -> RunContext:
        group = build_group(config.group, config.budgets.ball_elements)
        nu = StepDistribution.from_spec(config.step, group)
        delta_hat = HalfInt(0)
        if config.operation != "delta" and group.has_boundary and not group.is_tree:
            delta_hat = estimate_delta(group, settings.delta_radius, seed=config.seed, workers=self.workers).value
        return RunContext(config, group, nu, delta_hat, self.workers)

    def run(self, config: ExperimentConfig, out_dir: Optional[Path] = None) -> RunOutcome:
        """Run one experiment; library errors are logged and re-raised"""
        if config.operation not in self._operations:
            raise ConfigurationError(f"Unknown operation '{config.operation}'")
        started = datetime.now(timezone.utc)
        clock = time.perf_counter()
        try:
            with applied_budgets(config.budgets):
                ctx = self.context(config)
                admissibility = self._admissibility(ctx) if config.operation != "admissible" else None
                outcome = self._operations[config.operation](ctx)
        except FatouLabError as e:
            self._record(config, None, str(e), started)
            self._failed_count += 1
            logger.error("Run failed", command=config.operation, error=str(e))
            raise

        report = RunReport(
            command=config.operation,
            config=config,
            config_hash=config.config_hash(),
            seeds={"master": config.seed},
            delta_hat=float(ctx.delta_hat) if config.operation != "delta" else outcome.model.delta,
            admissibility=outcome.model if config.operation == "admissible" else admissibility,
            budgets=config.budgets,
            passed=outcome.passed,
            result=outcome.result(),
        )
        metadata = RunMetadata(
            started_at=started.isoformat(),
            finished_at=datetime.now(timezone.utc).isoformat(),
            duration_seconds=time.perf_counter() - clock,
            version=_version(),
            workers=self.workers or settings.worker_count(),
        )
        summary = self.renderer.render_text("summary.txt", {
            "report": report,
            "group": ctx.group.name,
            "step": config.step.label,
            "scalars": scalars(report.result),
            "tables": sorted(outcome.tables),
        })
        result = RunOutcome(report, metadata, outcome.headline, summary, outcome.tables)
        out_dir = out_dir or (Path(config.output) if config.output else None)
        if out_dir is not None:
            result.path = write_run(out_dir, report, metadata, summary, outcome.tables)

        self._record(config, report, None, started)
        if report.passed:
            self._passed_count += 1
        else:
            self._failed_count += 1
        logger.info("Run finished", command=config.operation, passed=report.passed,
                    config_hash=report.config_hash, duration=metadata.duration_seconds)
        return result

    def _admissibility(self, ctx: RunContext) -> Optional[AdmissibilityReport]:
        try:
            return validate(ctx.nu)
        except BudgetExceeded as e:
            logger.warning("Admissibility skipped for the run envelope", error=str(e))
            return None

    def _record(self, config: ExperimentConfig, report: Optional[RunReport], error: Optional[str],
                started: datetime) -> None:
        self._runs.append({
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "start_time": started.isoformat(),
            "command": config.operation,
            "group": config.group.label,
            "seed": config.seed,
            "status": "failed" if report is None or not report.passed else "passed",
            "config_hash": config.config_hash(),
            "error": error,
        })

    # ========== GEOMETRY ==========

    def delta(self, ctx: RunContext) -> OpResult:
        estimate = estimate_delta(ctx.group, int(ctx.get("radius", settings.delta_radius)),
                                  method=DeltaMethod(ctx.get("method", DeltaMethod.FOUR_POINT.value)),
                                  exhaustive=ctx.get("exhaustive"), sample_count=ctx.get("samples"),
                                  seed=ctx.seed, workers=ctx.workers)
        return OpResult(estimate, headline=str(estimate.value))

    def ball(self, ctx: RunContext) -> OpResult:
        b = ball(ctx.group, int(ctx.get("radius", 3)), ctx.word("center"))
        out = StringIO()
        b.dump_csv(out, ctx.group)
        spheres = [len(b.sphere(n)) for n in range(b.radius + 1)]
        model = Extra(radius=b.radius, center=ctx.group.format_word(b.center), size=len(b), spheres=spheres)
        return OpResult(model, headline=str(len(b)), tables={"ball.csv": out.getvalue()})

    def admissible(self, ctx: RunContext) -> OpResult:
        report = validate(ctx.nu, int(ctx.get("check_radius", 1)), ctx.word("center"), ctx.get("l_cap"))
        return OpResult(report, headline=f"m1={report.m1} l={report.l} c0={report.c0:g}", passed=report.passed)

    # ========== POTENTIAL ==========

    def green(self, ctx: RunContext) -> OpResult:
        x, y = ctx.word("x"), ctx.word("y")
        radius = int(ctx.get("radius", 20))
        if GreenMethod(ctx.get("method", "linear")) == GreenMethod.LINEAR:
            estimate = green_estimate_linear(x, y, ctx.nu, ctx.group, radius)
        else:
            estimate = green_mc(x, y, ctx.nu, ctx.group, int(ctx.get("n_traj", 10_000)), radius, ctx.seed,
                                ctx.workers)
        return OpResult(estimate, headline=f"{estimate.value:.10g}")

    def martin(self, ctx: RunContext) -> OpResult:
        x = ctx.word("x")
        method = GreenMethod(ctx.get("method", "linear"))
        kwargs = {} if method == GreenMethod.LINEAR else {"n_traj": int(ctx.get("n_traj", 10_000)),
                                                          "seed": ctx.seed, "workers": ctx.workers}
        if ctx.get("theta") is not None:
            depths = [int(d) for d in ctx.integers("depths", [5, 10, 15])]
            value, report = boundary_stabilization(x, ctx.ray("theta"), ctx.nu, ctx.group, depths, method, **kwargs)
            model = Extra(x=ctx.group.format_word(x), theta=ctx.ray("theta").description, value=value,
                          stabilization=report.model_dump(mode="json"))
            return OpResult(model, headline=f"{value:.10g}", passed=report.stabilized)
        y = ctx.word("y", "a")
        value = martin_kernel(x, y, ctx.nu, ctx.group, method, ctx.get("radius"), **kwargs)
        model = Extra(x=ctx.group.format_word(x), y=ctx.group.format_word(y), value=value, method=method.value)
        return OpResult(model, headline=f"{value:.10g}")

    def measure(self, ctx: RunContext) -> OpResult:
        radius = int(ctx.get("radius", 10))
        if ctx.get("shadows") is not None:
            binning = ShadowBins(ctx.region("shadows").shadows, float(ctx.delta_hat))
        else:
            binning = SphereCell(int(ctx.get("level", 1)))
        estimate = harmonic_measure(ctx.word("z"), ctx.nu, ctx.group, radius, binning,
                                    int(ctx.get("n_traj", 10_000)), ctx.seed, ctx.workers)
        rows = [(b.label, b.count, b.probability, estimate.sigma(b.label)) for b in estimate.bins.values()]
        table = csv_text(("bin", "count", "probability", "sigma"), rows)
        return OpResult(estimate, headline=f"{len(estimate.bins)} bins", tables={"measure.csv": table})

    def poisson(self, ctx: RunContext) -> OpResult:
        region = ctx.region()
        radius = int(ctx.get("radius", 20))
        method = GreenMethod(ctx.get("method", "linear"))
        points = list(ball(ctx.group, int(ctx.get("points_radius", 2))))
        u = poisson_integral(region, ctx.nu, ctx.group, radius, method, points=points,
                             n_traj=int(ctx.get("n_traj", 10_000)), seed=ctx.seed, workers=ctx.workers,
                             delta_hat=float(ctx.delta_hat))
        values = {ctx.group.format_word(x): u(x) for x in points}
        out = StringIO()
        u.dump_csv(out, points)
        harmonicity = None
        passed = True
        if method == GreenMethod.LINEAR:
            interior = [x for x in points if len(x) < radius]
            harmonicity = is_harmonic(u, interior, ctx.nu, ctx.group, float(ctx.get("tolerance", 1e-9)))
            passed = harmonicity.passed
        model = Extra(region=region.label(ctx.group), radius=radius, method=method.value, values=values,
                      harmonicity=harmonicity.model_dump(mode="json") if harmonicity else None)
        return OpResult(model, headline=f"{u(()):.10g}", passed=passed, tables={"poisson.csv": out.getvalue()})

    # ========== CONDITIONING ==========

    def condition(self, ctx: RunContext) -> OpResult:
        radius = int(ctx.get("radius", 10))
        theta = ctx.ray("theta")
        kernel = ConditionedKernel.toward(theta, ctx.nu, int(ctx.get("depth", radius + settings.conditioning_depth_margin)))
        z = ctx.word("z")
        row = {ctx.group.format_word(y): p for y, p in kernel.transitions(z)}
        region = ctx.region("region", ctx.group.format_word(theta.point(1)))
        n_traj = int(ctx.get("n_traj", 10_000))
        simulator = ConditionedSimulator(z, kernel, ExitBall(radius))
        hits = map_trajectories(simulator, n_traj, ctx.seed, reducer=ExitInRegion(radius, region, ctx.group),
                                purpose=Purpose.CONDITIONED, workers=ctx.workers,
                                budgets=ctx.config.budgets)
        frequency = sum(hits) / n_traj
        threshold = float(ctx.get("threshold", 0.99))
        tables = {}
        export = int(ctx.get("export", 0))
        if export:
            out = StringIO()
            write_jsonl(map_trajectories(simulator, export, ctx.seed, purpose=Purpose.CONDITIONED, workers=ctx.workers,
                                         budgets=ctx.config.budgets),
                        out, ctx.group)
            tables["trajectories.jsonl"] = out.getvalue()
        model = Extra(theta=theta.description, depth=kernel.depth, z=ctx.group.format_word(z), row=row,
                      row_defect=kernel.row_defect(z), region=region.label(ctx.group),
                      exit_frequency=frequency, threshold=threshold,
                      stabilized=kernel.stabilization.stabilized if kernel.stabilization else None)
        return OpResult(model, headline=f"{frequency:.6g}", passed=frequency >= threshold, tables=tables)

    def desintegrate(self, ctx: RunContext) -> OpResult:
        functional = _functional(str(ctx.get("functional", "return:2")), ctx.group)
        report = desintegration_check(functional, ctx.word("z"), ctx.nu, ctx.group, int(ctx.get("radius", 10)),
                                      int(ctx.get("n_outer", 200)), int(ctx.get("n_inner", 50)), ctx.seed,
                                      ctx.workers)
        return OpResult(report, headline=f"{report.left:.6g} {report.right:.6g}", passed=report.passed)

    # ========== EXPERIMENTS ==========

    def _function(self, ctx: RunContext, radius: int):
        return harmonic_function(str(ctx.get("u", "poisson:a")), ctx.nu, ctx.group, radius)

    def nt(self, ctx: RunContext) -> OpResult:
        radius = int(ctx.get("radius", 12))
        c = ctx.halves("c", 1)[0]
        annuli = [tuple(a) for a in ctx.get("annuli", default_annuli(radius))]
        outer = max(r2 for _, r2 in annuli)
        u = self._function(ctx, outer + c.ceil() + ctx.nu.m1)
        tube = TubeSpec(ctx.ray("theta"), c)
        report = nt_report(u, tube, annuli, delta_hat=ctx.delta_hat)
        out = StringIO()
        tube_points(tube, outer, delta_hat=ctx.delta_hat).dump_csv(out, ctx.group)
        rows = [(r1, r2, s, o, n) for (r1, r2), s, o, n in zip(report.radii, report.sup_per_annulus,
                                                              report.osc_per_annulus, report.points_per_annulus)]
        tables = {"tube.csv": out.getvalue(),
                  "annuli.csv": csv_text(("r1", "r2", "sup", "osc", "points"), rows)}
        v = report.verdicts
        return OpResult(report, headline=f"bounded={v.bounded} convergent={v.convergent}", tables=tables)

    def stochastic(self, ctx: RunContext) -> OpResult:
        radius = int(ctx.get("radius", 10))
        u = self._function(ctx, radius + ctx.nu.m1 + 1)
        kernel = ConditionedKernel.toward(ctx.ray("theta"), ctx.nu, radius + settings.conditioning_depth_margin)
        report = stochastic_report(u, kernel, int(ctx.get("n_traj", 1_000)), int(ctx.get("window", 5)), radius,
                                   ctx.seed, workers=ctx.workers)
        rows = zip(report.sup_thickened, report.sup_path, report.tail_osc, report.limits)
        table = csv_text(("sup_thickened", "sup_path", "tail_osc", "limit"), rows)
        return OpResult(report, headline=f"bounded={report.fraction_bounded:.4g} "
                                         f"convergent={report.fraction_convergent:.4g}",
                        tables={"trajectories.csv": table})

    def theorem(self, ctx: RunContext) -> OpResult:
        radius = int(ctx.get("radius", 12))
        c_values = ctx.halves("c", [1, 2])
        u = self._function(ctx, radius + max(c_values).ceil() + ctx.nu.m1)
        report = theorem_experiment(u, ctx.nu, ctx.group, int(ctx.get("n_thetas", 200)), c_values, radius,
                                    ctx.seed, ctx.delta_hat, workers=ctx.workers)
        rows = [(c, t.bounded_convergent, t.bounded_not_convergent, t.unbounded_convergent,
                 t.unbounded_not_convergent, t.censored) for c, t in report.per_c.items()]
        table = csv_text(("c", "bounded_convergent", "bounded_not_convergent", "unbounded_convergent",
                          "unbounded_not_convergent", "censored"), rows)
        return OpResult(report, headline=f"off_diagonal={report.pooled.bounded_not_convergent} "
                                         f"censored={report.censored_fraction:.4g}",
                        passed=report.passed, tables={"contingency.csv": table})

    def lemma61(self, ctx: RunContext) -> OpResult:
        points = list(ball(ctx.group, int(ctx.get("points_radius", 3))))
        report = lemma61_check(ctx.nu, ctx.group, float(ctx.get("alpha", 1)), int(ctx.get("n_traj", 10_000)),
                               int(ctx.get("radius", 10)), ctx.seed, points=points,
                               n_rays=int(ctx.get("n_rays", 20)), oracle=ctx.get("oracle"), workers=ctx.workers)
        return OpResult(report, headline=f"{report.minimum:.6g}", passed=report.passed)

    def lemma62(self, ctx: RunContext) -> OpResult:
        report = lemma62_check(ctx.region(), ctx.halves("c", 1)[0], ctx.nu, ctx.group,
                               int(ctx.get("n_traj", 10_000)), int(ctx.get("radius", 10)), ctx.seed,
                               ctx.delta_hat, n_points=int(ctx.get("n_points", 50)),
                               point_radius=int(ctx.get("points_radius", 5)),
                               lower_bound=ctx.get("lower_bound"), workers=ctx.workers)
        table = csv_text(("point", "p_not_in_e"), zip(report.points, report.probabilities))
        return OpResult(report, headline=f"{report.eta_hat:.6g}", passed=report.passed,
                        tables={"escape.csv": table})

    def corollaries(self, ctx: RunContext) -> OpResult:
        report = corollary_checks(ctx.region(), ctx.halves("c", 2)[0], ctx.nu, ctx.group,
                                  int(ctx.get("radius", 10)), int(ctx.get("n_thetas", 20)),
                                  int(ctx.get("n_traj", 200)), ctx.seed,
                                  c_values=ctx.halves("c_values", [1, 2, 3]),
                                  e_values=ctx.halves("e_values", [1, 2, 3]), delta_hat=ctx.delta_hat,
                                  workers=ctx.workers)
        return OpResult(report, headline=f"tail_in_tube={report.tail_in_tube.frequency:.4g}", passed=report.passed)

    def eta_bound(self, ctx: RunContext) -> OpResult:
        eta = ctx.get("eta_hat")
        report = eta_tau_bound_check(ctx.region(), ctx.halves("c", 2)[0], ctx.nu, ctx.group,
                                     int(ctx.get("radius", 10)), int(ctx.get("n_traj", 5_000)), ctx.seed,
                                     ctx.delta_hat, eta_hat=None if eta is None else float(eta),
                                     n_points=int(ctx.get("n_points", 10)),
                                     point_radius=int(ctx.get("points_radius", 4)), workers=ctx.workers)
        table = csv_text(("z", "p_not_in_e", "p_tau_finite"), zip(report.points, report.p_not_in_e, report.p_tau_finite))
        return OpResult(report, headline=f"min_margin_z={report.min_margin_z:.4g}", passed=report.passed,
                        tables={"eta_bound.csv": table})

    def stopped_martingale(self, ctx: RunContext) -> OpResult:
        radius = int(ctx.get("radius", 10))
        u = self._function(ctx, radius + ctx.nu.m1 + 1)
        report = stopped_martingale_check(u, float(ctx.get("m", 1.0)), ctx.nu, ctx.group,
                                          int(ctx.get("n_traj", 10_000)), radius, ctx.seed, workers=ctx.workers)
        return OpResult(report, headline=f"violations={report.violations}", passed=report.passed)

    def bounded_convergent(self, ctx: RunContext) -> OpResult:
        radius = int(ctx.get("radius", 10))
        u = self._function(ctx, radius + ctx.nu.m1 + 1)
        report = prop52_check(u, ctx.nu, ctx.group, float(ctx.get("bound", 1.0)), int(ctx.get("n_thetas", 20)),
                              int(ctx.get("n_traj", 200)), radius, ctx.seed, workers=ctx.workers)
        return OpResult(report, headline=f"{report.fraction:.4g}", passed=report.passed)

    def poisson_limits(self, ctx: RunContext) -> OpResult:
        report = lemma53_check(ctx.region(), ctx.nu, ctx.group, int(ctx.get("n_thetas", 20)),
                               ctx.halves("c", 1)[0], int(ctx.get("radius", 10)), int(ctx.get("n_traj", 200)),
                               ctx.seed, ctx.delta_hat, workers=ctx.workers)
        return OpResult(report, headline=f"{report.agreement:.4g}", passed=report.passed)

    # ========== STATISTICS ==========

    def get_stats(self) -> LabStats:
        by_command: Dict[str, int] = {}
        for entry in self._runs:
            by_command[entry["command"]] = by_command.get(entry["command"], 0) + 1
        return LabStats(runs_total=len(self._runs), passed_total=self._passed_count,
                        failed_total=self._failed_count, by_command=by_command)

    def get_recent_runs(self, limit: int = 20) -> List[Dict[str, Any]]:
        return self._runs[-limit:] if self._runs else []



def _version() -> str:
    from fatou_lab import __version__
    return __version__
