"""
Command-line front door: one subcommand per experiment.

    fatou-lab delta --group free:2 --radius 5 --method four-point --exhaustive
    fatou-lab green --group free:2 --nu srw --x e --y e --method linear --radius 20
    fatou-lab --config runs/theorem.toml --out runs/theorem theorem

Exit codes: 0 when the run completes and passes, 1 when a check fails or the
library refuses the input, 2 on configuration errors.
"""
from __future__ import annotations

import json
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

import click
from pydantic import ValidationError

from fatou_lab.config import settings
from fatou_lab.core.exceptions import ConfigurationError, FatouLabError
from fatou_lab.core.schemas import DeltaMethod, ExperimentConfig, GreenMethod
from fatou_lab.logger import setup_logger

EXIT_FAILED = 1
EXIT_CONFIG = 2


@dataclass
class Options:
    config_path: Optional[Path]
    seed: Optional[int]
    out: Optional[Path]
    workers: Optional[int]
    verbose: bool


def load_config_file(path: Path) -> Dict[str, Any]:
    """TOML or JSON, chosen by extension"""
    try:
        text = path.read_text(encoding="utf-8")
        if path.suffix == ".json":
            return json.loads(text)
        return tomllib.loads(text)
    except (OSError, ValueError) as e:
        raise ConfigurationError(f"{path}: {e}") from e


def build_config(options: Options, operation: str, group: str, nu: str, params: Dict[str, Any]) -> ExperimentConfig:
    """Flags first, then the config file on top of them"""
    data: Dict[str, Any] = {
        "group": group,
        "step": nu,
        "operation": operation,
        "params": {k: v for k, v in params.items() if v is not None},
    }
    if options.seed is not None:
        data["seed"] = options.seed
    if options.out is not None:
        data["output"] = str(options.out)
    if options.config_path is not None:
        overrides = load_config_file(options.config_path)
        data["params"].update(overrides.pop("params", {}))
        data.update(overrides)
    if data["operation"] != operation:
        raise ConfigurationError(f"config file is for '{data['operation']}', not '{operation}'")
    return ExperimentConfig.model_validate(data)


def _describe(e: ValidationError) -> str:
    lines = []
    for error in e.errors():
        where = ".".join(str(part) for part in error["loc"]) or "config"
        lines.append(f"  {where}: {error['msg']}")
    return "Invalid configuration:\n" + "\n".join(lines)


def _run(ctx: click.Context, operation: str, group: str, nu: str, params: Dict[str, Any]) -> None:
    from fatou_lab.service import LabService

    options: Options = ctx.obj
    try:
        config = build_config(options, operation, group, nu, params)
        outcome = LabService(workers=options.workers).run(config)
    except ValidationError as e:
        click.echo(_describe(e), err=True)
        ctx.exit(EXIT_CONFIG)
    except ConfigurationError as e:
        click.echo(f"Configuration error: {e}", err=True)
        ctx.exit(EXIT_CONFIG)
    except FatouLabError as e:
        click.echo(f"{type(e).__name__}: {e}", err=True)
        ctx.exit(EXIT_FAILED)

    click.echo(outcome.headline)
    if options.verbose:
        click.echo(outcome.summary)
    if outcome.path is not None:
        click.echo(f"Report written to {outcome.path}", err=True)
    if not outcome.report.passed:
        ctx.exit(EXIT_FAILED)


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="TOML or JSON experiment config; overrides flags.")
@click.option("--seed", type=int, envvar="FATOU_SEED", help="Master seed.")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), help="Directory for report.json and tables/.")
@click.option("--workers", type=int, help="Worker processes (default: available parallelism).")
@click.option("--log-level", default=None, help="Log level (default from FATOU_LOG_LEVEL).")
@click.option("--verbose", is_flag=True, help="Print the rendered summary.")
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[Path], seed: Optional[int], out: Optional[Path],
        workers: Optional[int], log_level: Optional[str], verbose: bool) -> None:
    """Random walks on hyperbolic groups and boundary behaviour of harmonic functions."""
    setup_logger((log_level or settings.log_level).upper(), settings.log_json)
    if workers is not None:
        settings.workers = workers
    ctx.obj = Options(config_path, seed, out, workers, verbose)


_group_option = click.option("--group", default="free:2", show_default=True,
                             help="free:2, fpc:2,3, surface:2, lattice:2 or sc:a,b|a b a' b'")
_nu_option = click.option("--nu", default="srw", show_default=True, help="srw, lazy[:p] or word:prob,...")


def _register(name: str, help: str, *options) -> None:
    def callback(ctx: click.Context, group: str, nu: str, **params: Any) -> None:
        _run(ctx, name, group, nu, params)

    command = click.pass_context(callback)
    for option in reversed((_group_option, _nu_option) + options):
        command = option(command)
    cli.command(name=name, help=help)(command)


def _int(flag: str, help: str = ""):
    return click.option(flag, type=int, default=None, help=help)


def _float(flag: str, help: str = ""):
    return click.option(flag, type=float, default=None, help=help)


def _text(flag: str, help: str = ""):
    return click.option(flag, type=str, default=None, help=help)


_method = click.option("--method", type=click.Choice([m.value for m in GreenMethod]), default=None)

_register("delta", "Estimate the hyperbolicity constant on a ball.",
          _int("--radius"),
          click.option("--method", type=click.Choice([m.value for m in DeltaMethod]), default=None),
          click.option("--exhaustive/--sampled", default=None),
          _int("--samples"))
_register("ball", "Enumerate a ball as CSV (word, distance, parent).",
          _int("--radius"), _text("--center"))
_register("admissible", "Admissibility constants (m1, l, c0) of the step distribution.",
          _int("--check-radius"), _text("--center"), _int("--l-cap"))
_register("green", "Green function G(x, y) truncated at a radius.",
          _text("--x"), _text("--y"), _method, _int("--radius"), _int("--n-traj"))
_register("martin", "Martin kernel K(x, y), or K(x, theta) over increasing depths.",
          _text("--x"), _text("--y"), _text("--theta", "periodic word of the ray"), _text("--depths"),
          _method, _int("--radius"), _int("--n-traj"))
_register("measure", "Harmonic measure binned by sphere cells or shadows.",
          _text("--z"), _int("--radius"), _int("--level"), _text("--shadows"), _int("--n-traj"))
_register("poisson", "Poisson integral f_E of a union of cylinders.",
          _text("--region"), _int("--radius"), _method, _int("--points-radius"), _int("--n-traj"))
_register("condition", "h-transition row and conditioned exit frequency toward a ray.",
          _text("--theta"), _text("--z"), _int("--depth"), _int("--radius"), _text("--region"),
          _int("--n-traj"), _float("--threshold"), _int("--export"))
_register("desintegrate", "Plain expectation against the average of conditioned ones.",
          _text("--functional", "one, return:n[@w] or visits:w,cap"), _text("--z"), _int("--radius"),
          _int("--n-outer"), _int("--n-inner"))
_register("nt", "Non-tangential suprema and oscillations along a tube.",
          _text("--u"), _text("--theta"), _text("--c"), _int("--radius"))
_register("stochastic", "Boundedness and convergence along conditioned trajectories.",
          _text("--u"), _text("--theta"), _int("--radius"), _int("--n-traj"), _int("--window"))
_register("theorem", "Bounded-versus-convergent contingency over sampled boundary points.",
          _text("--u"), _text("--c", "comma-separated tube radii"), _int("--radius"), _int("--n-thetas"))
_register("lemma61", "Harmonic-measure mass of boundary neighbourhoods from every base point.",
          _float("--alpha"), _int("--radius"), _int("--n-traj"), _int("--n-rays"), _int("--points-radius"),
          _float("--oracle"))
_register("lemma62", "Escape probability from points outside the tubes toward a region.",
          _text("--region"), _text("--c"), _int("--radius"), _int("--n-traj"), _int("--n-points"),
          _int("--points-radius"), _float("--lower-bound"))
_register("corollaries", "Tails in tubes, spike containment and tube-radius independence.",
          _text("--region"), _text("--c"), _int("--radius"), _int("--n-thetas"), _int("--n-traj"),
          _text("--c-values"), _text("--e-values"))
_register("eta-bound", "P(exit outside E) against eta times P(leaving the tubes).",
          _text("--region"), _text("--c"), _int("--radius"), _int("--n-traj"), _int("--n-points"),
          _int("--points-radius"), _float("--eta-hat"))
_register("stopped-martingale", "Stopped values never exceed max(m, |u(X_0)|).",
          _text("--u"), _float("--m"), _int("--radius"), _int("--n-traj"))
_register("bounded-convergent", "Share of convergent points among stochastically bounded ones.",
          _text("--u"), _float("--bound"), _int("--radius"), _int("--n-thetas"), _int("--n-traj"))
_register("poisson-limits", "Non-tangential and stochastic limits of f_E against 1_E.",
          _text("--region"), _text("--c"), _int("--radius"), _int("--n-thetas"), _int("--n-traj"))


def main() -> None:
    cli(prog_name="fatou-lab")


if __name__ == "__main__":
    main()
