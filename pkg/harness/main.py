"""Command-line entry point for seeded Bayesian-updating experiments."""
from __future__ import annotations

import sys
from pathlib import Path
from typing import Optional

import click

from harness.config_loader import parse_config
from harness.report import emit_report
from harness.runner import run_experiment
from shared.config.settings import settings
from shared.schemas.response_schema import create_error_response
from shared.utils.exceptions import BayesUpdateException
from shared.utils.logger import get_logger

logger = get_logger("harness", settings.LOG_LEVEL)


def _execute(verb: str, config_path: str, seed: Optional[int], out: Optional[str], fmt: str, trials: Optional[int]):
    """Run one verb and map domain errors to the CLI envelope and exit code"""
    try:
        config = parse_config(Path(config_path))
        updates = {}
        if seed is not None:
            updates["master_seed"] = seed
        if trials is not None:
            updates["trials"] = trials
        if updates:
            config = config.model_copy(update=updates)
        report = run_experiment(config, verb)
        emit_report(report, fmt, out)
    except BayesUpdateException as e:
        logger.error(f"{verb} failed: {e}")
        envelope = create_error_response(type(e).__name__, str(e), e.exit_code)
        click.echo(envelope.model_dump_json(), err=True)
        sys.exit(e.exit_code)


def _common_options(func):
    func = click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
                        show_default=True, help="Report format")(func)
    func = click.option("--out", default=None, help="Report destination (default: stdout)")(func)
    func = click.option("--trials", type=int, default=None, help="Override the configured trial count")(func)
    func = click.option("--seed", type=int, default=None, help="Override the configured master seed")(func)
    func = click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False),
                        help="Experiment config (JSON)")(func)
    return func


@click.group()
def main():
    """Exact simulation of quantum Bayesian updating."""


@main.group()
def update():
    """Run an updating algorithm."""


@update.command("prob")
@_common_options
def update_prob(config_path, seed, trials, out, fmt):
    """Probabilistic update (single shot or bound schedule)."""
    _execute("update prob", config_path, seed, out, fmt, trials)


@update.command("det")
@_common_options
def update_det(config_path, seed, trials, out, fmt):
    """Deterministic update by Grover iterations."""
    _execute("update det", config_path, seed, out, fmt, trials)


@main.command("estimate-theta")
@_common_options
def estimate_theta(config_path, seed, trials, out, fmt):
    """Estimate the rotation angle by phase estimation."""
    _execute("estimate-theta", config_path, seed, out, fmt, trials)


@main.command()
@_common_options
def bound(config_path, seed, trials, out, fmt):
    """Success probability bound P(d)/max P(d|h)."""
    _execute("bound", config_path, seed, out, fmt, trials)


@main.command()
@_common_options
def decompose(config_path, seed, trials, out, fmt):
    """Binary-expansion decomposition of the likelihood."""
    _execute("decompose", config_path, seed, out, fmt, trials)


@main.command()
@_common_options
def verify(config_path, seed, trials, out, fmt):
    """Run the configured algorithm and fail if the oracle comparison does not pass."""
    _execute("verify", config_path, seed, out, fmt, trials)


if __name__ == "__main__":
    main()
