from __future__ import annotations

import json
from pathlib import Path
from typing import Union

import numpy as np
from pydantic import ValidationError

from models.distributions import HypothesisSpace, PriorDistribution
from models.likelihood import EliminationLikelihood, LikelihoodModel, TableLikelihood, TwoValuedLikelihood
from shared.schemas.experiment_schema import (
    EliminationLikelihoodSpec,
    ExperimentConfig,
    GeometricPrior,
    PointPrior,
    RandomPrior,
    TableLikelihoodSpec,
    TablePrior,
    UniformPrior,
)
from shared.utils.exceptions import ConfigException


def format_validation_error(error: ValidationError) -> str:
    """One-line '<field.path>: <message>' diagnostic for the first error"""
    first = error.errors()[0]
    location = ".".join(str(part) for part in first.get("loc", ())) or "<document>"
    message = first.get("msg", "invalid value")
    if message.startswith("Value error, "):
        message = message[len("Value error, "):]
    return f"{location}: {message}"


def _read_source(source: Union[str, Path]) -> str:
    if isinstance(source, Path):
        try:
            return source.read_text()
        except OSError as e:
            raise ConfigException(f"Cannot read config {source}: {e.strerror}") from e
    stripped = source.lstrip()
    if stripped.startswith("{"):
        return source
    return _read_source(Path(source))


def parse_config(source: Union[str, Path]) -> ExperimentConfig:
    """Validated config from a file path or JSON text"""
    text = _read_source(source)
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigException(f"line {e.lineno}: {e.msg}") from e
    if not isinstance(document, dict):
        raise ConfigException("<document>: config must be a JSON object")
    try:
        return ExperimentConfig.model_validate(document)
    except ValidationError as e:
        raise ConfigException(format_validation_error(e)) from e


def resolve_space(config: ExperimentConfig) -> HypothesisSpace:
    return HypothesisSpace(config.n)


def resolve_prior(config: ExperimentConfig) -> PriorDistribution:
    space = resolve_space(config)
    spec = config.prior
    if isinstance(spec, UniformPrior):
        return PriorDistribution.uniform(space)
    if isinstance(spec, TablePrior):
        return PriorDistribution(space, np.asarray(spec.values, dtype=float))
    if isinstance(spec, PointPrior):
        return PriorDistribution.point(space, spec.h)
    if isinstance(spec, GeometricPrior):
        return PriorDistribution.geometric(space, spec.ratio)
    if isinstance(spec, RandomPrior):
        return PriorDistribution.random(space, spec.seed)
    raise ConfigException(f"prior: unknown kind '{spec.kind}'")


def resolve_likelihood(config: ExperimentConfig) -> LikelihoodModel:
    spec = config.likelihood
    if isinstance(spec, TableLikelihoodSpec):
        return TableLikelihood(np.asarray(spec.values, dtype=float))
    if isinstance(spec, EliminationLikelihoodSpec):
        return EliminationLikelihood(frozenset(spec.favored))
    return TwoValuedLikelihood.from_suppression(spec.favored, spec.r)
