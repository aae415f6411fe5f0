from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from models.distributions import PriorDistribution
from models.likelihood import LikelihoodModel
from shared.utils.exceptions import ZeroEvidenceException


@dataclass(frozen=True, eq=False)
class PosteriorResult:
    posterior: PriorDistribution
    evidence: float


def evidence(prior: PriorDistribution, likelihood: LikelihoodModel) -> float:
    """P(d) = sum_h P(h) P(d|h)"""
    return float(np.dot(prior.p, likelihood.values(prior.space)))


def bayes_posterior(prior: PriorDistribution, likelihood: LikelihoodModel) -> PosteriorResult:
    """Exact classical Bayes rule; the oracle every quantum result is compared against"""
    joint = prior.p * likelihood.values(prior.space)
    total = float(joint.sum())
    if total <= 0.0:
        raise ZeroEvidenceException("Evidence P(d) is zero; the posterior is undefined")
    posterior = joint / total
    return PosteriorResult(PriorDistribution(prior.space, posterior / posterior.sum()), total)


def max_likelihood_over_support(prior: PriorDistribution, likelihood: LikelihoodModel) -> float:
    values = likelihood.values(prior.space)
    return float(values[sorted(prior.support)].max())

