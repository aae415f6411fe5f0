# Classical probability layer
from models.distributions import HypothesisSpace, PriorDistribution, bhattacharyya, total_variation
from models.likelihood import (
    EliminationLikelihood,
    LikelihoodModel,
    TableLikelihood,
    TwoValuedLikelihood,
)
from models.bayes import PosteriorResult, bayes_posterior, evidence, max_likelihood_over_support
from models.decomposition import DecompositionStage, decompose_general_model, reconstruct_likelihood

__all__ = [
    "HypothesisSpace",
    "PriorDistribution",
    "bhattacharyya",
    "total_variation",
    "LikelihoodModel",
    "TableLikelihood",
    "TwoValuedLikelihood",
    "EliminationLikelihood",
    "PosteriorResult",
    "bayes_posterior",
    "evidence",
    "max_likelihood_over_support",
    "DecompositionStage",
    "decompose_general_model",
    "reconstruct_likelihood",
]
