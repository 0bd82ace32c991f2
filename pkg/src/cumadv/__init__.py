"""Talent-based and path-dependent generative models, and tests that tell them apart (or cannot)."""

from .distributions import (Bernoulli, Discrete, Exponential, Gamma, LogNormal, Normal, Uniform, Uniform01,
                            inverse_transform, sample, sample_many)
from .generators import GeneratorSpec
from .rng import RngStream, make_rng, split_rng
from .sequence import SequenceSample

__all__ = [
    "Bernoulli", "Discrete", "Exponential", "Gamma", "LogNormal", "Normal", "Uniform", "Uniform01",
    "inverse_transform", "sample", "sample_many", "GeneratorSpec", "RngStream", "make_rng", "split_rng",
    "SequenceSample",
]
