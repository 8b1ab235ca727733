"""Repository pattern for GVCK containers."""

from .checkpoint_repository import CheckpointRepository
from .corpus_repository import CorpusRepository
from .feature_repository import FeatureRepository

__all__ = ['CheckpointRepository', 'CorpusRepository', 'FeatureRepository']
