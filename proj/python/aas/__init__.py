"""Ambiguity-aware pair sampling and constrained pseudo-label refinement."""

from ._aas import (
    AasError,
    ConstraintStore,
    ContradictionError,
    EmbeddingSet,
    InfeasibleShape,
    LevelOutOfRange,
    NoPositives,
    NotApplicable,
    Partition,
    ValidationError,
    ZeroVectorError,
    adjusted_rand_index,
    count_violations,
    dbscan,
    evaluate,
    finch,
    generate_synthetic,
    greedy_color,
    hungarian,
    k_reciprocal_similarity,
    load_embeddings,
    refine,
    run_loop,
    save_embeddings,
)

__all__ = [name for name in dir() if not name.startswith("_")]
