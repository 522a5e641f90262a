"""Reaction shingle featurization and prediction."""

from ._core import (
    Model,
    __version__,
    canonical_reaction_smiles,
    canonical_smiles,
    drfp_hex,
    shingle_keys,
    tanimoto_hex,
)

__all__ = [
    "Model",
    "__version__",
    "canonical_reaction_smiles",
    "canonical_smiles",
    "drfp_hex",
    "shingle_keys",
    "tanimoto_hex",
]
