"""Molecular graph toolkit: SMILES parsing, valence checks, canonical keys, scaffolds."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .canon import canonical_form, canonical_ranking
from .graph import Atom, Bond, BondOrder, MoleculeGraph, heavy_atom_count
from .scaffold import EMPTY_SCAFFOLD_KEY, Scaffold, murcko_scaffold, prune_terminal_atoms
from .smiles import (
    SmilesError,
    SmilesSyntaxError,
    UnmatchedParenthesisError,
    UnmatchedRingClosureError,
    ValenceError,
    is_legal_smiles,
    parse_smiles,
    random_smiles,
    write_smiles,
)
from .valence import ValenceVerdict, validate_valence

__all__ = [
    "Atom", "Bond", "BondOrder", "MoleculeGraph", "Scaffold", "MoleculeInfo",
    "EMPTY_SCAFFOLD_KEY", "SmilesError", "SmilesSyntaxError", "UnmatchedParenthesisError",
    "UnmatchedRingClosureError", "ValenceError", "ValenceVerdict",
    "analyze_smiles", "canonical_form", "canonical_ranking", "heavy_atom_count",
    "is_legal_smiles", "murcko_scaffold", "parse_smiles", "prune_terminal_atoms",
    "random_smiles", "validate_valence", "write_smiles",
]


@dataclass(frozen=True)
class MoleculeInfo:
    """Everything the pipeline needs to know about one SMILES string."""

    legal: bool
    parsable: bool
    key: Optional[str] = None
    heavy_atoms: Optional[int] = None
    scaffold_key: Optional[str] = None
    scaffold_heavy_atoms: Optional[int] = None
    error: Optional[str] = None


def _analyze(smiles: Optional[str]) -> MoleculeInfo:
    if not smiles:
        return MoleculeInfo(False, False, error="missing SMILES")
    try:
        mol = parse_smiles(smiles, validate=False)
    except SmilesError as exc:
        return MoleculeInfo(False, False, error=str(exc))
    verdict = validate_valence(mol)
    scaffold = murcko_scaffold(mol)
    return MoleculeInfo(
        legal=verdict.ok,
        parsable=True,
        key=canonical_form(mol),
        heavy_atoms=heavy_atom_count(mol),
        scaffold_key=scaffold.key,
        scaffold_heavy_atoms=heavy_atom_count(scaffold.graph),
        error=None if verdict.ok else verdict.detail,
    )


@lru_cache(maxsize=200_000)
def analyze_smiles(smiles: Optional[str]) -> MoleculeInfo:
    """Parse once and derive key, size and scaffold; results are memoized."""
    return _analyze(smiles)
