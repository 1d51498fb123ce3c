"""Generic Bemis-Murcko frameworks by iterative terminal pruning.

Non-ring atoms of degree <= 1 are removed until none remain; what survives
is the ring systems plus the linkers between them. Exocyclic multiply
bonded atoms are not retained (unlike some toolkit variants).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .canon import canonical_form
from .graph import Atom, MoleculeGraph

EMPTY_SCAFFOLD_KEY = ""


@dataclass(frozen=True)
class Scaffold:
    graph: MoleculeGraph
    key: str

    @property
    def is_empty(self) -> bool:
        return len(self.graph) == 0


def prune_terminal_atoms(mol: MoleculeGraph) -> set[int]:
    """Indices surviving iterative deletion of non-ring atoms with degree <= 1."""
    ring = mol.ring_membership
    degree = [mol.degree(i) for i in range(len(mol))]
    alive = [True] * len(mol)
    queue = deque(i for i in range(len(mol)) if not ring[i] and degree[i] <= 1)
    while queue:
        i = queue.popleft()
        if not alive[i]:
            continue
        alive[i] = False
        for j, _ in mol.neighbors(i):
            if alive[j]:
                degree[j] -= 1
                if not ring[j] and degree[j] <= 1:
                    queue.append(j)
    return {i for i, keep in enumerate(alive) if keep}


def murcko_scaffold(mol: MoleculeGraph) -> Scaffold:
    keep = prune_terminal_atoms(mol)
    if not keep:
        return Scaffold(MoleculeGraph((), ()), EMPTY_SCAFFOLD_KEY)
    atoms = list(mol.atoms)
    # bracket atoms keep their hydrogen total: every pruned bond becomes an H
    for i in keep:
        atom = atoms[i]
        if atom.hcount is None:
            continue
        lost = sum(o.valence_contribution for j, o in mol.neighbors(i) if j not in keep)
        if lost:
            atoms[i] = Atom(atom.element, atom.aromatic, atom.charge, atom.isotope, atom.hcount + lost)
    graph = MoleculeGraph(tuple(atoms), mol.bonds).subgraph(keep)
    return Scaffold(graph, canonical_form(graph))
