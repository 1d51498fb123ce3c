"""Attributed molecular graph used throughout the curation pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property
from typing import Iterable, Optional


class BondOrder(IntEnum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def valence_contribution(self) -> int:
        # aromatic bonds count as 1; the optional pi bond is handled by the valence model
        return 1 if self is BondOrder.AROMATIC else int(self)


@dataclass(frozen=True, slots=True)
class Atom:
    element: str
    aromatic: bool = False
    charge: int = 0
    isotope: Optional[int] = None
    hcount: Optional[int] = None  # None for bare organic-subset atoms

    @property
    def bracketed(self) -> bool:
        return self.hcount is not None


@dataclass(frozen=True, slots=True)
class Bond:
    a: int
    b: int
    order: BondOrder

    def other(self, idx: int) -> int:
        return self.b if idx == self.a else self.a


@dataclass(frozen=True, eq=False)
class MoleculeGraph:
    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    _adj: tuple[tuple[tuple[int, BondOrder], ...], ...] = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.atoms)
        adj: list[list[tuple[int, BondOrder]]] = [[] for _ in range(n)]
        seen = set()
        for bond in self.bonds:
            if not (0 <= bond.a < n and 0 <= bond.b < n):
                raise ValueError(f"bond {bond} references a missing atom")
            if bond.a == bond.b:
                raise ValueError(f"self-loop on atom {bond.a}")
            key = (min(bond.a, bond.b), max(bond.a, bond.b))
            if key in seen:
                raise ValueError(f"duplicate bond between atoms {key}")
            seen.add(key)
            adj[bond.a].append((bond.b, bond.order))
            adj[bond.b].append((bond.a, bond.order))
        object.__setattr__(self, "_adj", tuple(tuple(x) for x in adj))

    def __len__(self) -> int:
        return len(self.atoms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MoleculeGraph):
            return NotImplemented
        return self.atoms == other.atoms and self._bond_set() == other._bond_set()

    def __hash__(self) -> int:
        return hash((self.atoms, self._bond_set()))

    def _bond_set(self) -> frozenset:
        return frozenset((min(b.a, b.b), max(b.a, b.b), b.order) for b in self.bonds)

    def neighbors(self, idx: int) -> tuple[tuple[int, BondOrder], ...]:
        return self._adj[idx]

    def degree(self, idx: int) -> int:
        return len(self._adj[idx])

    @cached_property
    def ring_membership(self) -> tuple[bool, ...]:
        """Per-atom flag: True when the atom lies on at least one cycle.

        An atom is on a cycle exactly when it touches a non-bridge edge.
        """
        n = len(self.atoms)
        disc = [-1] * n
        low = [0] * n
        bridges: set[tuple[int, int]] = set()
        timer = 0
        for root in range(n):
            if disc[root] != -1:
                continue
            disc[root] = low[root] = timer
            timer += 1
            # (node, parent, neighbor iterator position)
            stack = [(root, -1, 0)]
            while stack:
                node, parent, pos = stack[-1]
                nbrs = self._adj[node]
                if pos < len(nbrs):
                    stack[-1] = (node, parent, pos + 1)
                    nxt = nbrs[pos][0]
                    if nxt == parent:
                        continue
                    if disc[nxt] == -1:
                        disc[nxt] = low[nxt] = timer
                        timer += 1
                        stack.append((nxt, node, 0))
                    else:
                        low[node] = min(low[node], disc[nxt])
                else:
                    stack.pop()
                    if parent != -1:
                        low[parent] = min(low[parent], low[node])
                        if low[node] > disc[parent]:
                            bridges.add((min(node, parent), max(node, parent)))
        ring = [False] * n
        for bond in self.bonds:
            if (min(bond.a, bond.b), max(bond.a, bond.b)) not in bridges:
                ring[bond.a] = ring[bond.b] = True
        return tuple(ring)

    def subgraph(self, keep: Iterable[int]) -> "MoleculeGraph":
        """Induced subgraph on ``keep``; atoms are renumbered in ascending order."""
        kept = sorted(set(keep))
        remap = {old: new for new, old in enumerate(kept)}
        bonds = tuple(
            Bond(remap[b.a], remap[b.b], b.order)
            for b in self.bonds
            if b.a in remap and b.b in remap
        )
        return MoleculeGraph(tuple(self.atoms[i] for i in kept), bonds)

    def relabel(self, perm: list[int]) -> "MoleculeGraph":
        """Return the same graph with atom ``i`` moved to position ``perm[i]``."""
        atoms: list[Optional[Atom]] = [None] * len(self.atoms)
        for old, new in enumerate(perm):
            atoms[new] = self.atoms[old]
        bonds = tuple(Bond(perm[b.a], perm[b.b], b.order) for b in self.bonds)
        return MoleculeGraph(tuple(atoms), bonds)  # type: ignore[arg-type]


def heavy_atom_count(mol: MoleculeGraph) -> int:
    """Number of non-hydrogen atoms; implicit and bracket hydrogens never count."""
    return sum(1 for atom in mol.atoms if atom.element != "H")
