"""Canonical atom ranking and canonical SMILES keys.

Colour refinement (Morgan-style neighbourhood iteration) splits atoms into
classes; remaining ties are broken by individualizing each candidate of the
first tied class and keeping the lexicographically smallest certificate.
Automorphisms discovered along the way prune equivalent branches, so highly
symmetric molecules stay cheap while the result stays exact.
"""

from __future__ import annotations

from typing import Optional

from .graph import MoleculeGraph
from .smiles import write_smiles
from .valence import total_hydrogens


def atom_invariants(mol: MoleculeGraph) -> list[tuple]:
    ring = mol.ring_membership
    return [
        (
            atom.element,
            atom.aromatic,
            atom.charge,
            atom.isotope or 0,
            total_hydrogens(mol, i),
            mol.degree(i),
            ring[i],
        )
        for i, atom in enumerate(mol.atoms)
    ]


def _dense(keys: list) -> list[int]:
    index = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [index[k] for k in keys]


def _refine(mol: MoleculeGraph, colors: list[int]) -> list[int]:
    n_classes = len(set(colors))
    while True:
        sigs = [
            (colors[i], tuple(sorted((int(o), colors[j]) for j, o in mol.neighbors(i))))
            for i in range(len(colors))
        ]
        new = _dense(sigs)
        n_new = len(set(new))
        if n_new == n_classes:
            return new
        colors, n_classes = new, n_new


def _individualize(colors: list[int], v: int) -> list[int]:
    shifted = [2 * c for c in colors]
    shifted[v] -= 1
    return _dense(shifted)


def _orbit_rep(v: int, parent: dict[int, int]) -> int:
    while parent.get(v, v) != v:
        v = parent[v]
    return v


class _Search:
    def __init__(self, mol: MoleculeGraph):
        self.mol = mol
        self.inv = atom_invariants(mol)
        self.best_cert: Optional[tuple] = None
        self.best_colors: Optional[list[int]] = None
        self.automorphisms: list[list[int]] = []

    def certificate(self, colors: list[int]) -> tuple:
        order = sorted(range(len(colors)), key=colors.__getitem__)
        edges = sorted(
            (min(colors[b.a], colors[b.b]), max(colors[b.a], colors[b.b]), int(b.order))
            for b in self.mol.bonds
        )
        return tuple(self.inv[i] for i in order), tuple(edges)

    def leaf(self, colors: list[int]) -> None:
        cert = self.certificate(colors)
        if self.best_cert is None or cert < self.best_cert:
            self.best_cert, self.best_colors = cert, colors
        elif cert == self.best_cert:
            # same certificate: map best leaf onto this one, atom by rank
            inv_best = {c: i for i, c in enumerate(self.best_colors)}
            self.automorphisms.append([inv_best[colors[i]] for i in range(len(colors))])

    def search(self, colors: list[int], path: tuple[int, ...]) -> None:
        counts: dict[int, int] = {}
        for c in colors:
            counts[c] = counts.get(c, 0) + 1
        tied = [c for c, k in counts.items() if k > 1]
        if not tied:
            self.leaf(colors)
            return
        target = min(tied)
        cell = [i for i, c in enumerate(colors) if c == target]
        explored: list[int] = []
        for v in cell:
            if explored:
                parent: dict[int, int] = {}
                for gamma in self.automorphisms:
                    if all(gamma[p] == p for p in path):
                        for i, j in enumerate(gamma):
                            ri, rj = _orbit_rep(i, parent), _orbit_rep(j, parent)
                            if ri != rj:
                                parent[max(ri, rj)] = min(ri, rj)
                rv = _orbit_rep(v, parent)
                if any(_orbit_rep(w, parent) == rv for w in explored):
                    continue
            explored.append(v)
            self.search(_refine(self.mol, _individualize(colors, v)), path + (v,))


def canonical_ranking(mol: MoleculeGraph) -> list[int]:
    """Rank of every atom (0-based) in canonical order."""
    if len(mol) == 0:
        return []
    search = _Search(mol)
    start = _refine(mol, _dense(search.inv))
    search.search(start, ())
    assert search.best_colors is not None
    return search.best_colors


def canonical_form(mol: MoleculeGraph) -> str:
    """Canonical SMILES of ``mol``: identical for every atom ordering or spelling."""
    return write_smiles(mol, canonical_ranking(mol))
