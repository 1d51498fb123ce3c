"""Valence model for the elements the legality filter checks.

Aromatic bonds contribute 1 to the bond-order sum, so the check is a lower
bound that never rejects fused or heteroaromatic rings written in lowercase.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .graph import Atom, BondOrder, MoleculeGraph

# neutral allowed valences
VALENCES: dict[str, tuple[int, ...]] = {
    "B": (3,),
    "C": (4,),
    "N": (3,),
    "O": (2,),
    "P": (3, 5, 7),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1, 3, 5),
}


def allowed_valences(element: str, charge: int) -> tuple[int, ...]:
    base = VALENCES[element]
    if element == "C":
        shift = -abs(charge)
    elif element == "B":
        shift = -charge
    else:
        # groups 15-17: cations gain a bond (N+ ~ C), anions lose one (O- ~ F)
        shift = charge
    return tuple(v + shift for v in base if v + shift >= 0)


def bond_order_sum(mol: MoleculeGraph, idx: int) -> int:
    return sum(order.valence_contribution for _, order in mol.neighbors(idx))


def implicit_hydrogens(mol: MoleculeGraph, idx: int, as_bare: bool = False) -> int:
    """Hydrogens a bare (unbracketed) atom carries in ``mol``.

    Aromatic carbon and boron reserve one unit for the ring pi bond; other
    aromatic heteroatoms carry none (pyrrole-type NH must be bracketed).
    ``as_bare`` ignores any bracket H count and charge on the atom.
    """
    atom = mol.atoms[idx]
    if as_bare:
        atom = Atom(atom.element, atom.aromatic)
    elif atom.hcount is not None:
        return atom.hcount
    if atom.element not in VALENCES:
        return 0
    used = bond_order_sum(mol, idx)
    if atom.aromatic:
        if atom.element not in ("C", "B"):
            return 0
        n_arom = sum(1 for _, o in mol.neighbors(idx) if o is BondOrder.AROMATIC)
        used += 1 if n_arom else 0
        return max(0, VALENCES[atom.element][0] - used)
    for v in allowed_valences(atom.element, atom.charge):
        if v >= used:
            return v - used
    return 0


def total_hydrogens(mol: MoleculeGraph, idx: int) -> int:
    atom = mol.atoms[idx]
    return atom.hcount if atom.hcount is not None else implicit_hydrogens(mol, idx)


@dataclass(frozen=True)
class ValenceVerdict:
    ok: bool
    atom_index: Optional[int] = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _atom_fails(mol: MoleculeGraph, idx: int, atom: Atom) -> Optional[str]:
    if atom.element not in VALENCES:
        return None
    allowed = allowed_valences(atom.element, atom.charge)
    used = bond_order_sum(mol, idx) + (atom.hcount or 0)
    if not allowed or used > max(allowed):
        return f"{atom.element} (charge {atom.charge:+d}) has valence {used}, allowed {allowed}"
    return None


def validate_valence(mol: MoleculeGraph) -> ValenceVerdict:
    """Check every B/C/N/O/P/S/halogen atom against its charge-adjusted valences.

    Bracket atoms of other elements are trusted. Returns the first offending
    atom index on failure.
    """
    for idx, atom in enumerate(mol.atoms):
        problem = _atom_fails(mol, idx, atom)
        if problem:
            return ValenceVerdict(False, idx, problem)
    return ValenceVerdict(True)
