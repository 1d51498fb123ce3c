"""SMILES reader and writer for the subset the curation pipeline needs.

Supported: organic-subset and bracket atoms (isotope, H count, charge),
bond symbols ``- = # :``, branches, ring closures (digits and ``%nn``),
lowercase aromatic atoms and ``.`` disconnections. Stereo markers
(``/ \\ @``) and atom classes are accepted and dropped.
"""

from __future__ import annotations

import random
from typing import Optional, Sequence

from .graph import Atom, Bond, BondOrder, MoleculeGraph
from .valence import VALENCES, implicit_hydrogens, total_hydrogens, validate_valence

ELEMENTS = frozenset(
    """H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni
    Cu Zn Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe
    Cs Ba La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt Au Hg
    Tl Pb Bi Po At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No Lr Rf Db Sg
    Bh Hs Mt Ds Rg Cn Nh Fl Mc Lv Ts Og""".split()
)
AROMATIC_BRACKET = frozenset({"b", "c", "n", "o", "p", "s", "se", "as", "te"})
ORGANIC = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I")
ORGANIC_AROMATIC = ("b", "c", "n", "o", "p", "s")
BOND_SYMBOLS = {
    "-": BondOrder.SINGLE,
    "/": BondOrder.SINGLE,
    "\\": BondOrder.SINGLE,
    "=": BondOrder.DOUBLE,
    "#": BondOrder.TRIPLE,
    ":": BondOrder.AROMATIC,
}


class SmilesError(ValueError):
    """Base class for SMILES legality failures."""

    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class SmilesSyntaxError(SmilesError):
    pass


class UnmatchedRingClosureError(SmilesError):
    pass


class UnmatchedParenthesisError(SmilesError):
    pass


class ValenceError(SmilesError):
    def __init__(self, message: str, atom_index: int):
        self.atom_index = atom_index
        super().__init__(f"{message} (atom {atom_index})")


def _parse_bracket(text: str, start: int) -> tuple[Atom, int]:
    end = text.find("]", start)
    if end == -1:
        raise SmilesSyntaxError("unterminated bracket atom", start)
    body = text[start + 1:end]
    i = 0
    isotope = None
    while i < len(body) and body[i].isdigit():
        i += 1
    if i:
        isotope = int(body[:i])
    two, one = body[i:i + 2], body[i:i + 1]
    if two in AROMATIC_BRACKET or two in ELEMENTS:
        symbol = two
    elif one in AROMATIC_BRACKET or one in ELEMENTS:
        symbol = one
    else:
        raise SmilesSyntaxError(f"unknown element in [{body}]", start)
    i += len(symbol)
    aromatic = symbol[0].islower()
    element = symbol.capitalize()

    if i < len(body) and body[i] == "@":
        i += 1
        if body[i:i + 1] == "@":
            i += 1
        elif body[i:i + 2] in ("TH", "AL", "SP", "TB", "OH"):
            i += 2
            while i < len(body) and body[i].isdigit():
                i += 1

    hcount = 0
    if i < len(body) and body[i] == "H":
        i += 1
        hcount = 1
        if i < len(body) and body[i].isdigit():
            hcount = int(body[i])
            i += 1

    charge = 0
    if i < len(body) and body[i] in "+-":
        sign = 1 if body[i] == "+" else -1
        i += 1
        if i < len(body) and body[i].isdigit():
            j = i
            while j < len(body) and body[j].isdigit():
                j += 1
            charge = sign * int(body[i:j])
            i = j
        else:
            charge = sign
            while i < len(body) and body[i] == body[i - 1] and body[i] in "+-":
                charge += sign
                i += 1

    if i < len(body) and body[i] == ":":
        j = i + 1
        while j < len(body) and body[j].isdigit():
            j += 1
        if j == i + 1:
            raise SmilesSyntaxError(f"empty atom class in [{body}]", start)
        i = j

    if i != len(body):
        raise SmilesSyntaxError(f"unexpected {body[i]!r} in bracket atom", start + 1 + i)
    return Atom(element, aromatic, charge, isotope, hcount), end + 1


def parse_smiles(text: str, validate: bool = True) -> MoleculeGraph:
    """Parse ``text`` into a :class:`MoleculeGraph`.

    With ``validate`` (the default) the valence check runs as part of
    legality and a :class:`ValenceError` is raised for the first offender.
    """
    if not text:
        raise SmilesSyntaxError("empty SMILES", 0)
    atoms: list[Atom] = []
    bonds: list[Bond] = []
    bonded: set[tuple[int, int]] = set()
    branch_stack: list[tuple[int, int]] = []
    rings: dict[int, tuple[int, Optional[BondOrder], int]] = {}
    prev: Optional[int] = None
    pending: Optional[BondOrder] = None
    pending_pos = 0
    atoms_since_branch = True
    i = 0
    n = len(text)

    def connect(a: int, b: int, order: Optional[BondOrder], pos: int) -> None:
        if a == b:
            raise SmilesSyntaxError("ring closure bonds an atom to itself", pos)
        key = (min(a, b), max(a, b))
        if key in bonded:
            raise SmilesSyntaxError("duplicate bond", pos)
        if order is None:
            order = (
                BondOrder.AROMATIC
                if atoms[a].aromatic and atoms[b].aromatic
                else BondOrder.SINGLE
            )
        bonded.add(key)
        bonds.append(Bond(a, b, order))

    while i < n:
        ch = text[i]
        atom: Optional[Atom] = None
        if ch == "[":
            atom, next_i = _parse_bracket(text, i)
        elif ch.isalpha():
            sym = next((s for s in ORGANIC if text.startswith(s, i)), None)
            if sym is not None:
                atom, next_i = Atom(sym), i + len(sym)
            elif ch in ORGANIC_AROMATIC:
                atom, next_i = Atom(ch.upper(), aromatic=True), i + 1
            else:
                raise SmilesSyntaxError(f"unexpected character {ch!r}", i)

        if atom is not None:
            atoms.append(atom)
            idx = len(atoms) - 1
            if prev is not None:
                connect(prev, idx, pending, i)
            elif pending is not None:
                raise SmilesSyntaxError("bond without a preceding atom", pending_pos)
            pending = None
            prev = idx
            atoms_since_branch = True
            i = next_i
            continue

        if ch in BOND_SYMBOLS:
            if prev is None or pending is not None:
                raise SmilesSyntaxError(f"misplaced bond {ch!r}", i)
            pending, pending_pos = BOND_SYMBOLS[ch], i
            i += 1
        elif ch == "(":
            if prev is None or pending is not None or not atoms_since_branch:
                raise SmilesSyntaxError("branch must follow an atom", i)
            branch_stack.append((prev, i))
            atoms_since_branch = False
            i += 1
        elif ch == ")":
            if not branch_stack:
                raise UnmatchedParenthesisError("unmatched ')'", i)
            if pending is not None or not atoms_since_branch:
                raise SmilesSyntaxError("empty or dangling branch", i)
            prev, _ = branch_stack.pop()
            i += 1
        elif ch.isdigit() or ch == "%":
            if prev is None:
                raise SmilesSyntaxError("ring closure without an atom", i)
            if ch == "%":
                digits = text[i + 1:i + 3]
                if len(digits) != 2 or not digits.isdigit():
                    raise SmilesSyntaxError("'%' needs two digits", i)
                label, width = int(digits), 3
            else:
                label, width = int(ch), 1
            if label in rings:
                other, order, _ = rings.pop(label)
                if order is not None and pending is not None and order != pending:
                    raise SmilesSyntaxError(f"conflicting bonds on ring closure {label}", i)
                connect(other, prev, pending or order, i)
            else:
                rings[label] = (prev, pending, i)
            pending = None
            i += width
        elif ch == ".":
            if prev is None or pending is not None or branch_stack:
                raise SmilesSyntaxError("misplaced '.'", i)
            prev = None
            i += 1
        else:
            raise SmilesSyntaxError(f"unexpected character {ch!r}", i)

    if pending is not None:
        raise SmilesSyntaxError("dangling bond", pending_pos)
    if branch_stack:
        raise UnmatchedParenthesisError("unclosed '('", branch_stack[-1][1])
    if rings:
        label, (_, _, pos) = min(rings.items(), key=lambda kv: kv[1][2])
        raise UnmatchedRingClosureError(f"ring bond {label} never closed", pos)

    mol = MoleculeGraph(tuple(atoms), tuple(bonds))
    if validate:
        verdict = validate_valence(mol)
        if not verdict:
            raise ValenceError(f"valence violation: {verdict.detail}", verdict.atom_index)
    return mol


def is_legal_smiles(text: Optional[str]) -> bool:
    if not text:
        return False
    try:
        parse_smiles(text)
    except SmilesError:
        return False
    return True


# --- writer ---------------------------------------------------------------

def _atom_text(mol: MoleculeGraph, idx: int) -> str:
    atom = mol.atoms[idx]
    symbol = atom.element.lower() if atom.aromatic else atom.element
    hs = total_hydrogens(mol, idx)
    bare_ok = (
        atom.charge == 0
        and atom.isotope is None
        and (symbol in ORGANIC_AROMATIC if atom.aromatic else symbol in ORGANIC)
    )
    if bare_ok and implicit_hydrogens(mol, idx, as_bare=True) == hs:
        return symbol
    parts = ["[", str(atom.isotope) if atom.isotope is not None else "", symbol]
    if hs:
        parts.append("H" if hs == 1 else f"H{hs}")
    if atom.charge:
        sign = "+" if atom.charge > 0 else "-"
        parts.append(sign if abs(atom.charge) == 1 else f"{sign}{abs(atom.charge)}")
    parts.append("]")
    return "".join(parts)


def _bond_text(mol: MoleculeGraph, a: int, b: int, order: BondOrder) -> str:
    both_aromatic = mol.atoms[a].aromatic and mol.atoms[b].aromatic
    if order is BondOrder.SINGLE:
        return "-" if both_aromatic else ""
    if order is BondOrder.AROMATIC:
        return "" if both_aromatic else ":"
    return "=" if order is BondOrder.DOUBLE else "#"


def _ring_label(num: int) -> str:
    if num < 10:
        return str(num)
    if num < 100:
        return f"%{num}"
    raise ValueError("more than 99 simultaneously open rings")


def write_smiles(mol: MoleculeGraph, ranks: Optional[Sequence[int]] = None) -> str:
    """Serialize ``mol``; traversal follows ``ranks`` (lower rank first).

    Components start at their lowest-ranked atom and neighbours are visited
    in rank order, so a canonical ranking yields a canonical string.
    """
    n = len(mol)
    if n == 0:
        return ""
    if ranks is None:
        ranks = list(range(n))
    order_of = sorted(range(n), key=lambda i: ranks[i])

    def sorted_nbrs(i: int) -> list[tuple[int, BondOrder]]:
        return sorted(mol.neighbors(i), key=lambda nb: ranks[nb[0]])

    # pass 1: DFS tree and ring-closure edges
    visited = [False] * n
    children: list[list[tuple[int, BondOrder]]] = [[] for _ in range(n)]
    opens: list[list[tuple[int, BondOrder]]] = [[] for _ in range(n)]
    closes: list[list[int]] = [[] for _ in range(n)]
    roots = []
    for start in order_of:
        if visited[start]:
            continue
        roots.append(start)
        visited[start] = True
        stack = [(start, -1, iter(sorted_nbrs(start)))]
        on_path = {start}
        while stack:
            node, parent, it = stack[-1]
            advanced = False
            for nb, order in it:
                if nb == parent:
                    continue
                if visited[nb]:
                    if nb in on_path and not any(c == node for c, _ in opens[nb]):
                        # back edge to an ancestor: opened at nb, closed at node
                        opens[nb].append((node, order))
                        closes[node].append(nb)
                    continue
                visited[nb] = True
                children[node].append((nb, order))
                stack.append((nb, node, iter(sorted_nbrs(nb))))
                on_path.add(nb)
                advanced = True
                break
            if not advanced:
                stack.pop()
                on_path.discard(node)

    # pass 2: emit
    out: list[str] = []
    free: list[int] = []
    next_label = 1
    open_label: dict[tuple[int, int], int] = {}
    for k, root in enumerate(roots):
        if k:
            out.append(".")
        stack: list = [("atom", root, None, None)]
        while stack:
            item = stack.pop()
            if item[0] == "text":
                out.append(item[1])
                continue
            _, node, parent, order = item
            if parent is not None:
                out.append(_bond_text(mol, parent, node, order))
            out.append(_atom_text(mol, node))
            closed_here = []
            for partner in sorted(closes[node], key=lambda p: ranks[p]):
                label = open_label.pop((partner, node))
                bond_order = next(o for c, o in opens[partner] if c == node)
                out.append(_bond_text(mol, partner, node, bond_order) + _ring_label(label))
                closed_here.append(label)
            for partner, _order in sorted(opens[node], key=lambda p: ranks[p[0]]):
                candidates = sorted(l for l in free if l not in closed_here)
                if candidates:
                    label = candidates[0]
                    free.remove(label)
                else:
                    label = next_label
                    next_label += 1
                open_label[(node, partner)] = label
                out.append(_ring_label(label))
            free.extend(closed_here)
            kids = children[node]
            # last child continues the chain; earlier ones are branches
            for j in range(len(kids) - 1, -1, -1):
                child, corder = kids[j]
                if j < len(kids) - 1:
                    stack.append(("text", ")"))
                    stack.append(("atom", child, node, corder))
                    stack.append(("text", "("))
                else:
                    stack.append(("atom", child, node, corder))
    return "".join(out)


def random_smiles(mol: MoleculeGraph, rng: random.Random) -> str:
    """A random but valid spelling of ``mol`` (random atom order)."""
    ranks = list(range(len(mol)))
    rng.shuffle(ranks)
    return write_smiles(mol, ranks)
