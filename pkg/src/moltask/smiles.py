"""SMILES tokenizer, parser, writer, canonicalizer and randomizer.

Grammar subset: organic-subset atoms {B,C,N,O,P,S,F,Cl,Br,I} plus their
aromatic lowercase forms, bracket atoms with chirality/H-count/charge,
bond symbols - = # :, branches, ring closures 0-9 and %nn. Stereo markers
(/ \\ @) are tokenized but carry no meaning here.

Aromaticity handling:
  * lowercase input atoms are aromatic; their ring systems must admit an
    alternating single/double assignment (checked by a small matcher);
  * kekule input is re-perceived as aromatic only for six-membered rings
    of neutral C/N with strictly alternating single/double bonds.
Implicit hydrogens are assigned from the kekule bond orders against the
standard valence tables, so HBD and TPSA see correct H counts.
"""

import random
import re
import sys

from .errors import (
    AromaticityError,
    GrammarError,
    UnclosedBranchError,
    UnclosedRingError,
    UnknownCharacter,
    ValenceError,
)
from .graph import AROMATIC, DOUBLE, SINGLE, TRIPLE, Atom, Bond, MolGraph

ORGANIC_ATOMS = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"}
AROMATIC_ATOMS = {"b", "c", "n", "o", "p", "s"}
BOND_TOKENS = {"-": SINGLE, "=": DOUBLE, "#": TRIPLE, ":": AROMATIC}
STEREO_BOND_TOKENS = {"/", "\\"}  # accepted, treated as plain single bonds

# Permitted valences for neutral atoms. Charged atoms shift these by group:
# B loses one slot per positive charge, C loses |charge|, the N/O families
# and the halogens gain the signed charge.
VALENCES = {
    "B": (3,),
    "C": (4,),
    "N": (3,),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}

MAX_CHARGE = 2

_BRACKET_RE = re.compile(
    r"^\[(?P<sym>Cl|Br|[BCNOPSFI]|[bcnops])"
    r"(?P<chir>@{1,2})?"
    r"(?P<h>H\d?)?"
    r"(?P<chg>\+\+|--|[+-]\d?)?\]$"
)


def tokenize(s: str) -> list[str]:
    """Split a SMILES string into grammar tokens.

    The concatenation of the returned tokens reproduces ``s`` exactly;
    characters outside the grammar raise UnknownCharacter.
    """
    return [tok for tok, _ in _tokenize_with_pos(s)]


def _tokenize_with_pos(s: str) -> list[tuple[str, int]]:
    if not s:
        raise GrammarError("empty SMILES string")
    tokens = []
    i = 0
    n = len(s)
    while i < n:
        ch = s[i]
        if ch == "[":
            j = s.find("]", i + 1)
            if j == -1:
                raise GrammarError("unterminated bracket atom", i)
            tokens.append((s[i : j + 1], i))
            i = j + 1
        elif ch == "%":
            if i + 2 < n and s[i + 1].isdigit() and s[i + 2].isdigit():
                tokens.append((s[i : i + 3], i))
                i += 3
            else:
                raise GrammarError("'%' must be followed by two digits", i)
        elif s[i : i + 2] in ("Cl", "Br"):
            tokens.append((s[i : i + 2], i))
            i += 2
        elif ch in "BCNOPSFI" or ch in AROMATIC_ATOMS:
            tokens.append((ch, i))
            i += 1
        elif ch in BOND_TOKENS or ch in STEREO_BOND_TOKENS or ch in "()" or ch.isdigit():
            tokens.append((ch, i))
            i += 1
        else:
            raise UnknownCharacter(ch, i)
    return tokens


def _parse_bracket(token: str, pos: int) -> Atom:
    m = _BRACKET_RE.match(token)
    if m is None:
        raise GrammarError(f"malformed bracket atom {token!r}", pos)
    sym = m.group("sym")
    aromatic = sym in AROMATIC_ATOMS
    element = sym.capitalize() if aromatic else sym
    h = m.group("h")
    h_count = 0
    if h:
        h_count = int(h[1:]) if len(h) > 1 else 1
    chg = m.group("chg")
    charge = 0
    if chg:
        if chg in ("++", "--"):
            charge = 2 if chg == "++" else -2
        elif len(chg) == 1:
            charge = 1 if chg == "+" else -1
        else:
            charge = int(chg[1]) * (1 if chg[0] == "+" else -1)
    if abs(charge) > MAX_CHARGE:
        raise ValenceError(f"charge {charge:+d} outside [-2,+2]", pos)
    return Atom(element=element, aromatic=aromatic, formal_charge=charge, explicit_h=h_count)


def permitted_valences(element: str, charge: int) -> tuple[int, ...]:
    base = VALENCES[element]
    if charge == 0:
        return base
    if element == "C":
        shifted = tuple(v - abs(charge) for v in base)
    elif element == "B":
        shifted = tuple(v - charge for v in base)
    else:
        shifted = tuple(v + charge for v in base)
    return tuple(v for v in shifted if v >= 0)


def _aromatic_target_valence(atom: Atom) -> int:
    vals = permitted_valences(atom.element, atom.formal_charge)
    if not vals:
        raise ValenceError(
            f"element {atom.element} with charge {atom.formal_charge:+d} has no valence"
        )
    return vals[0]


def parse(s: str) -> MolGraph:
    """Parse a SMILES string into a validated MolGraph.

    Raises ParseError subclasses categorized as grammar, unclosed-ring,
    unclosed-branch, valence or aromaticity.
    """
    tokens = _tokenize_with_pos(s)
    atoms: list[Atom] = []
    bonds: list[Bond] = []
    bond_pairs: set[tuple[int, int]] = set()
    anchor: int | None = None
    branch_stack: list[int] = []
    pending: str | None = None  # bond order awaiting its second atom
    pending_pos = 0
    ring_open: dict[int, tuple[int, str | None, int]] = {}  # digit -> (atom, order, pos)

    def add_bond(a: int, b: int, order: str | None, pos: int) -> None:
        if a == b:
            raise GrammarError("ring closure bonds an atom to itself", pos)
        key = (min(a, b), max(a, b))
        if key in bond_pairs:
            raise GrammarError(f"duplicate bond between atoms {a} and {b}", pos)
        bond_pairs.add(key)
        if order is None:
            order = AROMATIC if atoms[a].aromatic and atoms[b].aromatic else SINGLE
        bonds.append(Bond(a, b, order))

    for token, pos in tokens:
        if token == "(":
            if anchor is None:
                raise GrammarError("branch opened before any atom", pos)
            if pending is not None:
                raise GrammarError("bond symbol before '('", pos)
            branch_stack.append(anchor)
        elif token == ")":
            if not branch_stack:
                raise UnclosedBranchError("unmatched ')'", pos)
            if pending is not None:
                raise GrammarError("dangling bond symbol before ')'", pending_pos)
            anchor = branch_stack.pop()
        elif token in BOND_TOKENS or token in STEREO_BOND_TOKENS:
            if pending is not None:
                raise GrammarError("two bond symbols in a row", pos)
            if anchor is None:
                raise GrammarError("bond symbol before any atom", pos)
            pending = SINGLE if token in STEREO_BOND_TOKENS else BOND_TOKENS[token]
            pending_pos = pos
        elif token.isdigit() or token.startswith("%"):
            digit = int(token[1:]) if token.startswith("%") else int(token)
            if anchor is None:
                raise GrammarError("ring closure before any atom", pos)
            if digit in ring_open:
                other, other_order, _ = ring_open.pop(digit)
                order = pending if pending is not None else other_order
                if pending is not None and other_order is not None and pending != other_order:
                    raise GrammarError(f"conflicting orders for ring closure {digit}", pos)
                add_bond(other, anchor, order, pos)
            else:
                ring_open[digit] = (anchor, pending, pos)
            pending = None
        else:
            # atom token
            if token.startswith("["):
                atom = _parse_bracket(token, pos)
            elif token in ORGANIC_ATOMS:
                atom = Atom(element=token)
            elif token in AROMATIC_ATOMS:
                atom = Atom(element=token.capitalize(), aromatic=True)
            else:
                raise GrammarError(f"unexpected token {token!r}", pos)
            atoms.append(atom)
            idx = len(atoms) - 1
            if anchor is not None:
                add_bond(anchor, idx, pending, pos)
            elif pending is not None:
                raise GrammarError("bond symbol before any atom", pending_pos)
            pending = None
            anchor = idx

    if not atoms:
        raise GrammarError("no atoms in SMILES string")
    if pending is not None:
        raise GrammarError("dangling bond symbol at end of string", pending_pos)
    if branch_stack:
        raise UnclosedBranchError(f"{len(branch_stack)} unclosed '('")
    if ring_open:
        digits = sorted(ring_open)
        raise UnclosedRingError(f"ring closure digits never closed: {digits}")

    for bond in bonds:
        if bond.order == AROMATIC and not (
            atoms[bond.a].aromatic and atoms[bond.b].aromatic
        ):
            raise AromaticityError(
                f"aromatic bond between non-aromatic atoms {bond.a}-{bond.b}"
            )

    graph = MolGraph(atoms, bonds)
    _perceive_aromatic_rings(graph)
    _kekulize(graph)
    _assign_hydrogens(graph)
    return graph


# ---------------------------------------------------------------------------
# Aromaticity

_KEKULE_VALUE = {SINGLE: 1, DOUBLE: 2}


def _perceive_aromatic_rings(g: MolGraph) -> None:
    """Mark six-membered alternating C/N rings from kekule input as aromatic.

    All candidate rings are checked against the pristine bond orders first,
    then marked together, so fused systems (e.g. naphthalene) are either
    perceived as a whole or left alone.
    """
    n = len(g.atoms)

    def eligible(i: int) -> bool:
        a = g.atoms[i]
        return (
            not a.aromatic
            and a.element in ("C", "N")
            and a.formal_charge == 0
            and a.explicit_h is None
            and g.atom_in_ring(i)
        )

    rings = []
    for start in range(n):
        if not eligible(start):
            continue
        # simple 6-cycles whose minimal atom index is `start`
        stack = [(start, [start])]
        while stack:
            node, path = stack.pop()
            if len(path) == 6:
                if g.bond_between(node, start) is not None and path[1] < path[-1]:
                    rings.append(path)
                continue
            for nb, _ in g.neighbors(node):
                if nb <= start or nb in path:
                    continue
                if eligible(nb):
                    stack.append((nb, path + [nb]))

    qualifying = []
    for ring in rings:
        cycle_bonds = [g.bond_between(ring[i], ring[(i + 1) % 6]) for i in range(6)]
        orders = [b.order for b in cycle_bonds]
        if set(orders) != {SINGLE, DOUBLE}:
            continue
        if not all(orders[i] != orders[(i + 1) % 6] for i in range(6)):
            continue
        # exocyclic multiple bonds would break the valence bookkeeping
        if any(
            b.order != SINGLE
            for i in ring
            for nb, b in g.neighbors(i)
            if nb not in ring
        ):
            continue
        qualifying.append((ring, cycle_bonds))

    for ring, cycle_bonds in qualifying:
        for i in ring:
            g.atoms[i].aromatic = True
        for b in cycle_bonds:
            if b.order != AROMATIC:
                b.kekule_order = _KEKULE_VALUE[b.order]
                b.order = AROMATIC


def _needs_pi_bond(g: MolGraph, i: int) -> bool:
    """Whether aromatic atom i must receive a double bond during kekulization."""
    atom = g.atoms[i]
    for _, b in g.neighbors(i):
        if b.order in (DOUBLE, TRIPLE) or b.kekule_order == 2:
            return False  # a pi bond is already present
    sigma = g.degree(i)
    h = atom.explicit_h
    if h is None:
        # bare aromatic atom: element conventions decide
        if atom.element == "C":
            return True
        if atom.element in ("N", "P"):
            return sigma == 2
        return False  # O, S, B contribute lone pairs
    total = sigma + h
    target = _aromatic_target_valence(atom)
    if total == target:
        return False
    if total == target - 1:
        return True
    raise ValenceError(
        f"aromatic atom {i} ({atom.element}) cannot reach valence {target}"
    )


_MAX_MATCH_STEPS = 200_000


def _kekulize(g: MolGraph) -> None:
    """Assign kekule orders to aromatic bonds via perfect matching.

    Atoms that must host a double bond are matched pairwise along aromatic
    bonds; failure means the ring system has no alternating form.
    """
    for i, atom in enumerate(g.atoms):
        if atom.aromatic and not g.atom_in_ring(i):
            raise AromaticityError(f"aromatic atom {i} is not in a ring")

    arom_bonds = [b for b in g.bonds if b.order == AROMATIC and b.kekule_order is None]
    if not arom_bonds:
        return

    needs = {
        i: _needs_pi_bond(g, i) for i, atom in enumerate(g.atoms) if atom.aromatic
    }

    order = sorted(i for i, need in needs.items() if need)
    adj: dict[int, list[int]] = {i: [] for i in order}
    for b in arom_bonds:
        if needs.get(b.a) and needs.get(b.b):
            adj[b.a].append(b.b)
            adj[b.b].append(b.a)

    match: dict[int, int] = {}
    steps = [0]

    def backtrack(k: int) -> bool:
        steps[0] += 1
        if steps[0] > _MAX_MATCH_STEPS:
            raise AromaticityError("kekulization search limit exceeded")
        while k < len(order) and order[k] in match:
            k += 1
        if k == len(order):
            return True
        u = order[k]
        for v in adj[u]:
            if v not in match:
                match[u] = v
                match[v] = u
                if backtrack(k + 1):
                    return True
                del match[u]
                del match[v]
        return False

    if not backtrack(0):
        raise AromaticityError("aromatic system admits no alternating bond assignment")

    for b in arom_bonds:
        b.kekule_order = 2 if match.get(b.a) == b.b else 1


# ---------------------------------------------------------------------------
# Hydrogens and valence


def _bond_value_sum(g: MolGraph, i: int) -> int:
    return sum(b.value() for _, b in g.neighbors(i))


def _assign_hydrogens(g: MolGraph) -> None:
    for i, atom in enumerate(g.atoms):
        vs = _bond_value_sum(g, i)
        if atom.explicit_h is not None:
            total = vs + atom.explicit_h
            if atom.aromatic:
                target = _aromatic_target_valence(atom)
                if total != target:
                    raise ValenceError(
                        f"atom {i} [{atom.element}] valence {total} != {target}"
                    )
            else:
                allowed = permitted_valences(atom.element, atom.formal_charge)
                if total not in allowed:
                    raise ValenceError(
                        f"atom {i} [{atom.element}{atom.formal_charge:+d}] "
                        f"valence {total} not in {allowed}"
                    )
            atom.h_count = atom.explicit_h
        elif atom.aromatic:
            h = _aromatic_target_valence(atom) - vs
            if h < 0 or h > 1:
                raise ValenceError(f"aromatic atom {i} ({atom.element}) over valence")
            atom.h_count = h
        else:
            allowed = permitted_valences(atom.element, atom.formal_charge)
            fits = [v for v in allowed if v >= vs]
            if not fits:
                raise ValenceError(
                    f"atom {i} ({atom.element}) bond order sum {vs} exceeds {allowed}"
                )
            atom.h_count = fits[0] - vs


def _inferred_bare_h(g: MolGraph, i: int) -> int | None:
    """H count a bare (bracket-free) token would get, or None if unwritable."""
    atom = g.atoms[i]
    if atom.formal_charge != 0 or atom.element not in ORGANIC_ATOMS:
        return None
    vs = _bond_value_sum(g, i)
    if not atom.aromatic:
        fits = [v for v in permitted_valences(atom.element, 0) if v >= vs]
        return fits[0] - vs if fits else None
    # bare aromatic atoms follow parser conventions; writing bare is only
    # safe when those conventions reproduce this exact atom
    has_pi = any(
        b.kekule_order == 2 or b.order in (DOUBLE, TRIPLE) for _, b in g.neighbors(i)
    )
    if atom.element == "C":
        return 4 - vs if has_pi else None
    if atom.element in ("N", "P"):
        if g.degree(i) == 2 and not has_pi:
            return None  # bare n is pyridine-like; this atom is not
        return 0
    if atom.element in ("O", "S"):
        return 0 if not has_pi else None
    if atom.element == "B":
        return 3 - vs if not has_pi else None
    return None


# ---------------------------------------------------------------------------
# Writer


def _atom_token(g: MolGraph, i: int) -> str:
    atom = g.atoms[i]
    symbol = atom.element.lower() if atom.aromatic else atom.element
    if atom.formal_charge == 0 and _inferred_bare_h(g, i) == atom.h_count:
        return symbol
    h = atom.h_count
    h_part = "" if h == 0 else ("H" if h == 1 else f"H{h}")
    c = atom.formal_charge
    if c == 0:
        c_part = ""
    elif abs(c) == 1:
        c_part = "+" if c > 0 else "-"
    else:
        c_part = f"+{c}" if c > 0 else str(c)
    return f"[{symbol}{h_part}{c_part}]"


def _bond_token(g: MolGraph, bond: Bond) -> str:
    if bond.order == AROMATIC:
        return ""
    if bond.order == SINGLE:
        both_aromatic = g.atoms[bond.a].aromatic and g.atoms[bond.b].aromatic
        return "-" if both_aromatic else ""
    if bond.order == DOUBLE:
        return "="
    if bond.order == TRIPLE:
        return "#"
    raise ValueError(f"unknown bond order {bond.order}")


def write_smiles(
    g: MolGraph, priority: list[int] | None = None, start: int | None = None
) -> str:
    """Emit a SMILES string traversing atoms in ascending priority order.

    The traversal is a depth-first walk whose neighbor order is given by
    ``priority``; the start atom defaults to the globally smallest priority.
    Ring-closure digits are allocated smallest-first and reused once closed.
    """
    n = len(g.atoms)
    if n == 0:
        raise ValueError("cannot write an empty graph")
    if priority is None:
        priority = list(range(n))
    if start is None:
        start = min(range(n), key=lambda i: priority[i])

    # pass 1: depth-first tree with neighbors in priority order; edges to
    # already-visited atoms become ring closures, numbered by discovery
    visited = [False] * n
    children: list[list[int]] = [[] for _ in range(n)]
    closures_at: dict[int, list[tuple[int, int]]] = {}
    seen_edges: set[int] = set()
    n_closures = 0
    visited[start] = True

    def sorted_neighbors(u: int):
        return iter(sorted(g.neighbors(u), key=lambda vb: priority[vb[0]]))

    frames: list[tuple[int, object]] = [(start, sorted_neighbors(start))]
    while frames:
        u, it = frames[-1]
        advanced = False
        for v, bond in it:
            eid = id(bond)
            if eid in seen_edges:
                continue
            seen_edges.add(eid)
            if visited[v]:
                closures_at.setdefault(u, []).append((n_closures, v))
                closures_at.setdefault(v, []).append((n_closures, u))
                n_closures += 1
            else:
                visited[v] = True
                children[u].append(v)
                frames.append((v, sorted_neighbors(v)))
                advanced = True
            break
        else:
            frames.pop()
            continue
        if not advanced:
            continue

    # pass 2: emit along the tree
    digit_of: dict[int, int] = {}
    free_digits: list[int] = []
    next_digit = [1]
    out: list[str] = []

    def alloc_digit() -> int:
        if free_digits:
            free_digits.sort()
            return free_digits.pop(0)
        d = next_digit[0]
        next_digit[0] += 1
        return d

    def digit_token(d: int) -> str:
        return str(d) if d <= 9 else f"%{d:02d}"

    def emit_closures(u: int) -> None:
        for k, v in sorted(closures_at.get(u, [])):
            bond = g.bond_between(u, v)
            if k not in digit_of:
                digit_of[k] = alloc_digit()
                out.append(_bond_token(g, bond))
                out.append(digit_token(digit_of[k]))
            else:
                d = digit_of.pop(k)
                out.append(digit_token(d))
                free_digits.append(d)

    def emit(u: int, parent_bond: Bond | None) -> None:
        if parent_bond is not None:
            out.append(_bond_token(g, parent_bond))
        out.append(_atom_token(g, u))
        emit_closures(u)
        kids = children[u]
        for v in kids[:-1]:
            out.append("(")
            emit(v, g.bond_between(u, v))
            out.append(")")
        if kids:
            v = kids[-1]
            emit(v, g.bond_between(u, v))

    old_limit = sys.getrecursionlimit()
    if n * 3 + 100 > old_limit:
        sys.setrecursionlimit(n * 3 + 100)
    try:
        emit(start, None)
    finally:
        sys.setrecursionlimit(old_limit)
    return "".join(out)


# ---------------------------------------------------------------------------
# Canonicalization

_BOND_CLASS = {SINGLE: 1, DOUBLE: 2, TRIPLE: 3, AROMATIC: 4}


class CanonicalizationError(RuntimeError):
    pass


_MAX_LEAVES = 8192


def _initial_invariant(g: MolGraph, i: int) -> tuple:
    a = g.atoms[i]
    return (a.element, a.aromatic, a.formal_charge, g.degree(i), a.h_count)


def _refine(g: MolGraph, cells: list[list[int]]) -> list[list[int]]:
    """Equitable refinement: split cells by neighbor-cell multisets."""
    n = len(g.atoms)
    while True:
        cell_of = [0] * n
        for ci, cell in enumerate(cells):
            for i in cell:
                cell_of[i] = ci
        new_cells: list[list[int]] = []
        changed = False
        for cell in cells:
            if len(cell) == 1:
                new_cells.append(cell)
                continue
            sig: dict[tuple, list[int]] = {}
            for i in cell:
                key = tuple(
                    sorted((_BOND_CLASS[b.order], cell_of[v]) for v, b in g.neighbors(i))
                )
                sig.setdefault(key, []).append(i)
            if len(sig) == 1:
                new_cells.append(cell)
            else:
                changed = True
                for key in sorted(sig):
                    new_cells.append(sig[key])
        cells = new_cells
        if not changed:
            return cells


def _discrete_orderings(g: MolGraph) -> list[list[int]]:
    """All atom orderings reachable by individualization-refinement.

    The orderings form a label-invariant family, so the minimum SMILES over
    them is canonical. Branching only happens on residual symmetry; drug-like
    molecules stay far below the leaf cap.
    """
    groups: dict[tuple, list[int]] = {}
    for i in range(len(g.atoms)):
        groups.setdefault(_initial_invariant(g, i), []).append(i)
    initial = [groups[k] for k in sorted(groups)]

    leaves: list[list[int]] = []

    def descend(cells: list[list[int]]) -> None:
        cells = _refine(g, cells)
        target = next((ci for ci, c in enumerate(cells) if len(c) > 1), None)
        if target is None:
            leaves.append([i for cell in cells for i in cell])
            if len(leaves) > _MAX_LEAVES:
                raise CanonicalizationError("symmetry branching limit exceeded")
            return
        cell = cells[target]
        for pick in cell:
            rest = [i for i in cell if i != pick]
            descend(cells[:target] + [[pick], rest] + cells[target + 1 :])

    descend(initial)
    return leaves


def canonicalize(g: MolGraph) -> str:
    """Deterministic canonical SMILES for a molecular graph."""
    best: str | None = None
    for ordering in _discrete_orderings(g):
        priority = [0] * len(g.atoms)
        for rank, atom in enumerate(ordering):
            priority[atom] = rank
        s = write_smiles(g, priority)
        if best is None or s < best:
            best = s
    assert best is not None
    return best


def canonical_smiles(s: str) -> str:
    """Parse then canonicalize; convenience for string inputs."""
    return canonicalize(parse(s))


# ---------------------------------------------------------------------------
# Randomized SMILES


def randomize(g: MolGraph, seed) -> str:
    """A random-traversal SMILES string for g.

    Accepts an int seed or a random.Random; uniformly random start atom and
    shuffled neighbor order. The result always reparses to the same molecule.
    """
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    n = len(g.atoms)
    priority = list(range(n))
    rng.shuffle(priority)
    start = rng.randrange(n)
    return write_smiles(g, priority, start=start)
