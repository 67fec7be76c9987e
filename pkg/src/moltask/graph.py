"""In-memory molecular graph: atoms, bonds, adjacency, ring membership.

Graphs are built by the SMILES parser (or programmatically by the corpus
generator) and treated as immutable afterwards; every algorithm in the
package reads them without mutation, so sharing across threads is safe.
"""

from dataclasses import dataclass, replace

SINGLE = "single"
DOUBLE = "double"
TRIPLE = "triple"
AROMATIC = "aromatic"

BOND_VALUES = {SINGLE: 1, DOUBLE: 2, TRIPLE: 3}


@dataclass
class Atom:
    element: str
    aromatic: bool = False
    formal_charge: int = 0
    explicit_h: int | None = None  # set iff the atom came from a bracket token
    index: int = -1
    h_count: int = 0  # total hydrogens after valence assignment


@dataclass
class Bond:
    a: int
    b: int
    order: str
    kekule_order: int | None = None  # 1 or 2 for aromatic bonds after kekulization

    def other(self, i: int) -> int:
        return self.b if i == self.a else self.a

    def value(self) -> int:
        """Integer bond order; aromatic bonds report their kekule assignment."""
        if self.order == AROMATIC:
            if self.kekule_order is None:
                raise ValueError("aromatic bond has no kekule assignment")
            return self.kekule_order
        return BOND_VALUES[self.order]


class MolGraph:
    """Connected molecular graph over a fixed atom list.

    Adjacency and ring membership are computed once at construction.
    """

    def __init__(self, atoms: list[Atom], bonds: list[Bond]):
        self.atoms = atoms
        self.bonds = bonds
        for i, atom in enumerate(atoms):
            atom.index = i
        n = len(atoms)
        self._adj: list[list[tuple[int, Bond]]] = [[] for _ in range(n)]
        seen_pairs = set()
        for bond in bonds:
            if bond.a == bond.b:
                raise ValueError("bond endpoints must be distinct")
            key = (min(bond.a, bond.b), max(bond.a, bond.b))
            if key in seen_pairs:
                raise ValueError(f"duplicate bond between atoms {key}")
            seen_pairs.add(key)
            self._adj[bond.a].append((bond.b, bond))
            self._adj[bond.b].append((bond.a, bond))
        self._in_ring = self._ring_membership()

    def __len__(self) -> int:
        return len(self.atoms)

    def neighbors(self, i: int) -> list[tuple[int, Bond]]:
        return self._adj[i]

    def degree(self, i: int) -> int:
        return len(self._adj[i])

    def bond_between(self, i: int, j: int) -> Bond | None:
        for k, bond in self._adj[i]:
            if k == j:
                return bond
        return None

    def atom_in_ring(self, i: int) -> bool:
        return self._in_ring[i]

    def bond_in_ring(self, bond: Bond) -> bool:
        return not self._bridges[id(bond)]

    def is_connected(self) -> bool:
        if not self.atoms:
            return False
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v, _ in self._adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == len(self.atoms)

    def circuit_rank(self) -> int:
        """Number of independent cycles of a connected graph."""
        return len(self.bonds) - len(self.atoms) + 1

    def copy(self) -> "MolGraph":
        atoms = [replace(a) for a in self.atoms]
        bonds = [replace(b) for b in self.bonds]
        return MolGraph(atoms, bonds)

    # -- internals ---------------------------------------------------------

    def _ring_membership(self) -> list[bool]:
        """An atom is in a ring iff it touches at least one non-bridge edge."""
        self._bridges = self._bridges_postorder()
        in_ring = [False] * len(self.atoms)
        for bond in self.bonds:
            if not self._bridges[id(bond)]:
                in_ring[bond.a] = True
                in_ring[bond.b] = True
        return in_ring

    def _bridges_postorder(self) -> dict[int, bool]:
        n = len(self.atoms)
        disc = [-1] * n
        low = [0] * n
        bridge = {id(b): False for b in self.bonds}
        timer = 0
        for root in range(n):
            if disc[root] != -1:
                continue
            disc[root] = low[root] = timer
            timer += 1
            # frames: (node, incoming edge id, iterator position)
            stack = [(root, -1, 0)]
            while stack:
                u, pedge, ptr = stack[-1]
                if ptr < len(self._adj[u]):
                    stack[-1] = (u, pedge, ptr + 1)
                    v, bond = self._adj[u][ptr]
                    eid = id(bond)
                    if eid == pedge:
                        continue
                    if disc[v] == -1:
                        disc[v] = low[v] = timer
                        timer += 1
                        stack.append((v, eid, 0))
                    else:
                        low[u] = min(low[u], disc[v])
                else:
                    stack.pop()
                    if stack:
                        p = stack[-1][0]
                        low[p] = min(low[p], low[u])
                        if low[u] > disc[p]:
                            bridge[pedge] = True
        return bridge
