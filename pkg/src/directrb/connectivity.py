"""Qubit coupling graphs."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import networkx as nx


@dataclass(frozen=True)
class Connectivity:
    """Coupling graph on ``n`` qubits.

    ``edges`` keep their orientation (control, target) for samplers that care;
    compilers treat the graph as undirected.
    """

    n: int
    edges: tuple = field(default=())
    label: str = "custom"

    def __post_init__(self):
        edges = tuple((int(a), int(b)) for a, b in self.edges)
        for a, b in edges:
            if a == b:
                raise ValueError(f"self-loop on qubit {a}")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ValueError(f"edge ({a}, {b}) outside {self.n} qubits")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def all_to_all(cls, n: int) -> "Connectivity":
        return cls(n, tuple((a, b) for a in range(n) for b in range(a + 1, n)), "all_to_all")

    @classmethod
    def linear(cls, n: int) -> "Connectivity":
        return cls(n, tuple((q, q + 1) for q in range(n - 1)), "linear")

    @classmethod
    def ring(cls, n: int) -> "Connectivity":
        if n < 3:
            return cls.linear(n)
        return cls(n, tuple((q, (q + 1) % n) for q in range(n)), "ring")

    @classmethod
    def from_spec(cls, spec, n: int) -> "Connectivity":
        """Accept a label ("all_to_all", "linear", "ring") or an explicit edge list."""
        if isinstance(spec, str):
            try:
                return {"all_to_all": cls.all_to_all, "linear": cls.linear, "ring": cls.ring}[spec](n)
            except KeyError:
                raise ValueError(f"unknown connectivity {spec!r}") from None
        return cls(n, tuple(tuple(e) for e in spec))

    @cached_property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    def adjacent(self, a: int, b: int) -> bool:
        return self.graph.has_edge(a, b)

    def shortest_path(self, a: int, b: int) -> list:
        try:
            return nx.shortest_path(self.graph, a, b)
        except nx.NetworkXNoPath:
            raise ValueError(f"qubits {a} and {b} are not connected") from None

    def is_complete(self) -> bool:
        return self.graph.number_of_edges() == self.n * (self.n - 1) // 2
