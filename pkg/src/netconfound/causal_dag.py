"""Causal DAGs with latent flags, d-separation, and backdoor path queries.

d-separation runs a linear-time reachability sweep (the ball-passing
algorithm); backdoor queries enumerate the actual offending paths so they can
be printed. Latent flags never change the graph algorithms, only which
conditioning sets a query wrapper will accept.
"""

from __future__ import annotations

from collections import deque
from pathlib import Path
from typing import Iterable, Sequence

__all__ = [
    "CausalDag",
    "build_template",
    "TEMPLATE_NAMES",
    "check_admissible",
    "format_path",
    "parse_dag_text",
    "format_dag_text",
]


class CausalDag:
    """Immutable directed acyclic graph whose nodes carry an observed/latent flag."""

    def __init__(
        self,
        edges: Iterable[tuple[str, str]],
        latent: Iterable[str] = (),
        nodes: Iterable[str] = (),
    ):
        self._edges = tuple((str(a), str(b)) for a, b in edges)
        names: set[str] = set(nodes)
        for a, b in self._edges:
            if a == b:
                raise ValueError(f"self-edge {a!r} not allowed")
            names.add(a)
            names.add(b)
        self._latent = frozenset(str(v) for v in latent)
        unknown = self._latent - names
        if unknown:
            raise ValueError(f"latent flag on unknown node(s): {sorted(unknown)}")
        self._nodes = frozenset(names)
        self._parents: dict[str, set[str]] = {v: set() for v in names}
        self._children: dict[str, set[str]] = {v: set() for v in names}
        for a, b in self._edges:
            self._parents[b].add(a)
            self._children[a].add(b)
        self._check_acyclic()

    def _check_acyclic(self) -> None:
        indeg = {v: len(self._parents[v]) for v in self._nodes}
        queue = deque(v for v, d in indeg.items() if d == 0)
        seen = 0
        while queue:
            v = queue.popleft()
            seen += 1
            for c in self._children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
        if seen != len(self._nodes):
            raise ValueError("graph contains a directed cycle")

    @property
    def nodes(self) -> frozenset[str]:
        return self._nodes

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        return self._edges

    @property
    def latent(self) -> frozenset[str]:
        return self._latent

    @property
    def observed(self) -> frozenset[str]:
        return self._nodes - self._latent

    def parents(self, v: str) -> set[str]:
        self._require(v)
        return set(self._parents[v])

    def children(self, v: str) -> set[str]:
        self._require(v)
        return set(self._children[v])

    def descendants(self, v: str) -> set[str]:
        self._require(v)
        out: set[str] = set()
        stack = list(self._children[v])
        while stack:
            w = stack.pop()
            if w not in out:
                out.add(w)
                stack.extend(self._children[w])
        return out

    def has_edge(self, a: str, b: str) -> bool:
        return b in self._children.get(a, ())

    def _require(self, v: str) -> None:
        if v not in self._nodes:
            raise KeyError(f"unknown node {v!r}")

    # -- d-separation ------------------------------------------------------

    def _ancestors_or_self(self, nodes: Iterable[str]) -> set[str]:
        out: set[str] = set()
        stack = list(nodes)
        while stack:
            v = stack.pop()
            if v not in out:
                out.add(v)
                stack.extend(self._parents[v])
        return out

    def _reachable(self, start: str, conditioning: frozenset[str]) -> set[str]:
        """Nodes d-connected to ``start`` given the conditioning set.

        State (v, direction): direction "up" means the sweep entered v against
        an edge (from a child, or at the start); "down" means it entered along
        an edge (from a parent). Colliders pass the sweep upward only when
        they or a descendant are conditioned on.
        """
        anc_z = self._ancestors_or_self(conditioning)
        visited: set[tuple[str, str]] = set()
        queue: deque[tuple[str, str]] = deque([(start, "up")])
        reach: set[str] = set()
        while queue:
            v, direction = queue.popleft()
            if (v, direction) in visited:
                continue
            visited.add((v, direction))
            if v != start and v not in conditioning:
                reach.add(v)
            if direction == "up":
                if v not in conditioning:
                    for p in self._parents[v]:
                        queue.append((p, "up"))
                    for c in self._children[v]:
                        queue.append((c, "down"))
            else:
                if v not in conditioning:
                    for c in self._children[v]:
                        queue.append((c, "down"))
                if v in anc_z:
                    for p in self._parents[v]:
                        queue.append((p, "up"))
        return reach

    def d_separated(self, a: str, b: str, conditioning: Iterable[str] = ()) -> bool:
        """True iff every path between a and b is blocked by the conditioning set."""
        self._require(a)
        self._require(b)
        cond = frozenset(conditioning)
        for v in cond:
            self._require(v)
        if a == b:
            raise ValueError("endpoints must differ")
        if a in cond or b in cond:
            raise ValueError("endpoints may not be conditioned on")
        return b not in self._reachable(a, cond)

    # -- backdoor paths ----------------------------------------------------

    def _path_is_open(self, path: Sequence[str], conditioning: frozenset[str]) -> bool:
        for k in range(1, len(path) - 1):
            prev, v, nxt = path[k - 1], path[k], path[k + 1]
            incoming = self.has_edge(prev, v)
            outgoing = self.has_edge(v, nxt)
            is_collider = incoming and not outgoing
            if is_collider:
                opened = v in conditioning or (self.descendants(v) & conditioning)
                if not opened:
                    return False
            else:
                if v in conditioning:
                    return False
        return True

    def open_backdoor_paths(
        self,
        treatment: str,
        outcome: str,
        conditioning: Iterable[str] = (),
    ) -> list[list[str]]:
        """Every unblocked simple path that leaves the treatment via an incoming edge.

        An empty result means the treatment -> outcome effect passes the
        backdoor criterion under this adjustment set.
        """
        self._require(treatment)
        self._require(outcome)
        cond = frozenset(conditioning)
        for v in cond:
            self._require(v)
        if treatment == outcome:
            raise ValueError("treatment and outcome must differ")

        paths: list[list[str]] = []

        def extend(path: list[str], on_path: set[str]) -> None:
            tail = path[-1]
            if tail == outcome:
                if self._path_is_open(path, cond):
                    paths.append(list(path))
                return
            for nxt in sorted(self._parents[tail] | self._children[tail]):
                if nxt in on_path or nxt == treatment:
                    continue
                path.append(nxt)
                on_path.add(nxt)
                extend(path, on_path)
                on_path.remove(nxt)
                path.pop()

        for parent in sorted(self._parents[treatment]):
            if parent == outcome:
                path = [treatment, parent]
                if self._path_is_open(path, cond):
                    paths.append(path)
                continue
            extend([treatment, parent], {treatment, parent})
        return paths


def check_admissible(dag: CausalDag, conditioning: Iterable[str]) -> None:
    """Reject conditioning sets that include latent nodes (they are unobservable)."""
    hidden = set(conditioning) & set(dag.latent)
    if hidden:
        raise ValueError(f"cannot condition on latent node(s): {sorted(hidden)}")


def format_path(dag: CausalDag, path: Sequence[str]) -> str:
    """Render a path with edge arrows, e.g. "Yj_t1 <- Xj -> Aij <- Xi -> Yi_t"."""
    parts = [path[0]]
    for a, b in zip(path, path[1:]):
        arrow = "->" if dag.has_edge(a, b) else "<-"
        parts.append(f"{arrow} {b}")
    return " ".join(parts)


# -- two-individual templates ----------------------------------------------
#
# Node vocabulary: Xi/Xj traits, Zi/Zj observed proxies, Aij the i-names-j
# tie, Yi_t / Yi_t1 / Yi_t2 the outcome of i at times t, t-1, t-2.

def _dyad_base(time_slices: int) -> list[tuple[str, str]]:
    """Tie formation from traits plus each individual's own outcome chain."""
    edges = [("Xi", "Aij"), ("Xj", "Aij")]
    suffixes = ["_t2", "_t1", "_t"][-(time_slices):]
    for who in ("i", "j"):
        ys = [f"Y{who}{s}" for s in suffixes]
        for a, b in zip(ys, ys[1:]):
            edges.append((a, b))
    return edges


def _trait_outcome_edges(time_slices: int) -> list[tuple[str, str]]:
    suffixes = ["_t2", "_t1", "_t"][-(time_slices):]
    return [(f"X{who}", f"Y{who}{s}") for who in ("i", "j") for s in suffixes]


def _build_fig1() -> CausalDag:
    edges = _dyad_base(2) + _trait_outcome_edges(2)
    edges += [("Xi", "Zi"), ("Xj", "Zj")]
    edges += [("Yj_t1", "Yi_t")]  # cross-individual influence along the tie
    return CausalDag(edges, latent={"Xi", "Xj"})


def _build_fig3a() -> CausalDag:
    # observed Z carries the whole trait -> outcome effect
    edges = _dyad_base(2)
    edges += [("Xi", "Zi"), ("Xj", "Zj")]
    edges += [(f"Z{w}", f"Y{w}{s}") for w in ("i", "j") for s in ("_t1", "_t")]
    edges += [("Yj_t1", "Yi_t")]
    return CausalDag(edges, latent={"Xi", "Xj"})


def _build_fig3b() -> CausalDag:
    # observed Z carries the whole trait -> tie effect
    edges = [e for e in _dyad_base(2) if e not in (("Xi", "Aij"), ("Xj", "Aij"))]
    edges += _trait_outcome_edges(2)
    edges += [("Xi", "Zi"), ("Xj", "Zj"), ("Zi", "Aij"), ("Zj", "Aij")]
    edges += [("Yj_t1", "Yi_t")]
    return CausalDag(edges, latent={"Xi", "Xj"})


def _build_fig4() -> CausalDag:
    # the asymmetry simulation: three time slices, no cross-individual edges
    edges = _dyad_base(3) + _trait_outcome_edges(3)
    return CausalDag(edges, latent={"Xi", "Xj"})


def _build_fig5() -> CausalDag:
    # the copying dynamic: traits drive ties only, choices diffuse both ways
    edges = _dyad_base(2)
    edges += [("Aij", "Yi_t"), ("Aij", "Yj_t")]
    edges += [("Yj_t1", "Yi_t"), ("Yi_t1", "Yj_t")]
    return CausalDag(edges, latent=set())


_TEMPLATES = {
    "fig1": _build_fig1,
    "fig3a": _build_fig3a,
    "fig3b": _build_fig3b,
    "fig4": _build_fig4,
    "fig5": _build_fig5,
}

TEMPLATE_NAMES = tuple(sorted(_TEMPLATES))


def build_template(name: str) -> CausalDag:
    """One of the committed two-individual graphs; see TEMPLATE_NAMES."""
    try:
        builder = _TEMPLATES[name]
    except KeyError:
        raise KeyError(
            f"unknown template {name!r}; choose from {', '.join(TEMPLATE_NAMES)}"
        ) from None
    return builder()


# -- text format -------------------------------------------------------------

def format_dag_text(dag: CausalDag) -> str:
    """One "src -> dst" line per edge plus a "latent:" node list."""
    lines = [f"{a} -> {b}" for a, b in dag.edges]
    if dag.latent:
        lines.append("latent: " + ", ".join(sorted(dag.latent)))
    return "\n".join(lines) + "\n"


def parse_dag_text(text: str) -> CausalDag:
    edges: list[tuple[str, str]] = []
    latent: set[str] = set()
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.lower().startswith("latent:"):
            names = line.split(":", 1)[1]
            latent |= {v.strip() for v in names.split(",") if v.strip()}
            continue
        if "->" not in line:
            raise ValueError(f"malformed dag line: {raw!r}")
        a, b = (part.strip() for part in line.split("->", 1))
        if not a or not b:
            raise ValueError(f"malformed dag line: {raw!r}")
        edges.append((a, b))
    return CausalDag(edges, latent=latent)


def read_dag_file(path: str | Path) -> CausalDag:
    return parse_dag_text(Path(path).read_text())


def write_dag_file(dag: CausalDag, path: str | Path) -> None:
    Path(path).write_text(format_dag_text(dag))
