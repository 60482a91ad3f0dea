"""Wiring diagram types over the three built-in schemas, with substitution.

Diagrams are validated instance wrappers.  Substitution (``ocompose``)
replaces every box of an outer diagram by an inner diagram whose outer
interface matches that box; junctions are identified by a quotient and wires
are spliced by chaining through the identified interface ports.

Canonical forms make diagram equality decidable: ports are grouped by box,
junctions are renumbered by first use, and wire tables are sorted.  Two
diagrams represent the same term exactly when their canonical forms are
equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .cset import CPG_SCHEMA, DWD_FROM_CPG, DWD_SCHEMA, UWD_SCHEMA, CSetInstance, migrate, validate
from .errors import ArityError, DiagramError, InternalShapeError
from .finset import merge_classes

__all__ = [
    "UWDiagram",
    "DWDiagram",
    "CPGraph",
    "identity_uwd",
    "identity_dwd",
    "identity_cpg",
    "ocompose_uwd",
    "ocompose_dwd",
    "ocompose_cpg",
    "ocompose_uwd_at",
    "ocompose_dwd_at",
    "ocompose_cpg_at",
    "cpg_to_dwd",
    "grid",
    "canonical",
    "to_dot",
]


def _checked(data: CSetInstance, schema_name: str) -> CSetInstance:
    if data.schema.name != schema_name:
        raise DiagramError(f"expected a {schema_name} instance, got {data.schema.name}")
    problems = validate(data)
    if problems:
        raise DiagramError(
            f"invalid {schema_name} instance: " + "; ".join(str(v) for v in problems)
        )
    return data


def _ports_by_box(box_col: tuple[int, ...], n_boxes: int) -> tuple[tuple[int, ...], ...]:
    out: list[list[int]] = [[] for _ in range(n_boxes)]
    for port, b in enumerate(box_col):
        out[b].append(port)
    return tuple(tuple(ports) for ports in out)


@dataclass(frozen=True)
class UWDiagram:
    """An undirected wiring diagram: box ports and outer ports meet junctions."""

    data: CSetInstance

    def __post_init__(self) -> None:
        _checked(self.data, "UWD")

    @classmethod
    def from_tables(
        cls,
        n_boxes: int,
        n_junctions: int,
        box: tuple[int, ...] | list[int],
        junc_in: tuple[int, ...] | list[int],
        junc_out: tuple[int, ...] | list[int],
    ) -> "UWDiagram":
        card = {"B": n_boxes, "P": len(box), "J": n_junctions, "Q": len(junc_out)}
        parts = {"box": tuple(box), "junc_in": tuple(junc_in), "junc_out": tuple(junc_out)}
        return cls(CSetInstance(UWD_SCHEMA, card, parts))

    @property
    def n_boxes(self) -> int:
        return self.data.card["B"]

    @property
    def n_junctions(self) -> int:
        return self.data.card["J"]

    @property
    def n_outer(self) -> int:
        return self.data.card["Q"]

    @cached_property
    def box_ports(self) -> tuple[tuple[int, ...], ...]:
        """Global ports of each box, ascending; position gives the port slot."""
        return _ports_by_box(self.data.parts["box"], self.n_boxes)

    @cached_property
    def port_counts(self) -> tuple[int, ...]:
        return tuple(len(p) for p in self.box_ports)


@dataclass(frozen=True)
class DWDiagram:
    """A directed wiring diagram: wires carry values from out-ports to in-ports."""

    data: CSetInstance

    def __post_init__(self) -> None:
        _checked(self.data, "DWD")

    @classmethod
    def from_tables(
        cls,
        n_boxes: int,
        box_in: tuple[int, ...] | list[int],
        box_out: tuple[int, ...] | list[int],
        n_outer_in: int = 0,
        n_outer_out: int = 0,
        wires: list[tuple[int, int]] | tuple[tuple[int, int], ...] = (),
        in_wires: list[tuple[int, int]] | tuple[tuple[int, int], ...] = (),
        out_wires: list[tuple[int, int]] | tuple[tuple[int, int], ...] = (),
    ) -> "DWDiagram":
        """Build from tables; wires are (src, tgt) pairs of global port indices.

        ``wires`` run out-port to in-port, ``in_wires`` outer-in to in-port,
        ``out_wires`` out-port to outer-out.
        """
        card = {
            "B": n_boxes,
            "P_in": len(box_in),
            "P_out": len(box_out),
            "W": len(wires),
            "W_in": len(in_wires),
            "W_out": len(out_wires),
            "Q_in": n_outer_in,
            "Q_out": n_outer_out,
        }
        parts = {
            "box_in": tuple(box_in),
            "box_out": tuple(box_out),
            "src": tuple(s for s, _ in wires),
            "tgt": tuple(t for _, t in wires),
            "src_in": tuple(s for s, _ in in_wires),
            "tgt_in": tuple(t for _, t in in_wires),
            "src_out": tuple(s for s, _ in out_wires),
            "tgt_out": tuple(t for _, t in out_wires),
        }
        return cls(CSetInstance(DWD_SCHEMA, card, parts))

    @property
    def n_boxes(self) -> int:
        return self.data.card["B"]

    @property
    def n_outer_in(self) -> int:
        return self.data.card["Q_in"]

    @property
    def n_outer_out(self) -> int:
        return self.data.card["Q_out"]

    @cached_property
    def in_ports(self) -> tuple[tuple[int, ...], ...]:
        return _ports_by_box(self.data.parts["box_in"], self.n_boxes)

    @cached_property
    def out_ports(self) -> tuple[tuple[int, ...], ...]:
        return _ports_by_box(self.data.parts["box_out"], self.n_boxes)

    @cached_property
    def signature(self) -> tuple[tuple[int, int], ...]:
        """Per-box (in-port count, out-port count)."""
        return tuple(
            (len(i), len(o)) for i, o in zip(self.in_ports, self.out_ports)
        )


@dataclass(frozen=True)
class CPGraph:
    """A circular port graph: each port is simultaneously an input and output."""

    data: CSetInstance

    def __post_init__(self) -> None:
        _checked(self.data, "CPG")

    @classmethod
    def from_tables(
        cls,
        n_boxes: int,
        box: tuple[int, ...] | list[int],
        wires: list[tuple[int, int]] | tuple[tuple[int, int], ...] = (),
        expose: tuple[int, ...] | list[int] = (),
    ) -> "CPGraph":
        card = {"B": n_boxes, "P": len(box), "W": len(wires), "Q": len(expose)}
        parts = {
            "box": tuple(box),
            "src": tuple(s for s, _ in wires),
            "tgt": tuple(t for _, t in wires),
            "expose": tuple(expose),
        }
        return cls(CSetInstance(CPG_SCHEMA, card, parts))

    @property
    def n_boxes(self) -> int:
        return self.data.card["B"]

    @property
    def n_outer(self) -> int:
        return self.data.card["Q"]

    @cached_property
    def box_ports(self) -> tuple[tuple[int, ...], ...]:
        return _ports_by_box(self.data.parts["box"], self.n_boxes)

    @cached_property
    def port_counts(self) -> tuple[int, ...]:
        return tuple(len(p) for p in self.box_ports)


def identity_uwd(k: int) -> UWDiagram:
    """One box with k ports, each on its own junction, all exposed in order."""
    ident = tuple(range(k))
    return UWDiagram.from_tables(1, k, (0,) * k, ident, ident)


def identity_dwd(m: int, n: int) -> DWDiagram:
    """One box with m in-ports and n out-ports, boundary wires identity, no inner wires."""
    return DWDiagram.from_tables(
        n_boxes=1,
        box_in=(0,) * m,
        box_out=(0,) * n,
        n_outer_in=m,
        n_outer_out=n,
        in_wires=[(k, k) for k in range(m)],
        out_wires=[(k, k) for k in range(n)],
    )


def identity_cpg(k: int) -> CPGraph:
    """One box with k ports, all exposed in order, no wires."""
    return CPGraph.from_tables(1, (0,) * k, (), tuple(range(k)))


def _offsets(sizes: list[int]) -> list[int]:
    out, acc = [], 0
    for s in sizes:
        out.append(acc)
        acc += s
    return out


def _check_uwd_arities(outer: UWDiagram, inners: list[UWDiagram]) -> None:
    if len(inners) != outer.n_boxes:
        raise ArityError(
            f"outer diagram has {outer.n_boxes} boxes but {len(inners)} inner diagrams were given"
        )
    for i, inner in enumerate(inners):
        want, got = outer.port_counts[i], inner.n_outer
        if want != got:
            raise ArityError(f"box {i} expects {want} ports, inner diagram exposes {got}")


def ocompose_uwd(outer: UWDiagram, inners: list[UWDiagram]) -> UWDiagram:
    """Substitute one inner diagram into every box of the outer diagram.

    Junctions are the quotient of (outer junctions ++ all inner junctions) by
    identifying, for each box and port slot, the outer port's junction with
    the junction of the matching inner outer-port.
    """
    _check_uwd_arities(outer, inners)
    j_sizes = [outer.n_junctions] + [d.n_junctions for d in inners]
    j_off = _offsets(j_sizes)
    total_j = sum(j_sizes)

    pairs = []
    junc_in_outer = outer.data.parts["junc_in"]
    for i, inner in enumerate(inners):
        junc_out_inner = inner.data.parts["junc_out"]
        for slot, port in enumerate(outer.box_ports[i]):
            pairs.append((junc_in_outer[port], j_off[i + 1] + junc_out_inner[slot]))
    quot = merge_classes(total_j, pairs)

    box_off = _offsets([d.n_boxes for d in inners])
    box: list[int] = []
    junc_in: list[int] = []
    for i, inner in enumerate(inners):
        box.extend(b + box_off[i] for b in inner.data.parts["box"])
        junc_in.extend(quot.map[j_off[i + 1] + j] for j in inner.data.parts["junc_in"])
    junc_out = [quot.map[j] for j in outer.data.parts["junc_out"]]

    return UWDiagram.from_tables(
        sum(d.n_boxes for d in inners), quot.cod_size, box, junc_in, junc_out
    )


def ocompose_dwd(outer: DWDiagram, inners: list[DWDiagram]) -> DWDiagram:
    """Substitute inner diagrams into a directed diagram by splicing wires.

    Wire segments are chained through the identified interface ports (outer
    box ports are matched slot-by-slot with inner outer-ports); every maximal
    chain contributes one composite wire.  Chains have at most three segments
    by the shape of the schema.
    """
    if len(inners) != outer.n_boxes:
        raise ArityError(
            f"outer diagram has {outer.n_boxes} boxes but {len(inners)} inner diagrams were given"
        )
    for i, inner in enumerate(inners):
        want = outer.signature[i]
        got = (inner.n_outer_in, inner.n_outer_out)
        if want != got:
            raise ArityError(f"box {i} expects signature {want}, inner diagram has {got}")

    pin_off = _offsets([len(d.data.parts["box_in"]) for d in inners])
    pout_off = _offsets([len(d.data.parts["box_out"]) for d in inners])
    box_off = _offsets([d.n_boxes for d in inners])

    # Slot lookup for outer ports: global outer port -> (box, slot).
    in_slot = {p: (i, s) for i, ports in enumerate(outer.in_ports) for s, p in enumerate(ports)}
    out_slot = {p: (i, s) for i, ports in enumerate(outer.out_ports) for s, p in enumerate(ports)}

    od = outer.data.parts
    # Outer wires indexed by the interface port they leave from.
    outer_w_by_src: dict[tuple[int, int], list[int]] = {}
    for w in range(outer.data.card["W"]):
        outer_w_by_src.setdefault(out_slot[od["src"][w]], []).append(w)
    outer_wout_by_src: dict[tuple[int, int], list[int]] = {}
    for w in range(outer.data.card["W_out"]):
        outer_wout_by_src.setdefault(out_slot[od["src_out"][w]], []).append(w)
    # Inner boundary-in wires indexed by the interface slot they enter at.
    inner_win_by_slot: list[dict[int, list[int]]] = []
    for inner in inners:
        by_slot: dict[int, list[int]] = {}
        for w in range(inner.data.card["W_in"]):
            by_slot.setdefault(inner.data.parts["src_in"][w], []).append(w)
        inner_win_by_slot.append(by_slot)

    wires: list[tuple[int, int]] = []
    in_wires: list[tuple[int, int]] = []
    out_wires: list[tuple[int, int]] = []

    def chase_in(i: int, slot: int) -> list[tuple[str, int]]:
        # A chain arriving at box i's in-slot continues through inner i's
        # boundary wires and terminates at inner in-ports.
        inner = inners[i]
        return [
            ("pin", inner.data.parts["tgt_in"][w] + pin_off[i])
            for w in inner_win_by_slot[i].get(slot, ())
        ]

    def chase_out(i: int, slot: int) -> list[tuple[str, int]]:
        # A chain standing at box i's out-slot continues through the outer
        # wires, terminating at inner in-ports or at the composite boundary.
        ends: list[tuple[str, int]] = []
        for w in outer_w_by_src.get((i, slot), ()):
            bi, bslot = in_slot[od["tgt"][w]]
            ends.extend(chase_in(bi, bslot))
        for w in outer_wout_by_src.get((i, slot), ()):
            ends.append(("qout", od["tgt_out"][w]))
        return ends

    # Chains starting at the composite boundary.
    for w in range(outer.data.card["W_in"]):
        i, slot = in_slot[od["tgt_in"][w]]
        for kind, tgt in chase_in(i, slot):
            if kind != "pin":
                raise InternalShapeError(
                    "wire chain runs from an outer in-port to an outer out-port"
                )
            in_wires.append((od["src_in"][w], tgt))
    # Chains starting at an inner out-port.
    for i, inner in enumerate(inners):
        idp = inner.data.parts
        for w in range(inner.data.card["W"]):
            wires.append((idp["src"][w] + pout_off[i], idp["tgt"][w] + pin_off[i]))
        for w in range(inner.data.card["W_out"]):
            source = idp["src_out"][w] + pout_off[i]
            for kind, tgt in chase_out(i, idp["tgt_out"][w]):
                if kind == "pin":
                    wires.append((source, tgt))
                else:
                    out_wires.append((source, tgt))

    box_in: list[int] = []
    box_out: list[int] = []
    for i, inner in enumerate(inners):
        box_in.extend(b + box_off[i] for b in inner.data.parts["box_in"])
        box_out.extend(b + box_off[i] for b in inner.data.parts["box_out"])

    return DWDiagram.from_tables(
        n_boxes=sum(d.n_boxes for d in inners),
        box_in=box_in,
        box_out=box_out,
        n_outer_in=outer.n_outer_in,
        n_outer_out=outer.n_outer_out,
        wires=wires,
        in_wires=in_wires,
        out_wires=out_wires,
    )


def ocompose_cpg(outer: CPGraph, inners: list[CPGraph]) -> CPGraph:
    """Substitute circular port graphs into a circular port graph.

    Outer wire endpoints are box ports, identified slot-by-slot with inner
    outer-ports; each outer wire becomes one wire between the exposed inner
    ports, and inner wires pass through unchanged.
    """
    if len(inners) != outer.n_boxes:
        raise ArityError(
            f"outer diagram has {outer.n_boxes} boxes but {len(inners)} inner diagrams were given"
        )
    for i, inner in enumerate(inners):
        want, got = outer.port_counts[i], inner.n_outer
        if want != got:
            raise ArityError(f"box {i} expects {want} ports, inner diagram exposes {got}")

    p_off = _offsets([len(d.data.parts["box"]) for d in inners])
    box_off = _offsets([d.n_boxes for d in inners])
    slot_of = {p: (i, s) for i, ports in enumerate(outer.box_ports) for s, p in enumerate(ports)}

    def resolve(outer_port: int) -> int:
        # The inner port exposed at an outer box port.
        i, slot = slot_of[outer_port]
        return inners[i].data.parts["expose"][slot] + p_off[i]

    wires: list[tuple[int, int]] = []
    for i, inner in enumerate(inners):
        idp = inner.data.parts
        wires.extend(
            (idp["src"][w] + p_off[i], idp["tgt"][w] + p_off[i])
            for w in range(inner.data.card["W"])
        )
    odp = outer.data.parts
    wires.extend(
        (resolve(odp["src"][w]), resolve(odp["tgt"][w])) for w in range(outer.data.card["W"])
    )

    box: list[int] = []
    for i, inner in enumerate(inners):
        box.extend(b + box_off[i] for b in inner.data.parts["box"])
    expose = tuple(resolve(p) for p in odp["expose"])

    return CPGraph.from_tables(sum(d.n_boxes for d in inners), box, wires, expose)


def ocompose_uwd_at(outer: UWDiagram, i: int, inner: UWDiagram) -> UWDiagram:
    """Single-slot substitution, padding the other boxes with identity diagrams."""
    inners = [identity_uwd(k) for k in outer.port_counts]
    inners[i] = inner
    return ocompose_uwd(outer, inners)


def ocompose_dwd_at(outer: DWDiagram, i: int, inner: DWDiagram) -> DWDiagram:
    inners = [identity_dwd(m, n) for m, n in outer.signature]
    inners[i] = inner
    return ocompose_dwd(outer, inners)


def ocompose_cpg_at(outer: CPGraph, i: int, inner: CPGraph) -> CPGraph:
    inners = [identity_cpg(k) for k in outer.port_counts]
    inners[i] = inner
    return ocompose_cpg(outer, inners)


def cpg_to_dwd(g: CPGraph) -> DWDiagram:
    """Interpret a circular port graph as a directed diagram by duplicating ports."""
    return DWDiagram(migrate(DWD_FROM_CPG, g.data))


def grid(width: int, height: int) -> CPGraph:
    """A width x height grid of 4-port boxes wired to their neighbors.

    Boxes are row-major; ports are ordered North, East, South, West.  Every
    interior adjacency carries one wire in each direction, and every port
    without a wire is exposed by one outer port, ordered by (box, port).
    """
    if width < 1 or height < 1:
        raise ArityError("grid dimensions must be at least 1x1")
    n = width * height
    NORTH, EAST, SOUTH, WEST = 0, 1, 2, 3

    def port(x: int, y: int, d: int) -> int:
        return 4 * (y * width + x) + d

    wires: list[tuple[int, int]] = []
    for y in range(height):
        for x in range(width):
            if x + 1 < width:
                wires.append((port(x, y, EAST), port(x + 1, y, WEST)))
                wires.append((port(x + 1, y, WEST), port(x, y, EAST)))
            if y + 1 < height:
                wires.append((port(x, y, SOUTH), port(x, y + 1, NORTH)))
                wires.append((port(x, y + 1, NORTH), port(x, y, SOUTH)))

    wired = {p for w in wires for p in w}
    expose = tuple(p for p in range(4 * n) if p not in wired)
    box = tuple(p // 4 for p in range(4 * n))
    return CPGraph.from_tables(n, box, wires, expose)


# ---------------------------------------------------------------------------
# Canonical forms


def _port_permutation(box_col: tuple[int, ...]) -> list[int]:
    # old -> new index under a stable sort by box; preserves slot order.
    order = sorted(range(len(box_col)), key=lambda p: (box_col[p], p))
    new_of_old = [0] * len(box_col)
    for new, old in enumerate(order):
        new_of_old[old] = new
    return new_of_old


def _permute_column(col: tuple[int, ...], new_of_old: list[int]) -> list[int]:
    # Reorder a column indexed by ports: out[new] = col[old].
    out = [0] * len(col)
    for old, v in enumerate(col):
        out[new_of_old[old]] = v
    return out


def canonical(d: UWDiagram | DWDiagram | CPGraph):
    """Canonical form: ports grouped by box, junctions renumbered, wires sorted.

    Box order and outer-port order are interface data and stay fixed.
    """
    if isinstance(d, UWDiagram):
        return _canonical_uwd(d)
    if isinstance(d, DWDiagram):
        return _canonical_dwd(d)
    if isinstance(d, CPGraph):
        return _canonical_cpg(d)
    raise TypeError(f"not a diagram: {type(d).__name__}")


def _canonical_uwd(d: UWDiagram) -> UWDiagram:
    parts = d.data.parts
    sigma = _port_permutation(parts["box"])
    box = _permute_column(parts["box"], sigma)
    junc_in = _permute_column(parts["junc_in"], sigma)
    junc_out = list(parts["junc_out"])

    renum: dict[int, int] = {}
    for j in (*junc_in, *junc_out):
        if j not in renum:
            renum[j] = len(renum)
    for j in range(d.n_junctions):
        if j not in renum:
            renum[j] = len(renum)

    return UWDiagram.from_tables(
        d.n_boxes,
        d.n_junctions,
        box,
        [renum[j] for j in junc_in],
        [renum[j] for j in junc_out],
    )


def _canonical_dwd(d: DWDiagram) -> DWDiagram:
    parts = d.data.parts
    sig_in = _port_permutation(parts["box_in"])
    sig_out = _port_permutation(parts["box_out"])
    box_in = _permute_column(parts["box_in"], sig_in)
    box_out = _permute_column(parts["box_out"], sig_out)

    wires = sorted(
        (sig_out[s], sig_in[t]) for s, t in zip(parts["src"], parts["tgt"])
    )
    in_wires = sorted(
        (s, sig_in[t]) for s, t in zip(parts["src_in"], parts["tgt_in"])
    )
    out_wires = sorted(
        (sig_out[s], t) for s, t in zip(parts["src_out"], parts["tgt_out"])
    )
    return DWDiagram.from_tables(
        d.n_boxes,
        box_in,
        box_out,
        d.n_outer_in,
        d.n_outer_out,
        wires,
        in_wires,
        out_wires,
    )


def _canonical_cpg(d: CPGraph) -> CPGraph:
    parts = d.data.parts
    sigma = _port_permutation(parts["box"])
    box = _permute_column(parts["box"], sigma)
    wires = sorted((sigma[s], sigma[t]) for s, t in zip(parts["src"], parts["tgt"]))
    expose = tuple(sigma[p] for p in parts["expose"])
    return CPGraph.from_tables(d.n_boxes, box, wires, expose)


# ---------------------------------------------------------------------------
# DOT export


def to_dot(d: UWDiagram | DWDiagram | CPGraph) -> str:
    """Deterministic Graphviz text for a diagram.

    Boxes are labeled nodes inside an enclosing cluster; junctions are point
    nodes; outer ports sit on the cluster boundary as stub nodes.  Edges are
    undirected for UWD and directed for DWD/CPG.
    """
    if isinstance(d, UWDiagram):
        return _dot_uwd(d)
    if isinstance(d, DWDiagram):
        return _dot_dwd(d)
    if isinstance(d, CPGraph):
        return _dot_cpg(d)
    raise TypeError(f"not a diagram: {type(d).__name__}")


def _dot_uwd(d: UWDiagram) -> str:
    parts = d.data.parts
    lines = ["graph diagram {", "  rankdir=LR;", "  subgraph cluster_body {", "    style=rounded;"]
    for b in range(d.n_boxes):
        lines.append(f'    b{b} [label="b{b}", shape=box];')
    for j in range(d.n_junctions):
        lines.append(f'    j{j} [label="", shape=point];')
    lines.append("  }")
    for q in range(d.n_outer):
        lines.append(f'  q{q} [label="q{q}", shape=plaintext];')
    for p in range(len(parts["box"])):
        lines.append(f"  b{parts['box'][p]} -- j{parts['junc_in'][p]};")
    for q, j in enumerate(parts["junc_out"]):
        lines.append(f"  q{q} -- j{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dwd_slots(box_col: tuple[int, ...], n_boxes: int) -> dict[int, tuple[int, int]]:
    slots = {}
    for i, ports in enumerate(_ports_by_box(box_col, n_boxes)):
        for s, p in enumerate(ports):
            slots[p] = (i, s)
    return slots


def _dot_dwd(d: DWDiagram) -> str:
    parts = d.data.parts
    in_slot = _dwd_slots(parts["box_in"], d.n_boxes)
    out_slot = _dwd_slots(parts["box_out"], d.n_boxes)
    lines = ["digraph diagram {", "  rankdir=LR;", "  subgraph cluster_body {", "    style=rounded;"]
    for b in range(d.n_boxes):
        lines.append(f'    b{b} [label="b{b}", shape=box];')
    lines.append("  }")
    for q in range(d.n_outer_in):
        lines.append(f'  qin{q} [label="in{q}", shape=plaintext];')
    for q in range(d.n_outer_out):
        lines.append(f'  qout{q} [label="out{q}", shape=plaintext];')
    for s, t in zip(parts["src"], parts["tgt"]):
        bs, ss = out_slot[s]
        bt, st = in_slot[t]
        lines.append(f'  b{bs} -> b{bt} [label="o{ss}:i{st}"];')
    for s, t in zip(parts["src_in"], parts["tgt_in"]):
        bt, st = in_slot[t]
        lines.append(f'  qin{s} -> b{bt} [label="i{st}"];')
    for s, t in zip(parts["src_out"], parts["tgt_out"]):
        bs, ss = out_slot[s]
        lines.append(f'  b{bs} -> qout{t} [label="o{ss}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_cpg(d: CPGraph) -> str:
    parts = d.data.parts
    slot = _dwd_slots(parts["box"], d.n_boxes)
    lines = ["digraph diagram {", "  rankdir=LR;", "  subgraph cluster_body {", "    style=rounded;"]
    for b in range(d.n_boxes):
        lines.append(f'    b{b} [label="b{b}", shape=box];')
    lines.append("  }")
    for q in range(d.n_outer):
        lines.append(f'  q{q} [label="q{q}", shape=plaintext];')
    for s, t in zip(parts["src"], parts["tgt"]):
        bs, ss = slot[s]
        bt, st = slot[t]
        lines.append(f'  b{bs} -> b{bt} [label="p{ss}:p{st}"];')
    for q, p in enumerate(parts["expose"]):
        b, s = slot[p]
        lines.append(f'  q{q} -> b{b} [dir=none, style=dashed, label="p{s}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
