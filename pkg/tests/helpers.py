"""Shared test machinery: random diagrams/systems, oracles, and alignment."""

from __future__ import annotations

import itertools
import random

import numpy as np

from dynwire import (
    CPGraph,
    DWDiagram,
    FinFunction,
    Machine,
    PushoutResult,
    ResourceSharer,
    UndirectedLayout,
    UWDiagram,
)

# ---------------------------------------------------------------------------
# Random diagrams


def shuffled_box_column(rng: random.Random, counts: list[int]) -> list[int]:
    col = [b for b, c in enumerate(counts) for _ in range(c)]
    rng.shuffle(col)
    return col


def random_uwd(
    rng: random.Random,
    n_outer: int | None = None,
    max_boxes: int = 3,
    max_ports: int = 3,
    max_junctions: int = 4,
) -> UWDiagram:
    nb = rng.randint(1, max_boxes)
    counts = [rng.randint(0, max_ports) for _ in range(nb)]
    nj = rng.randint(1, max_junctions)
    box = shuffled_box_column(rng, counts)
    junc_in = [rng.randrange(nj) for _ in box]
    nq = rng.randint(0, 3) if n_outer is None else n_outer
    junc_out = [rng.randrange(nj) for _ in range(nq)]
    return UWDiagram.from_tables(nb, nj, box, junc_in, junc_out)


def random_dwd(
    rng: random.Random,
    n_outer_in: int | None = None,
    n_outer_out: int | None = None,
    max_boxes: int = 3,
    max_ports: int = 3,
) -> DWDiagram:
    nb = rng.randint(1, max_boxes)
    in_counts = [rng.randint(0, max_ports) for _ in range(nb)]
    out_counts = [rng.randint(0, max_ports) for _ in range(nb)]
    box_in = shuffled_box_column(rng, in_counts)
    box_out = shuffled_box_column(rng, out_counts)
    n_pin, n_pout = len(box_in), len(box_out)
    nqi = rng.randint(0, 2) if n_outer_in is None else n_outer_in
    nqo = rng.randint(0, 2) if n_outer_out is None else n_outer_out
    wires = []
    if n_pin and n_pout:
        wires = [
            (rng.randrange(n_pout), rng.randrange(n_pin))
            for _ in range(rng.randint(0, n_pin + 2))
        ]
    in_wires = []
    if n_pin and nqi:
        in_wires = [
            (rng.randrange(nqi), rng.randrange(n_pin)) for _ in range(rng.randint(0, 3))
        ]
    out_wires = []
    if n_pout and nqo:
        out_wires = [
            (rng.randrange(n_pout), rng.randrange(nqo)) for _ in range(rng.randint(0, 3))
        ]
    return DWDiagram.from_tables(nb, box_in, box_out, nqi, nqo, wires, in_wires, out_wires)


def random_cpg(
    rng: random.Random,
    n_outer: int | None = None,
    max_boxes: int = 4,
    max_ports: int = 4,
) -> CPGraph:
    nb = rng.randint(1, max_boxes)
    counts = [rng.randint(0, max_ports) for _ in range(nb)]
    if n_outer and sum(counts) == 0:
        counts[rng.randrange(nb)] = rng.randint(1, max_ports)
    box = shuffled_box_column(rng, counts)
    n_ports = len(box)
    wires = []
    if n_ports:
        wires = [
            (rng.randrange(n_ports), rng.randrange(n_ports))
            for _ in range(rng.randint(0, n_ports))
        ]
    if n_outer is None:
        nq = rng.randint(0, 3) if n_ports else 0
    else:
        nq = n_outer
    expose = [rng.randrange(n_ports) for _ in range(nq)]
    return CPGraph.from_tables(nb, box, wires, expose)


def nested_uwd_case(rng: random.Random, max_outer_boxes: int = 4):
    outer = random_uwd(rng, max_boxes=max_outer_boxes)
    inners = [random_uwd(rng, n_outer=k) for k in outer.port_counts]
    return outer, inners


def nested_dwd_case(rng: random.Random, max_outer_boxes: int = 4):
    outer = random_dwd(rng, max_boxes=max_outer_boxes)
    inners = [random_dwd(rng, n_outer_in=m, n_outer_out=n) for m, n in outer.signature]
    return outer, inners


def nested_cpg_case(rng: random.Random, max_outer_boxes: int = 4):
    outer = random_cpg(rng, max_boxes=max_outer_boxes)
    inners = [random_cpg(rng, n_outer=k) for k in outer.port_counts]
    return outer, inners


# ---------------------------------------------------------------------------
# Random systems (linear, bounded coefficients so trajectories stay tame)


def random_machine(
    nprng: np.random.Generator,
    n_inputs: int,
    n_outputs: int,
    max_states: int = 3,
    kind: str = "continuous",
) -> Machine:
    n = int(nprng.integers(1, max_states + 1))
    A = nprng.uniform(-0.4, 0.4, (n, n))
    B = nprng.uniform(-0.4, 0.4, (n, n_inputs))
    c = nprng.uniform(-0.2, 0.2, n)
    R = nprng.uniform(-0.8, 0.8, (n_outputs, n))

    def dynamics(a: np.ndarray, x: np.ndarray) -> np.ndarray:
        return A @ x + B @ a + c

    def readout(x: np.ndarray) -> np.ndarray:
        return R @ x

    return Machine(n_inputs, n, n_outputs, dynamics, readout, kind)


def random_sharer(
    nprng: np.random.Generator, n_ports: int, max_states: int = 3, kind: str = "continuous"
) -> ResourceSharer:
    n = int(nprng.integers(1, max_states + 1))
    A = nprng.uniform(-0.4, 0.4, (n, n))
    c = nprng.uniform(-0.2, 0.2, n)
    portmap = FinFunction(n_ports, n, tuple(int(v) for v in nprng.integers(0, n, n_ports)))

    def dynamics(x: np.ndarray) -> np.ndarray:
        return A @ x + c

    return ResourceSharer(n_ports, n, portmap, dynamics, kind)


# ---------------------------------------------------------------------------
# Alignment of undirected composite state spaces.
#
# Composite states are pushout classes, so two equivalent composites may
# number them differently.  Classes containing component states align via
# the state injections; junction-only classes are dynamically inert and are
# paired by their port-attachment pattern.


def compose_state_injections(
    inner_layouts: list[UndirectedLayout], outer_layout: UndirectedLayout
) -> FinFunction:
    """Total state injection of a two-level composite, component states in."""
    offs = [0]
    for layout in inner_layouts:
        offs.append(offs[-1] + layout.state_injection.cod_size)
    entries = []
    for i, layout in enumerate(inner_layouts):
        for local in layout.state_injection.map:
            entries.append(outer_layout.state_injection.map[offs[i] + local])
    return FinFunction(len(entries), outer_layout.state_injection.cod_size, tuple(entries))


def align_undirected_states(
    inj_left: FinFunction,
    portmap_left: FinFunction,
    inj_right: FinFunction,
    portmap_right: FinFunction,
) -> list[int]:
    """Permutation pi with pi[left class] = right class; asserts consistency."""
    assert inj_left.dom_size == inj_right.dom_size
    assert inj_left.cod_size == inj_right.cod_size
    n = inj_left.cod_size
    pi = [-1] * n
    for s in range(inj_left.dom_size):
        l, r = inj_left.map[s], inj_right.map[s]
        assert pi[l] in (-1, r), "state injections are inconsistent"
        pi[l] = r
    left_over = [c for c in range(n) if pi[c] == -1]
    used = {r for r in pi if r != -1}
    right_over = [c for c in range(n) if c not in used]
    assert len(left_over) == len(right_over)

    def pattern(portmap: FinFunction, c: int) -> tuple[int, ...]:
        return tuple(q for q in range(portmap.dom_size) if portmap.map[q] == c)

    left_sorted = sorted(left_over, key=lambda c: (pattern(portmap_left, c), c))
    right_sorted = sorted(right_over, key=lambda c: (pattern(portmap_right, c), c))
    for l, r in zip(left_sorted, right_sorted):
        assert pattern(portmap_left, l) == pattern(portmap_right, r)
        pi[l] = r
    return pi


# ---------------------------------------------------------------------------
# Brute-force pushout oracle: the computed apex mediates every commuting
# cocone exactly once, checked by enumerating all maps as base-D digit rows.


def all_maps(n_from: int, n_to: int) -> np.ndarray:
    """All maps [0,n_from) -> [0,n_to) as rows of digits; row index encodes
    the map in base ``n_to``."""
    count = n_to**n_from
    idx = np.arange(count, dtype=np.int64)
    cols = [(idx // (n_to**k)) % n_to for k in range(n_from)]
    return np.stack(cols, axis=1) if n_from else np.zeros((count, 0), dtype=np.int64)


def satisfies_universal_property(
    f: FinFunction, g: FinFunction, po: PushoutResult, max_cocone: int = 6
) -> bool:
    a_size, b_size, c_size = f.dom_size, f.cod_size, g.cod_size
    apex = po.apex_size
    inj_b = list(po.inj_left.map)
    inj_c = list(po.inj_right.map)
    for a in range(a_size):
        if inj_b[f.map[a]] != inj_c[g.map[a]]:
            return False
    for d in range(0, max_cocone + 1):
        if d == 0:
            # A cocone into the empty set exists only for empty feet, and the
            # unique mediating map needs an empty apex.
            if b_size == 0 and c_size == 0 and apex != 0:
                return False
            continue
        maps_b = all_maps(b_size, d)
        maps_c = all_maps(c_size, d)
        pow_a = d ** np.arange(a_size, dtype=np.int64)
        enc_u = maps_b[:, list(f.map)] @ pow_a if a_size else np.zeros(len(maps_b), dtype=np.int64)
        enc_v = maps_c[:, list(g.map)] @ pow_a if a_size else np.zeros(len(maps_c), dtype=np.int64)
        ii, jj = np.nonzero(enc_u[:, None] == enc_v[None, :])
        cocone_codes = ii * (d**c_size) + jj

        maps_t = all_maps(apex, d)
        pow_b = d ** np.arange(b_size, dtype=np.int64)
        pow_c = d ** np.arange(c_size, dtype=np.int64)
        code_u = maps_t[:, inj_b] @ pow_b if b_size else np.zeros(len(maps_t), dtype=np.int64)
        code_v = maps_t[:, inj_c] @ pow_c if c_size else np.zeros(len(maps_t), dtype=np.int64)
        m_codes = code_u * (d**c_size) + code_v
        # Exactly-one mediating map == the map-to-cocone assignment is a
        # bijection onto the commuting cocones.
        if len(np.unique(m_codes)) != len(m_codes):
            return False
        if not np.array_equal(np.sort(m_codes), np.sort(cocone_codes)):
            return False
    return True


def _all_map_tables(a: int, b: int) -> list[tuple[int, ...]]:
    if a == 0:
        return [()]
    if b == 0:
        return []
    return list(itertools.product(range(b), repeat=a))


def all_spans(max_size: int = 3):
    """Every span B <- A -> C with all three sizes bounded."""
    for a in range(max_size + 1):
        for b in range(max_size + 1):
            for c in range(max_size + 1):
                for fmap in _all_map_tables(a, b):
                    for gmap in _all_map_tables(a, c):
                        yield FinFunction(a, b, fmap), FinFunction(a, c, gmap)


# ---------------------------------------------------------------------------
# Independent dense 5-point stencil stepper (heat oracle)


def dense_heat_step(x2d: np.ndarray, alpha: float, h: float) -> np.ndarray:
    padded = np.pad(x2d, 1, constant_values=0.0)
    neighbors = (
        padded[:-2, 1:-1] + padded[2:, 1:-1] + padded[1:-1, :-2] + padded[1:-1, 2:]
    )
    return x2d + h * alpha * (neighbors - 4.0 * x2d)


def torus(width: int, height: int) -> CPGraph:
    """A fully wired wrap-around grid: no exposed ports, so no boundary flux."""
    NORTH, EAST, SOUTH, WEST = 0, 1, 2, 3

    def port(x: int, y: int, d: int) -> int:
        return 4 * (y * width + x) + d

    wires = []
    for y in range(height):
        for x in range(width):
            xe, ys = (x + 1) % width, (y + 1) % height
            wires.append((port(x, y, EAST), port(xe, y, WEST)))
            wires.append((port(xe, y, WEST), port(x, y, EAST)))
            wires.append((port(x, y, SOUTH), port(x, ys, NORTH)))
            wires.append((port(x, ys, NORTH), port(x, y, SOUTH)))
    n = width * height
    box = tuple(p // 4 for p in range(4 * n))
    return CPGraph.from_tables(n, box, wires, ())
