"""Open dynamical systems and the four composition algebras.

A :class:`Machine` is a directed open system (inputs drive dynamics, a
state-only readout feeds other systems); a :class:`ResourceSharer` is an
undirected one (ports expose state variables to be identified).  Both come
in a continuous flavor, where ``dynamics`` is a vector field, and a discrete
one, where it is the next-state map.

Composites are closures over the diagram and the component systems: merged
directed wires sum, wireless in-ports read exactly 0.0, and undirected
composition glues states by a pushout.  Explicit Euler discretization
commutes with both compositions, which the test suite exercises as the
central oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np

from .errors import ArityError, KindError, SizeMismatchError
from .finset import FinFunction, compose, pullback_vec, pushforward_vec, pushout
from .wiring import CPGraph, DWDiagram, UWDiagram

__all__ = [
    "Kind",
    "Machine",
    "ResourceSharer",
    "eval_dynamics",
    "eval_readout",
    "oapply_directed",
    "oapply_undirected",
    "oapply_undirected_with_layout",
    "UndirectedLayout",
    "oapply_cpg",
    "euler_directed",
    "euler_undirected",
]

Kind = Literal["continuous", "discrete"]

Dynamics = Callable[[np.ndarray, np.ndarray], np.ndarray]
Readout = Callable[[np.ndarray], np.ndarray]
SharerDynamics = Callable[[np.ndarray], np.ndarray]


def _as_vector(x: Sequence[float] | np.ndarray, n: int, what: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape != (n,):
        raise SizeMismatchError(f"{what} has shape {arr.shape}, expected ({n},)")
    return arr


@dataclass(frozen=True)
class Machine:
    """A directed open system with ``n_states`` state variables.

    ``dynamics(inputs, state)`` returns a state-sized vector, read as the
    derivative (continuous) or the next state (discrete); ``readout(state)``
    returns the output vector and may depend on state only.
    """

    n_inputs: int
    n_states: int
    n_outputs: int
    dynamics: Dynamics
    readout: Readout
    kind: Kind


@dataclass(frozen=True)
class ResourceSharer:
    """An undirected open system: ports expose state variables via ``portmap``."""

    n_ports: int
    n_states: int
    portmap: FinFunction
    dynamics: SharerDynamics
    kind: Kind

    def __post_init__(self) -> None:
        if self.portmap.dom_size != self.n_ports or self.portmap.cod_size != self.n_states:
            raise SizeMismatchError(
                f"portmap is {self.portmap.dom_size}->{self.portmap.cod_size}, "
                f"expected {self.n_ports}->{self.n_states}"
            )


def eval_dynamics(
    m: Machine, inputs: Sequence[float] | np.ndarray, state: Sequence[float] | np.ndarray
) -> np.ndarray:
    """Evaluate ``m.dynamics`` with size checks on arguments and result."""
    a = _as_vector(inputs, m.n_inputs, "input vector")
    x = _as_vector(state, m.n_states, "state vector")
    return _as_vector(m.dynamics(a, x), m.n_states, "dynamics result")


def eval_readout(m: Machine, state: Sequence[float] | np.ndarray) -> np.ndarray:
    x = _as_vector(state, m.n_states, "state vector")
    return _as_vector(m.readout(x), m.n_outputs, "readout result")


def eval_sharer(s: ResourceSharer, state: Sequence[float] | np.ndarray) -> np.ndarray:
    x = _as_vector(state, s.n_states, "state vector")
    return _as_vector(s.dynamics(x), s.n_states, "dynamics result")


def _common_kind(kinds: list[Kind], what: str) -> Kind:
    distinct = set(kinds)
    if len(distinct) > 1:
        raise KindError(f"cannot compose mixed kinds {sorted(distinct)} of {what}")
    return kinds[0] if kinds else "continuous"


def oapply_directed(d: DWDiagram, machines: Sequence[Machine]) -> Machine:
    """Compose machines over a directed wiring diagram.

    Evaluation order per step: all readouts first (they depend on state
    only), then all in-port sums, then all dynamics; feedback loops resolve
    in one pass.  An in-port fed by several wires receives the sum; one fed
    by none receives 0.0.
    """
    if len(machines) != d.n_boxes:
        raise ArityError(f"diagram has {d.n_boxes} boxes but {len(machines)} machines were given")
    for i, (m, (n_in, n_out)) in enumerate(zip(machines, d.signature)):
        if (m.n_inputs, m.n_outputs) != (n_in, n_out):
            raise ArityError(
                f"box {i} expects (in, out) = ({n_in}, {n_out}), "
                f"machine has ({m.n_inputs}, {m.n_outputs})"
            )
    kind = _common_kind([m.kind for m in machines], "machines")

    n_pin = d.data.card["P_in"]
    n_pout = d.data.card["P_out"]
    in_idx = [np.asarray(ports, dtype=np.intp) for ports in d.in_ports]
    out_idx = [np.asarray(ports, dtype=np.intp) for ports in d.out_ports]
    offs = np.cumsum([0] + [m.n_states for m in machines])
    n_states = int(offs[-1])

    src = d.data.part_fn("src")
    tgt = d.data.part_fn("tgt")
    src_in = d.data.part_fn("src_in")
    tgt_in = d.data.part_fn("tgt_in")
    src_out = d.data.part_fn("src_out")
    tgt_out = d.data.part_fn("tgt_out")
    ms = list(machines)

    def all_readouts(x: np.ndarray) -> np.ndarray:
        o = np.empty(n_pout, dtype=np.float64)
        for i, m in enumerate(ms):
            o[out_idx[i]] = _as_vector(
                m.readout(x[offs[i] : offs[i + 1]]), m.n_outputs, f"readout of box {i}"
            )
        return o

    def in_port_values(a: np.ndarray, o: np.ndarray) -> np.ndarray:
        vals = pushforward_vec(tgt, pullback_vec(src, o))
        vals += pushforward_vec(tgt_in, pullback_vec(src_in, a))
        return vals

    def dynamics(a: np.ndarray, x: np.ndarray) -> np.ndarray:
        a = _as_vector(a, d.n_outer_in, "input vector")
        x = _as_vector(x, n_states, "state vector")
        feed = in_port_values(a, all_readouts(x))
        out = np.empty(n_states, dtype=np.float64)
        for i, m in enumerate(ms):
            out[offs[i] : offs[i + 1]] = _as_vector(
                m.dynamics(feed[in_idx[i]], x[offs[i] : offs[i + 1]]),
                m.n_states,
                f"dynamics of box {i}",
            )
        return out

    def readout(x: np.ndarray) -> np.ndarray:
        x = _as_vector(x, n_states, "state vector")
        return pushforward_vec(tgt_out, pullback_vec(src_out, all_readouts(x)))

    return Machine(d.n_outer_in, n_states, d.n_outer_out, dynamics, readout, kind)


@dataclass(frozen=True)
class UndirectedLayout:
    """How component states and junctions land in a composite's state space.

    ``state_injection`` maps the concatenated component states into the
    composite states; ``junction_injection`` maps diagram junctions there.
    """

    state_injection: FinFunction
    junction_injection: FinFunction


def oapply_undirected_with_layout(
    d: UWDiagram, sharers: Sequence[ResourceSharer]
) -> tuple[ResourceSharer, UndirectedLayout]:
    """Compose resource sharers over an undirected diagram, with provenance.

    States mapped to a common junction are glued by the pushout of the total
    portmap against the port-junction assignment.  A junction attached to no
    port contributes an inert extra state.
    """
    if len(sharers) != d.n_boxes:
        raise ArityError(f"diagram has {d.n_boxes} boxes but {len(sharers)} sharers were given")
    for i, (s, want) in enumerate(zip(sharers, d.port_counts)):
        if s.n_ports != want:
            raise ArityError(f"box {i} expects {want} ports, sharer has {s.n_ports}")
    kind = _common_kind([s.kind for s in sharers], "sharers")

    offs = np.cumsum([0] + [s.n_states for s in sharers])
    n_states_total = int(offs[-1])
    # Total portmap over the diagram's global port order.
    total_map = [0] * len(d.data.parts["box"])
    for i, ports in enumerate(d.box_ports):
        s = sharers[i]
        for slot, port in enumerate(ports):
            total_map[port] = int(offs[i]) + s.portmap.map[slot]
    p_total = FinFunction(len(total_map), n_states_total, tuple(total_map))
    q_junc = d.data.part_fn("junc_in")

    po = pushout(p_total, q_junc)
    state_inj, junc_inj = po.inj_left, po.inj_right
    n_states = po.apex_size
    ss = list(sharers)

    def block_dynamics(y: np.ndarray) -> np.ndarray:
        out = np.empty(n_states_total, dtype=np.float64)
        for i, s in enumerate(ss):
            out[offs[i] : offs[i + 1]] = _as_vector(
                s.dynamics(y[offs[i] : offs[i + 1]]), s.n_states, f"dynamics of box {i}"
            )
        return out

    if kind == "continuous":

        def dynamics(x: np.ndarray) -> np.ndarray:
            x = _as_vector(x, n_states, "state vector")
            y = pullback_vec(state_inj, x)
            return pushforward_vec(state_inj, block_dynamics(y))

    else:

        def dynamics(x: np.ndarray) -> np.ndarray:
            x = _as_vector(x, n_states, "state vector")
            y = pullback_vec(state_inj, x)
            return x + pushforward_vec(state_inj, block_dynamics(y) - y)

    portmap = compose(d.data.part_fn("junc_out"), junc_inj)
    sharer = ResourceSharer(d.n_outer, n_states, portmap, dynamics, kind)
    return sharer, UndirectedLayout(state_inj, junc_inj)


def oapply_undirected(d: UWDiagram, sharers: Sequence[ResourceSharer]) -> ResourceSharer:
    """Compose resource sharers over an undirected diagram."""
    return oapply_undirected_with_layout(d, sharers)[0]


def oapply_cpg(g: CPGraph, machines: Sequence[Machine]) -> Machine:
    """Compose machines over a circular port graph.

    Behaviorally equal to ``oapply_directed(cpg_to_dwd(g), machines)`` but
    skips port duplication and routes neighbor exchange directly.
    """
    if len(machines) != g.n_boxes:
        raise ArityError(f"diagram has {g.n_boxes} boxes but {len(machines)} machines were given")
    for i, (m, want) in enumerate(zip(machines, g.port_counts)):
        if (m.n_inputs, m.n_outputs) != (want, want):
            raise ArityError(
                f"box {i} expects {want} inputs and outputs, "
                f"machine has ({m.n_inputs}, {m.n_outputs})"
            )
    kind = _common_kind([m.kind for m in machines], "machines")

    n_ports = len(g.data.parts["box"])
    port_idx = [np.asarray(ports, dtype=np.intp) for ports in g.box_ports]
    offs = np.cumsum([0] + [m.n_states for m in machines])
    n_states = int(offs[-1])
    src = np.asarray(g.data.parts["src"], dtype=np.intp)
    tgt = np.asarray(g.data.parts["tgt"], dtype=np.intp)
    expose = np.asarray(g.data.parts["expose"], dtype=np.intp)
    ms = list(machines)

    def all_readouts(x: np.ndarray) -> np.ndarray:
        o = np.empty(n_ports, dtype=np.float64)
        for i, m in enumerate(ms):
            o[port_idx[i]] = _as_vector(
                m.readout(x[offs[i] : offs[i + 1]]), m.n_outputs, f"readout of box {i}"
            )
        return o

    def dynamics(a: np.ndarray, x: np.ndarray) -> np.ndarray:
        a = _as_vector(a, g.n_outer, "input vector")
        x = _as_vector(x, n_states, "state vector")
        o = all_readouts(x)
        feed = np.zeros(n_ports, dtype=np.float64)
        np.add.at(feed, tgt, o[src])
        np.add.at(feed, expose, a)
        out = np.empty(n_states, dtype=np.float64)
        for i, m in enumerate(ms):
            out[offs[i] : offs[i + 1]] = _as_vector(
                m.dynamics(feed[port_idx[i]], x[offs[i] : offs[i + 1]]),
                m.n_states,
                f"dynamics of box {i}",
            )
        return out

    def readout(x: np.ndarray) -> np.ndarray:
        x = _as_vector(x, n_states, "state vector")
        return all_readouts(x)[expose]

    return Machine(g.n_outer, n_states, g.n_outer, dynamics, readout, kind)


def euler_directed(m: Machine, h: float) -> Machine:
    """Explicit Euler step of a continuous machine: ``x + h * u(a, x)``."""
    if m.kind != "continuous":
        raise KindError("euler_directed requires a continuous machine")
    if not h > 0:
        raise ValueError("step size must be positive")
    u = m.dynamics

    def step(a: np.ndarray, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return x + h * np.asarray(u(a, x), dtype=np.float64)

    return Machine(m.n_inputs, m.n_states, m.n_outputs, step, m.readout, "discrete")


def euler_undirected(s: ResourceSharer, h: float) -> ResourceSharer:
    """Explicit Euler step of a continuous sharer: ``x + h * v(x)``."""
    if s.kind != "continuous":
        raise KindError("euler_undirected requires a continuous sharer")
    if not h > 0:
        raise ValueError("step size must be positive")
    v = s.dynamics

    def step(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return x + h * np.asarray(v(x), dtype=np.float64)

    return ResourceSharer(s.n_ports, s.n_states, s.portmap, step, "discrete")
