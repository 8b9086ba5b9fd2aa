"""Trajectory container: an ordered chain of activities plus composition ops.

A trajectory is built fluently and stays inert until an environment binds a
deep copy of it; the bound copy gets its ``next`` pointers linked and is what
arrivals actually walk.  Indexing, slicing, joining and replacement all work
on deep copies, so composed trajectories never share activity state.
"""

from __future__ import annotations

import copy
import itertools

from .errors import ModelError

#: Sentinel verdicts returned by Activity.execute (besides a float delay).
BLOCK = object()    # arrival parks; something else will reschedule it
ENQUEUE = object()  # arrival entered a resource queue
DISPOSED = object()  # arrival is gone; stop processing this event
SELF_SCHEDULED = object()  # activity arranged the continuation itself

# frame kinds on an arrival's return stack
FRAME_RESUME = 0   # resume at payload node when the current chain ends
FRAME_END = 1      # chain ends here; payload is the finished flag
FRAME_HANDLER = 2  # like RESUME, but also closes the active signal handler

_PRINT_WIDTH = 12


class Activity:
    """One node of a trajectory.

    ``execute`` returns a non-negative delay, or one of the sentinels BLOCK,
    ENQUEUE, DISPOSED.  ``priority`` is the event rank used when an arrival is
    scheduled to execute this node; release and manager-flavoured activities
    override it so the simultaneous-event ladder holds.
    """

    tag = "Activity"
    priority = 1  # PRIORITY_GENERAL; avoid import cycle with core

    def __init__(self) -> None:
        self.next: Activity | None = None

    def execute(self, arrival):
        raise NotImplementedError

    def subtrajectories(self):
        """Sub-trajectories owned by this node, for binding and printing."""
        return ()

    def param_text(self) -> str:
        return ""

    def __repr__(self) -> str:
        return f"{{ Activity: {self.tag:<{_PRINT_WIDTH}} | {self.param_text()} }}"


def param_value(p):
    """Evaluate a dynamical parameter: callables are thunks, rest constants."""
    return p() if callable(p) else p


def render_param(p) -> str:
    if callable(p):
        return "0x%x" % id(p)
    if isinstance(p, float):
        return "%g" % p
    if isinstance(p, bool):
        return "TRUE" if p else "FALSE"
    return str(p)


class Trajectory:
    """An ordered list of activities with R-style composition operators."""

    def __init__(self, name: str = "anonymous"):
        self.name = name
        self.nodes: list[Activity] = []

    # -- composition -----------------------------------------------------

    def append(self, node: Activity) -> "Trajectory":
        self.nodes.append(node)
        return self

    def __len__(self) -> int:
        return len(self.nodes)

    def __getitem__(self, key) -> "Trajectory":
        """Subsetting returns a standalone deep copy, never a view."""
        if isinstance(key, int):
            picked = [self.nodes[key]]
        elif isinstance(key, slice):
            picked = self.nodes[key]
        else:
            picked = [self.nodes[i] for i in key]
        out = Trajectory(self.name)
        out.nodes = copy.deepcopy(picked)
        return out

    def __setitem__(self, index: int, value) -> None:
        """Replace one slot with a (deep copy of a) single activity."""
        if isinstance(value, Trajectory):
            if len(value) != 1:
                raise ModelError("replacement trajectory must hold exactly one activity")
            node = value.nodes[0]
        elif isinstance(value, Activity):
            node = value
        else:
            raise ModelError("can only assign an activity or a one-activity trajectory")
        self.nodes[index] = copy.deepcopy(node)

    def __repr__(self) -> str:
        lines = [f"trajectory: {self.name}, {len(self.nodes)} activities"]
        for node in self.nodes:
            lines.append(repr(node))
            for sub in node.subtrajectories():
                for subline in repr(sub).splitlines()[1:]:
                    lines.append("  " + subline)
        return "\n".join(lines)

    # -- fluent builder methods (populated by activities.py) -------------
    # They are attached at import time so that this module stays free of the
    # concrete activity definitions.


def join(*trajectories: Trajectory) -> Trajectory:
    """Concatenate trajectories into a new one (deep copies throughout)."""
    out = Trajectory(trajectories[0].name if trajectories else "anonymous")
    for t in trajectories:
        out.nodes.extend(copy.deepcopy(t.nodes))
    return out


# -- binding ------------------------------------------------------------


class BoundTrajectory:
    """A deep copy of a trajectory wired for execution inside one environment."""

    __slots__ = ("name", "head", "nodes", "needs_history")

    def __init__(self, trajectory: Trajectory):
        src = copy.deepcopy(trajectory)
        self.name = src.name
        self.nodes = src.nodes
        _link(self.nodes)
        self.head: Activity | None = self.nodes[0] if self.nodes else None
        self.needs_history = any(n.tag == "Rollback" for n in _walk(self.nodes))

    def resource_names(self):
        for node in _walk(self.nodes):
            getter = getattr(node, "static_resource_names", None)
            if getter is not None:
                yield from getter()


def _link(nodes: list[Activity]) -> None:
    for a, b in itertools.pairwise(nodes):
        a.next = b
    if nodes:
        nodes[-1].next = None
    for node in nodes:
        for sub in node.subtrajectories():
            _link(sub.nodes)


def _walk(nodes):
    for node in nodes:
        yield node
        for sub in node.subtrajectories():
            yield from _walk(sub.nodes)
