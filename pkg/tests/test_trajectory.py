import pytest

from trajsim import ModelError, Trajectory, join
from trajsim.trajectory import BoundTrajectory


def build():
    return (Trajectory("demo")
            .seize("server", 1)
            .timeout(2.5)
            .release("server", 1))


def test_builders_chain_and_count():
    traj = build()
    assert len(traj) == 3
    assert traj.name == "demo"


def test_print_shows_one_line_per_activity():
    text = repr(build())
    lines = text.splitlines()
    assert lines[0] == "trajectory: demo, 3 activities"
    assert lines[1].startswith("{ Activity: Seize")
    assert lines[2].startswith("{ Activity: Timeout")
    assert lines[3].startswith("{ Activity: Release")
    assert all(line.endswith("}") for line in lines[1:])


def test_print_renders_constant_and_thunk_parameters():
    traj = Trajectory().timeout(2.5)
    assert "delay: 2.5" in repr(traj)
    thunk = lambda: 1.0
    traj2 = Trajectory().timeout(thunk)
    assert ("0x%x" % id(thunk)) in repr(traj2)


def test_print_indents_subtrajectories():
    sub = Trajectory().log("inner")
    traj = Trajectory().seize("server", 1, post_seize=sub)
    lines = repr(traj).splitlines()
    assert lines[1].startswith("{ Activity: Seize")
    assert lines[2].startswith("  { Activity: Log")


def test_subset_single_index_and_slice():
    traj = build()
    only = traj[1]
    assert len(only) == 1
    assert only.nodes[0].tag == "Timeout"
    tail = traj[1:]
    assert [n.tag for n in tail.nodes] == ["Timeout", "Release"]
    picked = traj[[0, 2]]
    assert [n.tag for n in picked.nodes] == ["Seize", "Release"]


def test_subset_is_a_deep_copy():
    traj = build()
    part = traj[1]
    part.nodes[0].delay = 99.0
    assert traj.nodes[1].delay == 2.5


def test_replacement_deep_copies_the_new_activity():
    traj = build()
    donor = Trajectory().timeout(7.0)
    traj[1] = donor
    assert traj.nodes[1].delay == 7.0
    donor.nodes[0].delay = 1.0
    assert traj.nodes[1].delay == 7.0


def test_replacement_rejects_multi_activity_trajectory():
    traj = build()
    with pytest.raises(ModelError):
        traj[0] = Trajectory().log("a").log("b")


def test_join_concatenates_copies():
    a = Trajectory("a").log("one")
    b = Trajectory("b").timeout(1.0)
    joined = join(a, b)
    assert [n.tag for n in joined.nodes] == ["Log", "Timeout"]
    joined.nodes[1].delay = 5.0
    assert b.nodes[0].delay == 1.0


def test_binding_links_nodes_and_leaves_source_inert():
    traj = build()
    bound = BoundTrajectory(traj)
    assert bound.head is bound.nodes[0]
    assert bound.nodes[0].next is bound.nodes[1]
    assert bound.nodes[2].next is None
    # the source trajectory still has unlinked nodes
    assert traj.nodes[0].next is None


def test_binding_links_subtrajectories():
    sub = Trajectory().log("x").timeout(1.0)
    traj = Trajectory().seize("server", 1, post_seize=sub).release("server", 1)
    bound = BoundTrajectory(traj)
    inner = bound.nodes[0].post_seize.nodes
    assert inner[0].next is inner[1]
    assert inner[1].next is None


def test_needs_history_flag_tracks_rollback_anywhere():
    assert BoundTrajectory(build()).needs_history is False
    traj = Trajectory().log("x").rollback(1)
    assert BoundTrajectory(traj).needs_history is True
    nested = Trajectory().branch(lambda: 1, True, Trajectory().rollback(1))
    assert BoundTrajectory(nested).needs_history is True


def test_resource_names_found_recursively():
    sub = Trajectory().seize("inner_res", 1)
    traj = Trajectory().seize("outer_res", 1, post_seize=sub)
    names = set(BoundTrajectory(traj).resource_names())
    assert names == {"outer_res", "inner_res"}
