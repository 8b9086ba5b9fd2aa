import math

import pytest

from trajsim import (Environment, ModelError, Trajectory, at, constant,
                     get_mon_arrivals, get_mon_attributes)


def traced_env(**kwargs):
    lines = []
    env = Environment(trace=lines.append, **kwargs)
    return env, lines


# -- arrival lifecycle ---------------------------------------------------

def test_arrival_names_use_zero_based_suffix():
    env = Environment(trace=False)
    env.add_generator("walker", Trajectory().timeout(1.0), at(0, 1, 2))
    env.run()
    arr = get_mon_arrivals(env)
    assert sorted(arr["name"]) == ["walker0", "walker1", "walker2"]


def test_lifetime_rows_track_activity_time_and_finished():
    env = Environment(trace=False)
    env.add_generator("w", Trajectory().timeout(3.0), at(2))
    env.run()
    arr = get_mon_arrivals(env)
    row = arr.iloc[0]
    assert row["start_time"] == 2.0
    assert row["end_time"] == 5.0
    assert row["activity_time"] == 3.0
    assert bool(row["finished"]) is True


def test_unfinished_arrival_recorded_at_horizon_end_only_when_disposed():
    # an arrival still walking at the horizon is not a departure record
    env = Environment(trace=False)
    env.add_generator("w", Trajectory().timeout(10.0), at(0))
    env.run(5)
    assert len(get_mon_arrivals(env)) == 0


def test_mon_zero_suppresses_rows():
    env = Environment(trace=False)
    env.add_generator("w", Trajectory().timeout(1.0), at(0), mon=0)
    env.run()
    assert len(get_mon_arrivals(env)) == 0


# -- attributes ----------------------------------------------------------

def test_attributes_local_global_and_fallback():
    env = Environment(trace=False)
    seen = {}

    def probe():
        seen["local"] = env.get_attribute("x")
        seen["global"] = env.get_attribute("g", global_=True)
        seen["fallback"] = env.get_attribute("g")
        seen["missing"] = env.get_attribute("nope")
        return 0.0

    traj = (Trajectory()
            .set_attribute("x", 7)
            .set_attribute("g", 40, global_=True)
            .timeout(probe))
    env.add_generator("w", traj, at(0), mon=2)
    env.run()
    assert seen["local"] == 7.0
    assert seen["global"] == 40.0
    assert seen["fallback"] == 40.0  # local miss falls back to globals
    assert math.isnan(seen["missing"])


def test_attribute_rows_need_mon_level_two():
    env = Environment(trace=False)
    env.add_generator("lo", Trajectory().set_attribute("x", 1), at(0), mon=1)
    env.run()
    assert len(get_mon_attributes(env)) == 0

    env2 = Environment(trace=False)
    env2.add_generator("hi", Trajectory().set_attribute("x", 1), at(0), mon=2)
    env2.run()
    table = get_mon_attributes(env2)
    assert len(table) == 1
    assert table.iloc[0]["name"] == "hi0"
    assert table.iloc[0]["key"] == "x"
    assert table.iloc[0]["value"] == 1.0


def test_global_writes_record_with_empty_name():
    env = Environment(trace=False)
    env.add_generator("w", Trajectory().set_attribute("g", 2, global_=True),
                      at(0), mon=2)
    env.run()
    table = get_mon_attributes(env)
    assert len(table) == 1
    assert table.iloc[0]["name"] == ""
    assert env.get_global("g") == 2.0


def test_attribute_thunk_values():
    env = Environment(trace=False)
    traj = (Trajectory()
            .set_attribute("t", lambda: env.now + 1)
            .timeout(1.0))
    env.add_generator("w", traj, at(3), mon=2)
    env.run()
    assert get_mon_attributes(env).iloc[0]["value"] == 4.0


# -- branch --------------------------------------------------------------

def test_branch_option_picks_subtrajectory():
    env, lines = traced_env()
    traj = (Trajectory()
            .branch(lambda: 2, True,
                    Trajectory().log("one"), Trajectory().log("two"))
            .log("after"))
    env.add_generator("w", traj, at(0))
    env.run()
    assert lines == ["0: w0: two", "0: w0: after"]


def test_branch_option_zero_skips():
    env, lines = traced_env()
    traj = Trajectory().branch(lambda: 0, True, Trajectory().log("one")).log("after")
    env.add_generator("w", traj, at(0))
    env.run()
    assert lines == ["0: w0: after"]


def test_branch_continue_false_ends_arrival_after_sub():
    env, lines = traced_env()
    traj = (Trajectory()
            .branch(lambda: 1, False, Trajectory().log("inner"))
            .log("unreachable"))
    env.add_generator("w", traj, at(0))
    env.run()
    assert lines == ["0: w0: inner"]
    arr = get_mon_arrivals(env)
    assert bool(arr.iloc[0]["finished"]) is True


def test_branch_out_of_range_raises():
    env = Environment(trace=False)
    traj = Trajectory().branch(lambda: 3, True, Trajectory().log("one"))
    env.add_generator("w", traj, at(0))
    with pytest.raises(ModelError):
        env.run()


# -- clone / synchronize -------------------------------------------------

def test_clone_runs_original_first_with_per_copy_subs():
    env, lines = traced_env()
    traj = (Trajectory()
            .clone(3,
                   Trajectory().log("original"),
                   Trajectory().log("first copy"),
                   Trajectory().log("second copy"))
            .log("common"))
    env.add_generator("w", traj, at(0))
    env.run()
    # one activity per event: the original goes first, then the copies,
    # then each continues into the shared tail in the same order
    assert lines == [
        "0: w0: original",
        "0: w0: first copy",
        "0: w0: second copy",
        "0: w0: common",
        "0: w0: common",
        "0: w0: common",
    ]


def test_synchronize_wait_true_lets_last_clone_pass():
    env, lines = traced_env()
    traj = (Trajectory()
            .clone(3)
            .timeout(lambda: env.rng.uniform(0, 1))
            .synchronize(wait=True)
            .log("out"))
    env.add_generator("w", traj, at(0))
    env.run()
    assert lines == [f"{env.now:g}: w0: out"]


def test_synchronize_wait_false_lets_first_clone_pass():
    env, lines = traced_env()
    traj = (Trajectory()
            .clone(2,
                   Trajectory().timeout(1.0),
                   Trajectory().timeout(5.0))
            .synchronize(wait=False)
            .log("winner"))
    env.add_generator("w", traj, at(0))
    env.run()
    assert lines == ["1: w0: winner"]
    # only one departure row despite two clones (discards are silent)
    assert len(get_mon_arrivals(env)) == 1


def test_synchronize_without_clone_is_a_no_op():
    env, lines = traced_env()
    env.add_generator("w", Trajectory().synchronize().log("through"), at(0))
    env.run()
    assert lines == ["0: w0: through"]


def test_nested_clones_use_innermost_group():
    env, lines = traced_env()
    inner = Trajectory().clone(2).synchronize(wait=True).log("inner joined")
    traj = Trajectory().clone(2).timeout(1.0)
    traj.nodes.extend(inner.nodes)
    traj.synchronize(wait=True).log("outer joined")
    env.add_generator("w", traj, at(0))
    env.run()
    assert lines.count("1: w0: inner joined") == 2
    assert lines.count("1: w0: outer joined") == 1


# -- rollback ------------------------------------------------------------

def test_rollback_finite_times():
    env, lines = traced_env()
    traj = Trajectory().log("hello").timeout(1.0).rollback(2, times=2)
    env.add_generator("w", traj, at(0))
    env.run()
    assert lines == ["0: w0: hello", "1: w0: hello", "2: w0: hello"]


def test_rollback_check_overrides_times():
    env, lines = traced_env()
    traj = (Trajectory()
            .set_attribute("n", 0)
            .log("tick")
            .set_attribute("n", lambda: env.get_attribute("n") + 1)
            .rollback(2, check=lambda: env.get_attribute("n") < 3))
    env.add_generator("w", traj, at(0))
    env.run()
    assert lines == ["0: w0: tick"] * 3


def test_rollback_amount_clamps_to_history_start():
    env, lines = traced_env()
    traj = Trajectory().log("first").rollback(99, times=1).log("done")
    env.add_generator("w", traj, at(0))
    env.run()
    assert lines == ["0: w0: first", "0: w0: first", "0: w0: done"]


def test_rollback_keeps_history_bounded_across_iterations():
    # each rollback truncates the executed path back to its target, so a
    # loop running for a long horizon must not accumulate history
    env = Environment(trace=False)
    traj = Trajectory().timeout(1.0).rollback(1)
    env.add_generator("w", traj, at(0), mon=0)
    env.run(500)
    arrival = next(iter(env.engine._index))
    assert len(arrival.history) <= 2


def test_history_limit_caps_tracked_path_length():
    env = Environment(trace=False, history_limit=4)
    traj = (Trajectory()
            .log("a").log("b").log("c").log("d").log("e")
            .rollback(1, times=0))
    env.add_generator("w", traj, at(0), mon=0)
    with pytest.raises(ModelError):
        env.run()


# -- signals -------------------------------------------------------------

def test_send_trap_launches_handler_and_resumes():
    env, lines = traced_env()
    signaler = Trajectory().timeout(2.0).send("ping")
    listener = (Trajectory()
                .trap("ping", handler=Trajectory().log("handled"))
                .timeout(10.0)
                .log("resumed"))
    env.add_generator("sig", signaler, at(0), mon=0)
    env.add_generator("ear", listener, at(0))
    env.run()
    assert lines == ["2: ear0: handled", "2: ear0: resumed"]


def test_trap_without_handler_just_interrupts_current_delay():
    env, lines = traced_env()
    signaler = Trajectory().timeout(2.0).send("go")
    listener = Trajectory().trap("go").timeout(10.0).log("woke")
    env.add_generator("sig", signaler, at(0), mon=0)
    env.add_generator("ear", listener, at(0))
    env.run()
    assert lines == ["2: ear0: woke"]


def test_wait_blocks_until_any_subscribed_signal():
    env, lines = traced_env()
    signaler = Trajectory().timeout(3.0).send("knock")
    listener = Trajectory().trap("knock").wait().log("unblocked")
    env.add_generator("sig", signaler, at(0), mon=0)
    env.add_generator("ear", listener, at(0))
    env.run()
    assert lines == ["3: ear0: unblocked"]


def test_untrap_removes_subscription():
    env, lines = traced_env()
    signaler = Trajectory().timeout(1.0).send("x")
    listener = (Trajectory().trap("x").untrap("x").timeout(5.0).log("slept"))
    env.add_generator("sig", signaler, at(0), mon=0)
    env.add_generator("ear", listener, at(0))
    env.run()
    assert lines == ["5: ear0: slept"]


def test_uninterruptible_handler_ignores_second_signal():
    env, lines = traced_env()
    signaler = Trajectory().timeout(1.0).send("s").timeout(1.0).send("s")
    handler = Trajectory().log("start handler").timeout(5.0).log("end handler")
    listener = (Trajectory()
                .trap("s", handler=handler, interruptible=False)
                .timeout(30.0)
                .log("done"))
    env.add_generator("sig", signaler, at(0), mon=0)
    env.add_generator("ear", listener, at(0))
    env.run()
    assert lines == ["1: ear0: start handler", "6: ear0: end handler",
                     "6: ear0: done"]


def test_interruptible_handler_restarts_on_second_signal():
    env, lines = traced_env()
    signaler = Trajectory().timeout(1.0).send("s").timeout(1.0).send("s")
    handler = Trajectory().log("handler").timeout(5.0)
    listener = (Trajectory()
                .trap("s", handler=handler, interruptible=True)
                .timeout(30.0)
                .log("done"))
    env.add_generator("sig", signaler, at(0), mon=0)
    env.add_generator("ear", listener, at(0))
    env.run()
    assert lines == ["1: ear0: handler", "2: ear0: handler", "7: ear0: done"]


def test_send_broadcasts_to_every_subscriber():
    env, lines = traced_env()
    signaler = Trajectory().timeout(1.0).send("all")
    listener = Trajectory().trap("all").timeout(9.0).log("up")
    env.add_generator("sig", signaler, at(0), mon=0)
    env.add_generator("ear", listener, at(0, 0))
    env.run()
    assert sorted(lines) == ["1: ear0: up", "1: ear1: up"]


def test_send_with_delay_defers_broadcast():
    env, lines = traced_env()
    signaler = Trajectory().send("later", delay=4.0)
    listener = Trajectory().trap("later").wait().log("got it")
    env.add_generator("sig", signaler, at(0), mon=0)
    env.add_generator("ear", listener, at(0))
    env.run()
    assert lines == ["4: ear0: got it"]


def test_queued_arrival_ignores_signals():
    env, lines = traced_env()
    env.add_resource("desk", capacity=1, queue_size=5)
    holder = Trajectory().seize("desk", 1).timeout(10.0).release("desk", 1)
    waiter = (Trajectory()
              .trap("s", handler=Trajectory().log("should not run"))
              .seize("desk", 1)
              .log("served")
              .release("desk", 1))
    signaler = Trajectory().timeout(2.0).send("s")
    env.add_generator("hold", holder, at(0), mon=0)
    env.add_generator("wait", waiter, at(1), mon=0)
    env.add_generator("sig", signaler, at(0), mon=0)
    env.run()
    assert lines == ["10: wait0: served"]


# -- reneging ------------------------------------------------------------

def test_renege_in_fires_out_subtrajectory():
    env, lines = traced_env()
    env.add_resource("clerk", capacity=1)
    traj = (Trajectory()
            .renege_in(2.0, out=Trajectory().log("gave up"))
            .seize("clerk", 1)
            .renege_abort()
            .timeout(10.0)
            .release("clerk", 1)
            .log("served"))
    env.add_generator("cust", traj, at(0, 1))
    env.run()
    assert lines == ["3: cust1: gave up", "10: cust0: served"]


def test_renege_while_in_service_interrupts_and_releases():
    env, lines = traced_env()
    env.add_resource("clerk", capacity=1)
    traj = (Trajectory()
            .renege_in(2.0)
            .seize("clerk", 1)
            .timeout(10.0)
            .release("clerk", 1)
            .log("served"))
    env.add_generator("cust", traj, at(0, 0.5))
    env.run()
    # cust0 reneges mid-service at 2; cust1 then gets the clerk and reneges at 2.5
    assert lines == []
    assert env.get_server_count("clerk") == 0
    arr = get_mon_arrivals(env)
    assert list(arr["finished"]) == [False, False]
    assert list(arr["end_time"]) == [2.0, 2.5]


def test_renege_abort_cancels_timer():
    env, lines = traced_env()
    traj = Trajectory().renege_in(1.0).renege_abort().timeout(5.0).log("alive")
    env.add_generator("w", traj, at(0))
    env.run()
    assert lines == ["5: w0: alive"]


def test_renege_if_signal():
    env, lines = traced_env()
    signaler = Trajectory().timeout(2.0).send("flee")
    traj = (Trajectory()
            .renege_if("flee", out=Trajectory().log("fled"))
            .timeout(10.0)
            .log("stayed"))
    env.add_generator("sig", signaler, at(0), mon=0)
    env.add_generator("w", traj, at(0))
    env.run()
    assert lines == ["2: w0: fled"]


# -- batches -------------------------------------------------------------

def test_batch_collects_n_then_moves_as_one():
    env, lines = traced_env()
    traj = Trajectory().batch(3).log("rolling")
    env.add_generator("w", traj, at(0, 1, 2))
    env.run()
    assert lines == ["2: batch_0: rolling"]


def test_batch_timer_launches_partial_batch():
    env, lines = traced_env()
    traj = Trajectory().batch(10, timeout=4.0).log("go")
    env.add_generator("w", traj, at(0, 1))
    env.run()
    assert lines == ["4: batch_0: go"]


def test_batch_separate_resumes_members():
    env, lines = traced_env()
    traj = (Trajectory()
            .batch(2)
            .timeout(1.0)
            .separate()
            .log("back out"))
    env.add_generator("w", traj, at(0, 0))
    env.run()
    assert sorted(lines) == ["1: w0: back out", "1: w1: back out"]
    arr = get_mon_arrivals(env)
    assert sorted(arr["name"]) == ["w0", "w1"]
    assert list(arr["finished"]) == [True, True]


def test_permanent_batch_ignores_separate():
    env, lines = traced_env()
    traj = (Trajectory()
            .batch(2, permanent=True)
            .separate()
            .log("still batched"))
    env.add_generator("w", traj, at(0, 0))
    env.run()
    assert lines == ["0: batch_0: still batched"]


def test_batch_rule_bypass():
    env, lines = traced_env()
    traj = Trajectory().batch(2, rule=lambda: False).log("solo")
    env.add_generator("w", traj, at(0, 1))
    env.run()
    assert lines == ["0: w0: solo", "1: w1: solo"]


def test_named_batches_are_shared_between_trajectories():
    env, lines = traced_env()
    a = Trajectory().batch(2, name="common").log("joined")
    b = Trajectory().batch(2, name="common")
    env.add_generator("first", a, at(0), mon=0)
    env.add_generator("second", b, at(1), mon=0)
    env.run()
    # the second generator's arrival completes the shared batch; the batch
    # resumes after the node where it was launched
    assert lines == ["1: batch_0: joined"]


def test_batched_arrivals_ignore_renege_timers():
    env, lines = traced_env()
    traj = (Trajectory()
            .renege_in(1.0, out=Trajectory().log("left"))
            .batch(2)
            .timeout(5.0)
            .separate()
            .log("done"))
    env.add_generator("w", traj, at(0, 0))
    env.run()
    assert sorted(lines) == ["5: w0: done", "5: w1: done"]


# -- leave ---------------------------------------------------------------

def test_leave_probability_bounds():
    env, lines = traced_env()
    traj = Trajectory().leave(0.0).log("kept")
    env.add_generator("w", traj, at(0))
    env.run()
    assert lines == ["0: w0: kept"]

    env2, lines2 = traced_env()
    env2.add_generator("w", Trajectory().leave(1.0).log("gone"), at(0))
    env2.run()
    assert lines2 == []
    arr = get_mon_arrivals(env2)
    assert bool(arr.iloc[0]["finished"]) is False


def test_leave_invalid_probability_raises():
    env = Environment(trace=False)
    env.add_generator("w", Trajectory().leave(1.5), at(0))
    with pytest.raises(ModelError):
        env.run()


# -- generators ----------------------------------------------------------

def test_generator_batch_distribution_creates_cumulative_offsets():
    env = Environment(trace=False)
    env.add_generator("w", Trajectory().timeout(0.0),
                      lambda: [1.0, 2.0, 3.0, -1.0])
    env.run()
    arr = get_mon_arrivals(env)
    assert sorted(arr["start_time"]) == [1.0, 3.0, 6.0]


def test_generator_negative_delay_stops_after_prefix():
    env = Environment(trace=False)
    draws = iter([[1.0], [1.0, -1.0], [99.0]])
    env.add_generator("w", Trajectory().timeout(0.0), lambda: next(draws))
    env.run()
    assert env.get_n_generated("w") == 2


def test_generator_counts_created_arrivals():
    env = Environment(trace=False)
    env.add_generator("w", Trajectory().timeout(1.0), at(0, 1, 2))
    env.run()
    assert env.get_n_generated("w") == 3


def test_from_distribution_starts_at_given_time():
    from trajsim import from_
    env = Environment(trace=False)
    env.add_generator("w", Trajectory().timeout(0.0),
                      from_(5.0, constant(2.0)))
    env.run(10)
    arr = get_mon_arrivals(env)
    assert sorted(arr["start_time"]) == [5.0, 7.0, 9.0]


def test_constant_distribution_never_stops_on_its_own():
    env = Environment(trace=False)
    env.add_generator("w", Trajectory().timeout(0.0), constant(2.0))
    env.run(9)
    # draws at 0,2,4,6,8 each create the next arrival ahead of time
    assert env.get_n_generated("w") == 5
    assert len(get_mon_arrivals(env)) == 4
