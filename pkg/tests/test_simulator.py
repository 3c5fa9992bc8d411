"""Device semantics: observation purity, action effects, store, determinism."""

from __future__ import annotations

import random

import pytest

from pocketrag.errors import (
    AppNotInstalledError,
    DeviceStoppedError,
    NotInStoreError,
    ScenarioError,
)
from pocketrag.simulator import (
    Action,
    ActionTrace,
    Device,
    Scenario,
    UiElement,
)

from conftest import mini_scenario_dict


def fresh_device() -> Device:
    return Device(Scenario.from_dict(mini_scenario_dict()))


def test_initial_state_is_home_with_icons(mini_scenario):
    device = Device(mini_scenario)
    state = device.observe()
    assert state.foreground_package == "home"
    assert state.screen_id == "home"
    assert state.element_ids() == {"icon_com.clock", "icon_com.notes"}


def test_observe_is_pure(mini_scenario):
    device = Device(mini_scenario)
    first = device.observe()
    second = device.observe()
    assert first == second
    assert device.action_count == 0


def test_launch_enters_entry_screen(mini_scenario):
    device = Device(mini_scenario)
    step = device.execute(Action.launch("com.clock"))
    state = device.observe()
    assert state.foreground_package == "com.clock"
    assert state.screen_id == "clock_home"
    assert step.effect == "transitioned"
    assert device.action_count == 1


def test_launch_not_installed_raises(mini_scenario):
    device = Device(mini_scenario)
    with pytest.raises(AppNotInstalledError):
        device.execute(Action.launch("com.weather"))
    assert device.action_count == 0  # failed launches are not steps


def test_tap_with_transition(mini_scenario):
    device = Device(mini_scenario)
    device.execute(Action.launch("com.clock"))
    step = device.execute(Action.tap("alarms_tab"))
    assert step.effect == "transitioned"
    assert device.observe().screen_id == "alarm_list"


def test_tap_unknown_target_is_noop(mini_scenario):
    device = Device(mini_scenario)
    device.execute(Action.launch("com.clock"))
    step = device.execute(Action.tap("no_such_element"))
    assert step.effect == "no_op"
    assert step.pre_screen_id == step.post_screen_id == "clock_home"


def test_type_stores_text_into_flag(mini_scenario):
    device = Device(mini_scenario)
    device.execute(Action.launch("com.clock"))
    device.execute(Action.tap("alarms_tab"))
    step = device.execute(Action.type_text("time_field", "08:00"))
    assert step.effect == "flag_update"
    assert step.flag_changes == (("alarm_input", "08:00"),)
    assert device.observe().state_flags["alarm_input"] == "08:00"


def test_flag_reference_substitution(mini_scenario):
    device = Device(mini_scenario)
    device.execute(Action.launch("com.clock"))
    device.execute(Action.tap("alarms_tab"))
    device.execute(Action.type_text("time_field", "07:45"))
    step = device.execute(Action.tap("save_alarm"))
    assert step.flag_changes == (("alarm_set", "07:45"),)


def test_retype_same_text_is_noop(mini_scenario):
    device = Device(mini_scenario)
    device.execute(Action.launch("com.clock"))
    device.execute(Action.tap("alarms_tab"))
    device.execute(Action.type_text("time_field", "06:00"))
    step = device.execute(Action.type_text("time_field", "06:00"))
    assert step.effect == "no_op"


def test_back_pops_stack_then_home(mini_scenario):
    device = Device(mini_scenario)
    device.execute(Action.launch("com.clock"))
    device.execute(Action.tap("alarms_tab"))
    step = device.execute(Action.back())
    assert step.post_screen_id == "clock_home"
    step = device.execute(Action.back())
    assert step.post_screen_id == "home"
    assert device.observe().foreground_package == "home"
    step = device.execute(Action.back())
    assert step.effect == "no_op"


def test_home_icon_tap_launches(mini_scenario):
    device = Device(mini_scenario)
    step = device.execute(Action.tap("icon_com.clock"))
    assert step.effect == "transitioned"
    assert device.observe().foreground_package == "com.clock"


def test_stop_freezes_device(mini_scenario):
    device = Device(mini_scenario)
    step = device.execute(Action.stop(True))
    assert step.effect == "no_op"
    assert device.stopped
    with pytest.raises(DeviceStoppedError):
        device.execute(Action.back())


def test_swipe_without_transition_is_noop(mini_scenario):
    device = Device(mini_scenario)
    device.execute(Action.launch("com.clock"))
    step = device.execute(Action.swipe("up"))
    assert step.effect == "no_op"


def test_install_from_store(mini_scenario):
    device = Device(mini_scenario)
    seed = device.install_from_store("com.weather")
    assert seed.package_id == "com.weather"
    assert device.install_count == 1
    step = device.execute(Action.launch("com.weather"))
    assert step.effect == "transitioned"
    # new icon appears on home
    device.execute(Action.back())
    assert "icon_com.weather" in device.observe().element_ids()


def test_install_missing_package(mini_scenario):
    device = Device(mini_scenario)
    with pytest.raises(NotInStoreError):
        device.install_from_store("com.nowhere")


def test_install_already_installed_is_warning_not_error(mini_scenario, caplog):
    device = Device(mini_scenario)
    seed = device.install_from_store("com.clock")
    assert seed.package_id == "com.clock"
    assert device.install_count == 0


def test_alarm_scripted_sequence_sets_flag(mini_scenario):
    device = Device(mini_scenario)
    for action in [
        Action.launch("com.clock"),
        Action.tap("alarms_tab"),
        Action.type_text("time_field", "08:00"),
        Action.tap("save_alarm"),
        Action.stop(True),
    ]:
        device.execute(action)
    assert device.observe().state_flags["alarm_set"] == "08:00"
    assert device.action_count == 5


def test_determinism_across_devices(mini_scenario):
    rng = random.Random(123)
    actions = []
    pool = [
        Action.launch("com.clock"),
        Action.tap("alarms_tab"),
        Action.tap("icon_com.notes"),
        Action.type_text("time_field", "05:00"),
        Action.tap("save_alarm"),
        Action.back(),
        Action.swipe("down"),
        Action.tap("new_note"),
        Action.type_text("note_body", "hello"),
    ]
    for _ in range(60):
        actions.append(rng.choice(pool))

    def run(scenario_dict):
        device = Device(Scenario.from_dict(scenario_dict))
        steps = []
        for action in actions:
            try:
                steps.append(device.execute(action))
            except AppNotInstalledError:
                steps.append(None)
        return steps, device.observe()

    steps_a, final_a = run(mini_scenario_dict())
    steps_b, final_b = run(mini_scenario_dict())
    assert steps_a == steps_b
    assert final_a == final_b


def test_closure_over_declared_screens(mini_scenario):
    declared = {
        screen_id
        for graph in mini_scenario.app_graphs.values()
        for screen_id in graph.screens
    } | {"home"}
    rng = random.Random(9)
    device = Device(mini_scenario)
    pool = [
        Action.launch("com.clock"),
        Action.launch("com.notes"),
        Action.tap("alarms_tab"),
        Action.tap("new_note"),
        Action.back(),
        Action.swipe("left"),
        Action.tap("save_alarm"),
    ]
    for _ in range(200):
        try:
            device.execute(rng.choice(pool))
        except AppNotInstalledError:
            pass
        assert device.observe().screen_id in declared


def test_action_validation():
    with pytest.raises(ValueError):
        Action(kind="tap")
    with pytest.raises(ValueError):
        Action(kind="type", target="x")
    with pytest.raises(ValueError):
        Action(kind="swipe", direction="sideways")
    with pytest.raises(ValueError):
        Action(kind="stop")
    with pytest.raises(ValueError):
        Action(kind="nonsense")


def test_action_serialization_round_trip():
    actions = [
        Action.tap("x"),
        Action.type_text("y", "text"),
        Action.swipe("up"),
        Action.back(),
        Action.stop(False),
        Action.launch("com.app"),
    ]
    for action in actions:
        assert Action.from_dict(action.to_dict()) == action


def test_trace_serialization_round_trip(mini_scenario):
    device = Device(mini_scenario)
    device.execute(Action.launch("com.clock"))
    device.execute(Action.tap("alarms_tab"))
    device.execute(Action.type_text("time_field", "09:15"))
    device.execute(Action.stop(True))
    trace = ActionTrace(steps=tuple(device.history))
    assert ActionTrace.from_jsonable(trace.to_jsonable()) == trace


def test_ui_element_validation():
    with pytest.raises(ScenarioError):
        UiElement("id", "nonsense_role")
    with pytest.raises(ScenarioError):
        UiElement("id", "button", bounds=(0, 0, 0, 10))


def test_scenario_validation_rejects_dangling_transition():
    data = mini_scenario_dict()
    data["app_graphs"]["com.clock"]["screens"]["clock_home"]["transitions"][
        "tap:alarms_tab"
    ] = {"next": "missing_screen"}
    with pytest.raises(ScenarioError):
        Scenario.from_dict(data)


def test_scenario_validation_rejects_duplicate_elements():
    data = mini_scenario_dict()
    elements = data["app_graphs"]["com.clock"]["screens"]["clock_home"]["elements"]
    elements.append(dict(elements[0]))
    with pytest.raises(ScenarioError):
        Scenario.from_dict(data)


def test_scenario_validation_requires_graph_for_installed():
    data = mini_scenario_dict()
    del data["app_graphs"]["com.notes"]
    with pytest.raises(ScenarioError):
        Scenario.from_dict(data)


def test_scenario_rejects_conflicting_catalog_overlap():
    data = mini_scenario_dict()
    data["store_catalog"].append(
        {
            "name": "Clock2",
            "package_id": "com.clock",
            "description": "different description entirely",
        }
    )
    with pytest.raises(ScenarioError):
        Scenario.from_dict(data)
