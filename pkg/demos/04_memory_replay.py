#!/usr/bin/env python3
"""Experience memory: run a task once, then watch it replay planner-free.

The first run plans step by step and commits its trace on success. The
exact repeat routes through memory and replays with zero planner calls; a
paraphrase above the similarity threshold comes back as guidance instead.

    python3 demos/04_memory_replay.py
"""

import json
from pathlib import Path

from pocketrag import (
    AgentConfig,
    AppIndex,
    EffectReflector,
    FixtureSearchBackend,
    HashedTokenEmbedder,
    MemoryStore,
    Scenario,
    ScriptedPlanner,
    run_task,
)

PACK = Path(__file__).resolve().parents[1] / "packs" / "desk"


def describe(label, run):
    counters = run.counters
    print(f"{label}: outcome={run.outcome} memory_hit={counters.memory_hit} "
          f"planner_calls={counters.planner_calls} mobile_steps={counters.mobile_steps}")


def main():
    scenario = Scenario.from_file(PACK / "scenarios" / "alarm_basic.json")
    task = json.loads((PACK / "tasks" / "t01_alarm_set.json").read_text())
    backend = HashedTokenEmbedder()
    config = AgentConfig(tau_local=0.35)
    memory = MemoryStore(backend)
    search = FixtureSearchBackend(scenario.search_fixtures)

    def fresh_index():
        return AppIndex.build(scenario.installed_apps, backend, threshold=config.tau_local)

    first = run_task(
        task["instruction"], scenario, fresh_index(), memory, search,
        ScriptedPlanner(task["script"]), EffectReflector(), config,
        task_id=task["task_id"],
    )
    describe("first run ", first)
    print("  trace:", " | ".join(s.action.describe() for s in first.trace.steps))

    # the committed record is now in the store
    record = memory.records()[0]
    print(f"\nmemory now holds {len(memory)} record: {record.normalized_query!r} "
          f"({len(record.trace)} steps)")

    # exact repeat (case and punctuation differ): replay, zero planner calls
    second = run_task(
        task["instruction"].upper(), scenario, fresh_index(), memory, search,
        ScriptedPlanner([]), EffectReflector(), config, task_id=task["task_id"],
    )
    describe("exact rerun", second)

    # a similar-but-different request gets the record as guidance only
    match = memory.lookup("Set an alarm for 8 am tomorrow please everyone")
    print(f"\nparaphrase lookup -> {match.kind}"
          + (f" (score {match.score:.3f})" if match.score else ""))


if __name__ == "__main__":
    main()
