#!/usr/bin/env python3
"""Running the desk benchmark pack and reading the five-metric report.

Runs the default suite without memory, then the repeat suite with memory
enabled so every task's second occurrence replays from experience.

    python3 demos/05_benchmark.py
"""

from pathlib import Path

from pocketrag import load_benchmark, run_benchmark, validate_pack

PACK = Path(__file__).resolve().parents[1] / "packs" / "desk"


def main():
    tasks, stats = load_benchmark(PACK)
    print(f"pack statistics: {stats.to_dict()}")

    validation = validate_pack(PACK)
    print(f"pack validation: {'clean' if validation.ok else validation.violations}")

    print("\ndefault suite, memory off:")
    report = run_benchmark(PACK, memory_enabled=False)
    print(report.metrics.render_table())

    print("\nrepeat suite, memory on (second pass replays from memory):")
    repeat = run_benchmark(PACK, memory_enabled=True, suite="repeat")
    for i, section in enumerate(repeat.per_pass, start=1):
        print(f"\npass {i}:")
        print(section.render_table())

    second_pass = repeat.per_pass[1]
    print(
        f"\nevery pass-2 task replayed exactly: "
        f"{all(row.memory_hit == 'exact' and row.planner_calls == 0 for row in second_pass.tasks)}"
    )


if __name__ == "__main__":
    main()
