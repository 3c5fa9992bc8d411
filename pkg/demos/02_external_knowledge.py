#!/usr/bin/env python3
"""External knowledge retrieval against the shipped search fixtures.

Shows query formulation from unfamiliar entities, the capped and
deduplicated result list, and the digest block the planner receives.

    python3 demos/02_external_knowledge.py
"""

from pathlib import Path

from pocketrag import FixtureSearchBackend, Scenario, formulate_query, search

PACK = Path(__file__).resolve().parents[1] / "packs" / "desk"


def main():
    scenario = Scenario.from_file(PACK / "scenarios" / "discovery_den.json")
    backend = FixtureSearchBackend(scenario.search_fixtures)

    instruction = "Download the app to watch Squid Game."
    query = formulate_query(instruction, ["Squid Game"])
    print(f"instruction: {instruction}")
    print(f"formulated:  {query.text}")

    context = search(backend, query, k=10)
    print(f"\n{len(context.results)} results (urls deduplicated, capped at 10):")
    for result in context.results:
        print(f"  [{result.rank}] {result.title}  <{result.url}>")

    print("\ndigest handed to the planner:")
    print(context.digest)

    # no entities: the instruction passes through untouched
    passthrough = formulate_query("set an alarm", [])
    print(f"\nno entities -> passthrough query: {passthrough.text!r}")

    # a query nothing answers returns an empty context, not an error
    empty = search(backend, formulate_query("knitting tips", []), k=10)
    print(f"unanswerable query -> {len(empty.results)} results, digest={empty.digest!r}")


if __name__ == "__main__":
    main()
