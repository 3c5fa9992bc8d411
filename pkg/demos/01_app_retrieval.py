#!/usr/bin/env python3
"""Local app retrieval: build an index, query it, hit the rejection path.

Walks through the catalog from the shipped desk pack: queries that match an
installed app, a query that nothing local can serve, and how registering a
newly installed app changes the results. Also generates a small training
corpus from the same catalog.

Run from the repository root after `pip install -e .`:

    python3 demos/01_app_retrieval.py
"""

from pathlib import Path

from pocketrag import AppIndex, HashedTokenEmbedder, Scenario
from pocketrag.app_index import KeywordQuerySource, generate_training_corpus

PACK = Path(__file__).resolve().parents[1] / "packs" / "desk"


def show(index, query):
    outcome = index.retrieve(query, k=3)
    print(f"\nquery: {query!r}")
    if not outcome.found:
        best = "empty index" if outcome.best_score is None else f"best={outcome.best_score:.3f}"
        print(f"  -> no local app ({best})")
        return
    for match in outcome.matches:
        print(f"  {match.score:.3f}  {match.app_name:<10s} {match.package_id}")


def main():
    scenario = Scenario.from_file(PACK / "scenarios" / "discovery_den.json")
    backend = HashedTokenEmbedder()
    index = AppIndex.build(scenario.installed_apps, backend, threshold=0.35)
    print(f"indexed {len(index)} installed apps from scenario {scenario.scenario_id!r}")

    # a query an installed app can serve
    show(index, "send text messages chat")

    # nothing local clears the threshold: the agent would go to the store
    show(index, "stream exclusive series films squid game")

    # the store catalog answers the same query
    store = AppIndex.build(scenario.store_catalog, backend, threshold=0.35)
    show(store, "stream exclusive series films squid game")

    # install + register, and the local index picks it up immediately
    seed = next(s for s in scenario.store_catalog if "streamflix" in s.package_id)
    index.register(seed)
    print(f"\nregistered {seed.package_id} into the local index")
    show(index, "stream exclusive series films squid game")

    # contrastive training corpus from the same apps
    examples = generate_training_corpus(
        scenario.installed_apps + scenario.store_catalog,
        queries_per_app=2,
        none_fraction=0.2,
        query_source=KeywordQuerySource(),
    )
    none_cases = sum(1 for e in examples if e.is_none_case)
    print(f"\ncorpus: {len(examples)} examples, {none_cases} none-cases; first three:")
    for example in examples[:3]:
        print(f"  {example.query!r} -> {example.positive} (negatives: {list(example.negatives)})")


if __name__ == "__main__":
    main()
