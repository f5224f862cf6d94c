#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Writes data/corpus/sample_passages.jsonl, a small English seed corpus for
offline runs against the mock backends."""
import json
import pathlib

FACTS = [
    ("Photosynthesis", "converts light energy into chemical energy stored in sugar",
     "Plants, algae and some bacteria rely on it", "Oxygen is released as a by-product."),
    ("Compound interest", "adds earned interest back to the principal",
     "Over long periods the growth becomes exponential", "Starting early matters more than the rate."),
    ("Sourdough bread", "is leavened by a culture of wild yeast and lactic acid bacteria",
     "The bacteria give the loaf its sour taste", "A starter needs regular feeding with flour and water."),
    ("The water cycle", "moves water between oceans, air and land",
     "Evaporation lifts water into the atmosphere", "Rain and snow return it to the surface."),
    ("A volcano", "forms where molten rock reaches the surface of a planet",
     "Many volcanoes sit along the edges of tectonic plates", "Eruptions can be explosive or slow and steady."),
    ("Beekeeping", "is the care of honey bee colonies in man-made hives",
     "A healthy colony can hold tens of thousands of bees", "Keepers inspect frames for disease and honey stores."),
    ("A glacier", "is a slow river of ice that forms where snow builds up for years",
     "Glaciers carve valleys and move boulders", "Many are shrinking as average temperatures rise."),
    ("Composting", "turns kitchen scraps and garden waste into soil conditioner",
     "Microbes break the material down with the help of air and moisture", "A good heap mixes green and brown matter."),
    ("Solar panels", "turn sunlight into electricity using semiconductor cells",
     "Output depends on angle, shading and temperature", "Most panels keep working for more than twenty years."),
    ("Marathon training", "builds endurance over several months",
     "Long slow runs are the core of most plans", "Rest days let muscles recover and adapt."),
    ("Coral reefs", "are built by colonies of tiny animals called polyps",
     "They shelter a large share of marine species", "Warm water can cause corals to bleach."),
    ("The printing press", "made it cheap to copy books in large numbers",
     "Movable type could be rearranged for each page", "Literacy spread quickly in the following centuries."),
    ("Bird migration", "is the seasonal movement of birds between breeding and wintering grounds",
     "Some species fly thousands of kilometres without stopping", "Birds navigate using the sun, stars and magnetic cues."),
    ("Meditation", "trains attention by returning focus to a chosen object such as the breath",
     "Short daily sessions are easier to sustain than long rare ones", "Many people report lower stress after a few weeks."),
    ("Cloud computing", "rents computing power and storage over the network",
     "Customers pay for what they use instead of buying servers", "Data location and privacy still need careful planning."),
    ("Fermentation", "uses microbes to transform food",
     "Yogurt, kimchi and cheese are all fermented", "The process can preserve food and change its flavour."),
    ("An earthquake", "happens when stress in the crust is released suddenly along a fault",
     "Seismometers record the waves that spread outward", "Building codes reduce damage in risky regions."),
    ("Wind turbines", "capture the energy of moving air with large rotating blades",
     "Offshore sites often have stronger and steadier winds", "Output varies with the weather, so storage helps."),
    ("Rock climbing", "combines strength, balance and problem solving on a wall or cliff",
     "Beginners usually start indoors with a rope and a belayer", "Good footwork saves energy in the arms."),
    ("Knitting", "creates fabric by pulling loops of yarn through other loops",
     "Only two basic stitches are needed for most patterns", "Needle size and yarn weight set the density of the fabric."),
]

LIST_STYLES = ["- ", "* ", "1. "]


def passage(i):
    subject, verb, second, third = FACTS[i % len(FACTS)]
    variant = i // len(FACTS)
    if variant == 0:
        return f"{subject} {verb}. {second}. {third}"
    if variant == 1:
        marker = LIST_STYLES[i % len(LIST_STYLES)]
        items = [second + ".", third]
        if marker == "1. ":
            lines = [f"{n}. {text}" for n, text in enumerate(items, 1)]
        else:
            lines = [marker + text for text in items]
        return f"{subject} {verb}.\n\nKey points:\n" + "\n".join(lines)
    return f"## {subject}\n\n{subject} {verb}. {second}.\n\n{third} Ask an expert if unsure."


def main():
    root = pathlib.Path(__file__).resolve().parent.parent
    out = root / "data" / "corpus"
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sample_passages.jsonl", "w", encoding="utf-8") as f:
        for i in range(3 * len(FACTS)):
            f.write(json.dumps({"id": f"sample:{i:03d}", "text": passage(i)}, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
