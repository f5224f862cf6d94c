#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Regenerates the bundled benchmark fixture under data/benchmark/.

The base prompt file is a synthetic stand-in with the same id space (0..804)
as the public 805-prompt evaluation set, so the builder's counting and
exclusion logic can be exercised offline. The ten excluded prompts carry
their public texts at their public ids. Swap in the real prompt file (same
{prompt_id, text} layout) for actual evaluations.
"""
import argparse
import itertools
import json
import pathlib

TOTAL = 805

EXCLUDED = {
    183: ("Write a story about Anakin Skywalker encountering a Jedi who speaks and acts like a 1920s "
          "British aristocrat.", "culturally specific"),
    200: ('Write "Test"', "answer is tied to an English string"),
    350: ("I'm an English speaker trying to learn Japanese Kanji using mnemonics. Mnemonics for Kanji are "
          "created from the primitives that make them up. The Kanji for Tax has the primitives wheat and "
          "devil, so an example would be, \"Taxes are like the devil taking away your hard earned wheat\". "
          "Can you create a mnemonic for the Kanji meaning Wish that has the primitives clock and heart?",
          "expects an English answer"),
    458: ("Give me a list of 5 words where the letters of the words are in alphabetical order. One example: "
          "\"doors\". \"d\" comes before \"o\", \"o\" comes before \"r\", and \"r\" comes before \"s\".",
          "depends on English spelling"),
    476: ("Rewrite the given text and correct grammar, spelling, and punctuation errors. If you'd told me "
          "year ago that today I would finish a marathon, I would of laughed. Your support had a huge affect "
          "on me!", "English proofreading"),
    495: ("During writing, we added an asterisk for the word that did not come to mind. You will need to "
          "provide several examples to demonstrate all the words that can be used in the sentence instead "
          "of the asterisk.", "depends on English wording"),
    635: ("Correct the transcription of an excerpt containing errors. I got got charged interest on ly "
          "credit card but I paid my pull balance one day due date. I not missed a pavement year yet. Man "
          "you reverse the interest charge?", "English proofreading"),
    662: ("You should capitalize the sentence according to the guide. Guide: Every other letter alternates "
          "between lower case and upper case.\n Sentence: A giant spider blocks your path.",
          "depends on English letter case"),
    663: ("Create alliterations by finding synonyms for words in the given sentence. David wears a hat "
          "everyday.", "depends on English sounds"),
    714: ("Rewrite the text and correct the spelling errors. It solves problems comon and uniqe to every "
          "team.", "English proofreading"),
}

TASKS = [
    "Explain {t} to someone who has never heard of it.",
    "Give three practical tips related to {t}.",
    "What are the most common misconceptions about {t}?",
    "Write a short paragraph describing the history of {t}.",
    "Compare the advantages and disadvantages of {t}.",
    "Suggest a weekend plan that involves {t}.",
    "Summarize the key ideas behind {t} in five bullet points.",
    "Write a friendly email inviting a colleague to learn about {t}.",
    "How would you teach {t} to a ten-year-old?",
    "Describe a typical day for a professional who works with {t}.",
    "List the equipment or resources someone needs to get started with {t}.",
    "Write a haiku about {t}, then explain the imagery in {language}.",
]

TOPICS = [
    "photosynthesis", "compound interest", "sourdough baking", "the water cycle", "public transport",
    "chess openings", "volcanoes", "machine translation", "urban gardening", "the Roman Empire",
    "vaccination", "jazz improvisation", "recycling plastics", "bird migration", "personal budgeting",
    "the printing press", "solar panels", "meditation", "marathon training", "coral reefs",
    "cloud computing", "board game design", "the human immune system", "river ecosystems",
    "job interviews", "origami", "electric cars", "the Renaissance", "home insulation", "beekeeping",
    "sleep hygiene", "rock climbing", "tea ceremonies", "earthquakes", "open source software",
    "public speaking", "fermentation", "the Silk Road", "wind energy", "first aid", "astronomy",
    "container shipping", "language learning", "minimalism", "glaciers", "composting", "typography",
    "carbon pricing", "the Olympic Games", "wildlife photography", "3D printing", "ancient Egypt",
    "bicycle maintenance", "time management", "ocean currents", "podcasting", "the stock market",
    "hiking safety", "quantum computing", "urban planning", "the history of chocolate", "bread making",
    "desert ecosystems", "data privacy", "lighthouses", "knitting", "rainforests", "video game history",
    "tidal energy",
]


def base_prompts():
    combos = (t.format(t=topic, language="{language}") for t, topic in itertools.product(TASKS, TOPICS))
    out = []
    for pid in range(TOTAL):
        if pid in EXCLUDED:
            out.append({"prompt_id": pid, "text": EXCLUDED[pid][0]})
        else:
            out.append({"prompt_id": pid, "text": next(combos)})
    return out


def main():
    root = pathlib.Path(__file__).resolve().parent.parent
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=pathlib.Path, default=root / "data" / "benchmark")
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    prompts = base_prompts()
    assert len({p["text"] for p in prompts}) == TOTAL, "prompt texts must be distinct"
    with open(args.out / "base_prompts.jsonl", "w", encoding="utf-8") as f:
        for p in prompts:
            f.write(json.dumps(p, ensure_ascii=False, sort_keys=True) + "\n")
    with open(args.out / "exclusions.jsonl", "w", encoding="utf-8") as f:
        for pid in sorted(EXCLUDED):
            f.write(json.dumps({"prompt_id": pid, "reason": EXCLUDED[pid][1]}, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
