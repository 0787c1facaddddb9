"""Deterministic pseudo-English training text generator.

Produces paragraphs whose sentences reuse a rolling set of topic words, so a
small model can learn the two statistics that matter downstream: function
words are frequent (low surprisal) and recently mentioned content words are
likely to recur (context lowers surprisal of repeats).
"""
from __future__ import annotations

import random

FUNCTION_WORDS = (
    "the of and a to in is was that it he she for on with as his her they at be "
    "this had not are but from or have an by which you were when we there been "
    "their one all would who will more no if out so said up into than them can "
    "only other its also two may then do first any my now such like our over"
).split()

CONTENT_WORDS = (
    "bear bears porridge chair chairs bed beds girl boy house houses wolf pig pigs "
    "straw sticks bricks tortoise hare race forest woods cottage door table bowl "
    "bowls spoon window garden path river hill stone tree trees bird birds fox "
    "morning evening night day winter summer breakfast supper fire smoke kettle "
    "pot lid bread honey milk apple apples basket cloak grandmother mother father "
    "sister brother child children friend king queen castle village market road "
    "bridge field meadow flower flowers grass sky cloud rain wind snow sun moon "
    "star stars light shadow voice song story word words tail paws fur whiskers "
    "eyes ears nose mouth teeth head feet hands arms legs heart sleep dream dreams "
    "walk walked walks run ran runs jump jumped sleeps slept eat ate eats drink "
    "drank sit sat stood stand look looked looks see saw sees hear heard call "
    "called cried laugh laughed smile smiled open opened close closed build built "
    "break broke carry carried find found lose lost give gave take took bring "
    "brought come came go went leave left return returned wait waited watch "
    "watched ask asked answer answered tell told speak spoke shout shouted whisper "
    "whispered knock knocked push pushed pull pulled climb climbed fall fell rise "
    "rose little big small great old young new warm cold hot cool soft hard sweet "
    "bitter fresh tired hungry thirsty happy sad angry afraid brave quiet loud "
    "quick slow heavy light dark bright deep shallow wide narrow tall short round "
    "empty full clean dirty kind gentle clever foolish careful careless lonely "
    "golden silver wooden stone-built distant nearby early late lovely terrible "
    "wonderful strange familiar secret hidden open shut lost found first last "
    "middle whole half morning-bright evening-dim"
).split()


def _zipf_choice(rng: random.Random, words: list[str]) -> str:
    # rank-weighted: P(rank r) ~ 1/(r+3)
    weights_total = sum(1.0 / (r + 3) for r in range(len(words)))
    x = rng.random() * weights_total
    acc = 0.0
    for r, w in enumerate(words):
        acc += 1.0 / (r + 3)
        if x <= acc:
            return w
    return words[-1]


def generate(n_paragraphs: int = 1200, seed: int = 20240) -> str:
    rng = random.Random(seed)
    paragraphs = []
    for _ in range(n_paragraphs):
        topics = [_zipf_choice(rng, CONTENT_WORDS) for _ in range(rng.randint(3, 6))]
        sentences = []
        for _s in range(rng.randint(5, 10)):
            if rng.random() < 0.25 and topics:
                topics[rng.randrange(len(topics))] = _zipf_choice(rng, CONTENT_WORDS)
            length = rng.randint(6, 14)
            words = []
            for i in range(length):
                if rng.random() < 0.48:
                    words.append(_zipf_choice(rng, FUNCTION_WORDS))
                elif topics and rng.random() < 0.6:
                    words.append(rng.choice(topics))
                else:
                    words.append(_zipf_choice(rng, CONTENT_WORDS))
            sentence = " ".join(words)
            sentences.append(sentence[0].upper() + sentence[1:] + ".")
        paragraphs.append(" ".join(sentences))
    return "\n".join(paragraphs) + "\n"
