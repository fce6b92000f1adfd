#!/usr/bin/env python3
"""Generates the shipped fixture dex files (data/dex24.json, data/dex64.json).

The output is fully deterministic; rerunning it reproduces the committed
files byte for byte.
"""
import json
import random
import sys
from pathlib import Path

TYPES = ["normal", "fire", "water", "grass", "electric", "ice",
         "fighting", "poison", "ground", "flying", "psychic", "rock"]

# attacker -> {defender: multiplier}; unspecified cells are 1.
CHART = {
    "normal": {"rock": 0.5},
    "fire": {"fire": 0.5, "water": 0.5, "grass": 2, "ice": 2, "rock": 0.5},
    "water": {"fire": 2, "water": 0.5, "grass": 0.5, "ground": 2, "rock": 2},
    "grass": {"fire": 0.5, "water": 2, "grass": 0.5, "poison": 0.5,
              "ground": 2, "flying": 0.5, "rock": 2},
    "electric": {"water": 2, "grass": 0.5, "electric": 0.5, "ground": 0,
                 "flying": 2},
    "ice": {"fire": 0.5, "water": 0.5, "grass": 2, "ice": 0.5, "ground": 2,
            "flying": 2},
    "fighting": {"normal": 2, "ice": 2, "poison": 0.5, "flying": 0.5,
                 "psychic": 0.5, "rock": 2},
    "poison": {"grass": 2, "poison": 0.5, "ground": 0.5, "rock": 0.5},
    "ground": {"fire": 2, "grass": 0.5, "electric": 2, "poison": 2,
               "flying": 0, "rock": 2},
    "flying": {"grass": 2, "electric": 0.5, "fighting": 2, "rock": 0.5},
    "psychic": {"fighting": 2, "poison": 2, "psychic": 0.5},
    "rock": {"fire": 2, "ice": 2, "fighting": 0.5, "ground": 0.5,
             "flying": 2},
}


def move(name, type_, cat, power, acc, pp, prio=0, effect=None):
    m = {"name": name, "type": type_, "category": cat, "power": power,
         "accuracy": acc, "pp": pp, "priority": prio}
    if effect is not None:
        m["effect"] = effect
    return m


def status_fx(status, chance):
    return {"kind": "status", "status": status, "chance": chance}


def boost_fx(target, changes, chance=1.0):
    return {"kind": "boost", "target": target, "changes": changes,
            "chance": chance}


MOVES = [
    move("tackle", "normal", "physical", 40, 1.0, 35),
    move("body-slam", "normal", "physical", 85, 1.0, 15, effect=status_fx("paralysis", 0.3)),
    move("double-edge", "normal", "physical", 120, 1.0, 15),
    move("quick-attack", "normal", "physical", 40, 1.0, 30, prio=1),
    move("hyper-voice", "normal", "special", 90, 1.0, 10),
    move("ember", "fire", "special", 40, 1.0, 25, effect=status_fx("burn", 0.1)),
    move("flamethrower", "fire", "special", 90, 1.0, 15, effect=status_fx("burn", 0.1)),
    move("fire-blast", "fire", "special", 110, 0.85, 5, effect=status_fx("burn", 0.1)),
    move("flare-blitz", "fire", "physical", 120, 1.0, 15),
    move("fire-punch", "fire", "physical", 75, 1.0, 15, effect=status_fx("burn", 0.1)),
    move("water-gun", "water", "special", 40, 1.0, 25),
    move("surf", "water", "special", 90, 1.0, 15),
    move("hydro-pump", "water", "special", 110, 0.8, 5),
    move("waterfall", "water", "physical", 80, 1.0, 15),
    move("aqua-jet", "water", "physical", 40, 1.0, 20, prio=1),
    move("energy-ball", "grass", "special", 90, 1.0, 10, effect=boost_fx("foe", {"spd": -1}, 0.1)),
    move("giga-drain", "grass", "special", 75, 1.0, 10),
    move("leaf-blade", "grass", "physical", 90, 1.0, 15),
    move("seed-bomb", "grass", "physical", 80, 1.0, 15),
    move("thunderbolt", "electric", "special", 90, 1.0, 15, effect=status_fx("paralysis", 0.1)),
    move("thunder", "electric", "special", 110, 0.7, 10, effect=status_fx("paralysis", 0.3)),
    move("wild-charge", "electric", "physical", 90, 1.0, 15),
    move("thunder-punch", "electric", "physical", 75, 1.0, 15, effect=status_fx("paralysis", 0.1)),
    move("ice-beam", "ice", "special", 90, 1.0, 10),
    move("blizzard", "ice", "special", 110, 0.7, 5),
    move("icicle-crash", "ice", "physical", 85, 0.9, 10),
    move("ice-shard", "ice", "physical", 40, 1.0, 30, prio=1),
    move("close-combat", "fighting", "physical", 120, 1.0, 5, effect=boost_fx("self", {"def": -1, "spd": -1})),
    move("brick-break", "fighting", "physical", 75, 1.0, 15),
    move("focus-blast", "fighting", "special", 120, 0.7, 5, effect=boost_fx("foe", {"spd": -1}, 0.1)),
    move("aura-sphere", "fighting", "special", 80, 1.0, 20),
    move("sludge-bomb", "poison", "special", 90, 1.0, 10, effect=status_fx("poison", 0.3)),
    move("poison-jab", "poison", "physical", 80, 1.0, 20, effect=status_fx("poison", 0.3)),
    move("earthquake", "ground", "physical", 100, 1.0, 10),
    move("earth-power", "ground", "special", 90, 1.0, 10, effect=boost_fx("foe", {"spd": -1}, 0.1)),
    move("brave-bird", "flying", "physical", 120, 1.0, 15),
    move("air-slash", "flying", "special", 75, 0.95, 15),
    move("hurricane", "flying", "special", 110, 0.7, 10),
    move("psychic", "psychic", "special", 90, 1.0, 10, effect=boost_fx("foe", {"spd": -1}, 0.1)),
    move("zen-headbutt", "psychic", "physical", 80, 0.9, 15),
    move("psyshock", "psychic", "special", 80, 1.0, 10),
    move("stone-edge", "rock", "physical", 100, 0.8, 5),
    move("rock-slide", "rock", "physical", 75, 0.9, 10),
    move("power-gem", "rock", "special", 80, 1.0, 20),
    move("swords-dance", "normal", "status", 0, 1.0, 20, effect=boost_fx("self", {"atk": 2})),
    move("nasty-plot", "psychic", "status", 0, 1.0, 20, effect=boost_fx("self", {"spa": 2})),
    move("calm-mind", "psychic", "status", 0, 1.0, 20, effect=boost_fx("self", {"spa": 1, "spd": 1})),
    move("dragon-dance", "fire", "status", 0, 1.0, 20, effect=boost_fx("self", {"atk": 1, "spe": 1})),
    move("iron-defense", "rock", "status", 0, 1.0, 15, effect=boost_fx("self", {"def": 2})),
    move("growl", "normal", "status", 0, 1.0, 40, effect=boost_fx("foe", {"atk": -1})),
    move("thunder-wave", "electric", "status", 0, 0.9, 20, effect=status_fx("paralysis", 1.0)),
    move("will-o-wisp", "fire", "status", 0, 0.85, 15, effect=status_fx("burn", 1.0)),
    move("toxic", "poison", "status", 0, 0.9, 10, effect=status_fx("poison", 1.0)),
    move("recover", "normal", "status", 0, 1.0, 10, effect={"kind": "heal", "fraction": 0.5}),
    move("roost", "flying", "status", 0, 1.0, 10, effect={"kind": "heal", "fraction": 0.5}),
    move("rain-dance", "water", "status", 0, 1.0, 5, effect={"kind": "weather", "weather": "rain"}),
    move("sunny-day", "fire", "status", 0, 1.0, 5, effect={"kind": "weather", "weather": "sun"}),
    move("tailwind", "flying", "status", 0, 1.0, 15, effect={"kind": "side", "condition": "tailwind"}),
    move("toxic-spikes", "poison", "status", 0, 1.0, 20, effect={"kind": "side", "condition": "toxic_spikes"}),
]

ABILITIES = [
    {"name": "blaze", "kind": "pinch_boost", "type": "fire"},
    {"name": "torrent", "kind": "pinch_boost", "type": "water"},
    {"name": "overgrow", "kind": "pinch_boost", "type": "grass"},
    {"name": "levitate", "kind": "type_immunity", "type": "ground"},
    {"name": "volt-absorb", "kind": "type_immunity", "type": "electric"},
    {"name": "swift-swim", "kind": "weather_speed", "weather": "rain"},
    {"name": "chlorophyll", "kind": "weather_speed", "weather": "sun"},
    {"name": "immunity", "kind": "status_immunity", "status": "poison"},
    {"name": "limber", "kind": "status_immunity", "status": "paralysis"},
    {"name": "water-veil", "kind": "status_immunity", "status": "burn"},
    {"name": "thick-fat", "kind": "resist", "types": ["fire", "ice"]},
    {"name": "inner-focus", "kind": "none"},
]

ITEMS = [
    {"name": "leftovers", "kind": "leftovers"},
    {"name": "sitrus-berry", "kind": "pinch_heal"},
    {"name": "expert-belt", "kind": "super_effective_boost"},
    {"name": "charcoal", "kind": "type_boost", "type": "fire"},
    {"name": "mystic-water", "kind": "type_boost", "type": "water"},
    {"name": "miracle-seed", "kind": "type_boost", "type": "grass"},
    {"name": "magnet", "kind": "type_boost", "type": "electric"},
    {"name": "soft-sand", "kind": "type_boost", "type": "ground"},
]

PREFIX = {"normal": "Plain", "fire": "Ember", "water": "Tide", "grass": "Moss",
          "electric": "Volt", "ice": "Frost", "fighting": "Brawl", "poison": "Venom",
          "ground": "Dune", "flying": "Gale", "psychic": "Mind", "rock": "Crag"}
SUFFIX = ["fox", "ling", "maw", "wing", "horn", "shell"]

# Signature abilities per primary type.
TYPE_ABILITIES = {
    "fire": ["blaze", "chlorophyll"], "water": ["torrent", "swift-swim", "water-veil"],
    "grass": ["overgrow", "chlorophyll"], "electric": ["volt-absorb", "limber"],
    "ice": ["thick-fat"], "fighting": ["inner-focus", "limber"],
    "poison": ["immunity"], "ground": ["thick-fat", "immunity"],
    "flying": ["levitate"], "psychic": ["levitate", "inner-focus"],
    "rock": ["inner-focus", "water-veil"], "normal": ["thick-fat", "limber", "inner-focus"],
}

STATUS_MOVES = [m["name"] for m in MOVES if m["category"] == "status"]


def attacks_of(type_):
    return [m for m in MOVES if m["type"] == type_ and m["category"] != "status"]


def make_species(rng, idx):
    primary = TYPES[idx % len(TYPES)]
    name = PREFIX[primary] + SUFFIX[idx // len(TYPES)]
    types = [primary]
    if rng.random() < 0.45:
        second = rng.choice([t for t in TYPES if t != primary])
        types.append(second)
    physical = rng.random() < 0.5
    base = {
        "hp": rng.randint(55, 110),
        "atk": rng.randint(55, 120) + (15 if physical else -10),
        "def": rng.randint(50, 115),
        "spa": rng.randint(55, 120) + (-10 if physical else 15),
        "spd": rng.randint(50, 115),
        "spe": rng.randint(40, 120),
    }
    pool = list(TYPE_ABILITIES[primary])
    rng.shuffle(pool)
    abilities = pool[:rng.randint(1, min(3, len(pool)))]
    learn = set()
    for t in types:
        for m in attacks_of(t):
            learn.add(m["name"])
    coverage = [m["name"] for m in MOVES if m["category"] != "status" and m["type"] not in types]
    for m in rng.sample(coverage, 4):
        learn.add(m)
    for m in rng.sample(STATUS_MOVES, 2):
        learn.add(m)
    order = {m["name"]: i for i, m in enumerate(MOVES)}
    return {"name": name, "types": types, "base": base, "abilities": abilities,
            "learnset": sorted(learn, key=order.get)}


def build(n_species, rng_seed=20200822):
    rng = random.Random(rng_seed)
    species = [make_species(rng, i) for i in range(64)][:n_species]
    used = {m for s in species for m in s["learnset"]}
    moves = [m for m in MOVES if m["name"] in used]
    chart = [[CHART.get(a, {}).get(d, 1) for d in TYPES] for a in TYPES]
    return {"types": TYPES, "chart": chart, "moves": moves,
            "abilities": ABILITIES, "items": ITEMS, "species": species}


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "data"
    out.mkdir(parents=True, exist_ok=True)
    for n in (24, 64):
        (out / f"dex{n}.json").write_text(json.dumps(build(n), indent=1) + "\n")


if __name__ == "__main__":
    main()
