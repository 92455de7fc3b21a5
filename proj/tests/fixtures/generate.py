#!/usr/bin/env python3
"""Regenerates the pursuit fixture corpus.

Each fixture has five robots, one more than the four surround slots need,
so a single failure leaves the mission fillable. Every robot can organize,
so any formed team has a member able to take over from a failed leader.
Two or three robots sense the whole grid; the rest have short range.
"""
import argparse
import pathlib
import random

ORG = "{kind: Organization, magnitude: 1}, {kind: Communication, magnitude: 1}"


def fixture(seed: int) -> str:
    rng = random.Random(seed)
    size = rng.randint(8, 12)
    cells = [(x, y) for x in range(size) for y in range(size)]
    # Keep the evader out of immediate reach so capture needs a formed team.
    while True:
        picks = rng.sample(cells, 6)
        ex, ey = picks[5]
        if all(max(abs(x - ex), abs(y - ey)) >= 3 for x, y in picks[:5]):
            break
    wide = set(rng.sample(range(5), rng.choice([2, 3])))
    lines = [
        f"# generated by generate.py, fixture seed {seed}",
        f"seed: {seed}",
        "max_ticks: 200",
        "robots:",
    ]
    for i in range(5):
        x, y = picks[i]
        speed = rng.choice([1, 1, 2])
        radius = size if i in wide else rng.randint(3, 6)
        lines.append(
            f"  - {{id: R{i + 1}, position: [{x}, {y}], speed: {speed}, radius: {radius}, "
            f"capabilities: [{ORG}]}}"
        )
    lines += [
        "pursuit:",
        f"  grid: [{size}, {size}]",
        "  k: 4",
        "  capture_quorum: 2",
        f"  evaders: [{{id: e1, position: [{ex}, {ey}], speed: 1}}]",
    ]
    return "\n".join(lines) + "\n"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(pathlib.Path(__file__).parent / "pursuit"))
    parser.add_argument("--count", type=int, default=24)
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for seed in range(1, args.count + 1):
        (out / f"pursuit_{seed:02d}.yaml").write_text(fixture(seed))


if __name__ == "__main__":
    main()
