#!/usr/bin/env python3
"""End-to-end demo: generate one synthetic batch, compute advantages through
the wire format, and render the first group's heatmap.

Usage:
    python scripts/make_demo_heatmap.py [--out demo_heatmap.html]
"""

import argparse
import tempfile
from pathlib import Path

from ktae.cli import main as cli
from ktae.records import group_record_line
from ktae.synth import SynthSpec, generate


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="demo_heatmap.html")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    spec = SynthSpec(seed=args.seed, num_groups=4, base_vocab=80, rollout_len_range=(16, 28))
    with tempfile.TemporaryDirectory() as tmp:
        groups_path = Path(tmp) / "groups.jsonl"
        adv_path = Path(tmp) / "advantages.jsonl"
        with open(groups_path, "w", encoding="utf-8") as handle:
            for group in generate(spec):
                handle.write(group_record_line(group) + "\n")
        assert cli(["compute", "--input", str(groups_path), "--output", str(adv_path), "--stats"]) == 0
        assert cli([
            "visualize",
            "--input", str(groups_path),
            "--advantages", str(adv_path),
            "--group", "synth-0000",
            "--output", args.out,
        ]) == 0
    print(f"open {args.out} in a browser; token {spec.planted_positive[0]} should be the "
          f"darkest green, token {spec.planted_negative[0]} the darkest red")


if __name__ == "__main__":
    main()
