"""Write one comparison CSV per cost metric and report which protocol is cheapest."""
import argparse
from pathlib import Path

from mqka.costmodel import CostMetric, comparison_table, minimal_protocols, parse_range, write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("results/cost"))
    ap.add_argument("--n", default="2..10")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    ns = parse_range(args.n)
    for metric in CostMetric:
        rows = comparison_table(metric, ns)
        path = args.out / f"{metric.value}.csv"
        with open(path, "w", newline="") as fh:
            write_csv(rows, fh)
        winners = {r[0]: "/".join(p.value for p in minimal_protocols(r)) for r in rows}
        print(f"{metric.value:14s} -> {path}")
        print("   cheapest: " + ", ".join(f"N={n}:{w}" for n, w in winners.items()))


if __name__ == "__main__":
    main()
