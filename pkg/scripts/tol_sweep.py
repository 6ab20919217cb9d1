"""Classification type and algebra dimension across tolerances and curve counts."""
import argparse
from pathlib import Path

from walker_holonomy.algebra import lie_closure
from walker_holonomy.classify import classify
from walker_holonomy.dsl import parse_metric_spec
from walker_holonomy.report import default_point
from walker_holonomy.transport import sample_holonomy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("corpus", nargs="?", default=Path(__file__).parents[1] / "corpus", type=Path)
    ap.add_argument("--tols", type=float, nargs="+", default=[1e-4, 1e-5, 1e-6, 1e-7])
    ap.add_argument("--curves", type=int, nargs="+", default=[8, 16])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cols = [(c, t) for c in args.curves for t in args.tols]
    print(f"{'spec':<10} " + " ".join(f"{f'{c}c/{t:.0e}':>11}" for c, t in cols))
    for path in sorted(args.corpus.glob("*.spec")):
        spec = parse_metric_spec(path.read_text())
        base = default_point(spec.n)
        cells = []
        for c in args.curves:
            elements = sample_holonomy(spec, base, c, args.seed).elements
            for t in args.tols:
                rep = classify(lie_closure(elements, t, n=spec.n), spec.n, t)
                typ = "ind" if rep.type == "indeterminate" else str(rep.type)
                cells.append(f"{typ}:{rep.algebra_dim}")
        print(f"{path.stem:<10} " + " ".join(f"{x:>11}" for x in cells))


if __name__ == "__main__":
    main()
