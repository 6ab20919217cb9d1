"""Classify every spec in a directory and print one row per spec."""
import argparse
import time
from pathlib import Path

from walker_holonomy.algebra import lie_closure
from walker_holonomy.classify import classify
from walker_holonomy.dsl import parse_metric_spec
from walker_holonomy.propositions import check_prop1, check_prop2, check_prop3, sample_points
from walker_holonomy.report import default_point
from walker_holonomy.transport import sample_holonomy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("corpus", nargs="?", default=Path(__file__).parents[1] / "corpus", type=Path)
    ap.add_argument("--curves", type=int, default=16)
    ap.add_argument("--tol", type=float, default=1e-5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'spec':<10} {'type':>13} {'dim':>4} {'h':>3} {'prop1':>6} {'prop2':>6} "
          f"{'prop3':>6} {'secs':>6}")
    for path in sorted(args.corpus.glob("*.spec")):
        t0 = time.perf_counter()
        spec = parse_metric_spec(path.read_text())
        base = default_point(spec.n)
        sample = sample_holonomy(spec, base, args.curves, args.seed)
        rep = classify(lie_closure(sample.elements, args.tol, n=spec.n), spec.n, args.tol)
        p1 = check_prop1(spec, sample_points(sample), args.tol).verdict
        p2 = check_prop2(spec, base, tol=args.tol, sample=sample).verdict
        p3 = check_prop3(spec, base, tol=args.tol, sample=sample).verdict
        secs = time.perf_counter() - t0
        print(f"{path.stem:<10} {str(rep.type):>13} {rep.algebra_dim:>4} {rep.h_dim:>3} "
              f"{str(p1):>6} {str(p2):>6} {str(p3):>6} {secs:>6.2f}")


if __name__ == "__main__":
    main()
