"""Same value function, three different mechanisms.

Three quadratic models of two correlated Gaussian features all give
v(1) = 0.7, v(2) = 0.3 and v(1, 2) = 1.0, so any importance score built
from the value function alone (LOCO, SAGE, ...) cannot tell them apart.
Their (Int, CP, CO) triples differ clearly.

    python demos/04_quadratic_trio.py --n 100000
"""

from dipdecomp import synthetic as syn

from _common import HEADER, estimate_row, fit_two, oracle_row, parser


def main():
    args = parser(__doc__.splitlines()[0]).parse_args()
    print(HEADER)
    for which in (1, 2, 3):
        q = syn.QUADRATIC_TRIO[which]
        print(f"Q{which}: Y = {q.a1:g} x1 + {q.a2:g} x2 + {q.b1:g} x1^2 + {q.b2:g} x2^2 + {q.c:g} x1 x2")
        data = syn.gen_quadratic_trio(which, args.n, seed=args.seed)
        print(oracle_row(f"  Q{which} (closed form)", syn.oracle_quadratic(q)))
        print(estimate_row(f"  Q{which} (fit)", fit_two(data, args.seed, args.rounds)))


if __name__ == "__main__":
    main()
