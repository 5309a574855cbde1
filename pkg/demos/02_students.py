"""Three toy exam-score tables with the same ingredients but different stories.

Each table has two binary features (did the student study? attend the
tutorial?) and a score that is a function of the two. Values are shown
unnormalized so they can be compared with the enumeration oracle directly.

* redundancy: the features mostly agree, so the second adds little.
* enhancement: X2 predicts nothing alone but sharpens what X1 says.
* interaction: the score depends on the combination of the two.

    python demos/02_students.py
"""

from dipdecomp import synthetic as syn

from _common import HEADER, estimate_row, fit_two, oracle_row, parser


def main():
    args = parser(__doc__.splitlines()[0], n=50000).parse_args()
    print(HEADER)
    for variant in ("redundancy", "enhancement", "interaction"):
        data = syn.gen_student(variant, args.n, seed=args.seed)
        r = fit_two(data, args.seed, args.rounds, normalize=False)
        print(oracle_row(f"{variant} (oracle)", syn.oracle_student(variant), normalize=False))
        print(estimate_row(f"{variant} (fit)", r))
    print("\nredundancy: CO > 0 (shared signal). enhancement: CO < 0 (suppression). "
          "interaction: Int > 0.")


if __name__ == "__main__":
    main()
