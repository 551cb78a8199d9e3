"""Print the realized Lax operator next to the tabulated one, entry by entry,
and the Hamiltonian comparison, for every 1 <= m < N <= max N.

    python3 scripts/lax_tables.py --max-n 4 --only-differences
"""

import argparse

from grwhittaker.matelem import compare_hamiltonian, compare_lax


def main() -> None:
    ap = argparse.ArgumentParser(description="Lax operator and Hamiltonian tables")
    ap.add_argument("--max-n", type=int, default=4)
    ap.add_argument("--only-differences", action="store_true")
    ap.add_argument("--gauge", default="balanced", choices=("none", "prefactor", "balanced"))
    args = ap.parse_args()
    for N in range(2, args.max_n + 1):
        for m in range(1, N):
            print(f"=== Gr({m},{N})")
            for e in compare_lax(m, N):
                if args.only_differences and e.status in ("match", "unlisted"):
                    continue
                print(f"  L[{e.entry[0]},{e.entry[1]}] {e.status}")
                print(f"    realized: {e.realized}")
                if e.printed is not None:
                    print(f"    table:    {e.printed}")
            h = compare_hamiltonian(2, m, N, gauge=args.gauge)
            print(f"  H2 ({args.gauge} gauge): {h.status}, constant {h.realized_constant} vs {h.printed_constant}")
            for d in h.differences:
                print(f"    {d['term']}: {d['realized']} vs {d['printed']} ({d['status']})")


if __name__ == "__main__":
    main()
