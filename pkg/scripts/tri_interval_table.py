#!/usr/bin/env python3
"""Print the 64-row three-interval case table and the grid cross-check for each row."""

from maskriesz.tri_interval import case_table, sweep_canonical


def main():
    verdicts = {mem: c.verdict for mem, c in sweep_canonical(3)}
    print("branch,L1,L2,L3,case,grid_verdict")
    for r in case_table():
        sets = ",".join("{" + " ".join(map(str, sorted(m))) + "}" for m in r.membership)
        print(f"{r.branch},{sets},{r.tag.label()},{verdicts[r.membership]}")


if __name__ == "__main__":
    main()
