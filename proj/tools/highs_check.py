#!/usr/bin/env python3
"""Solve an exported LP file with HiGHS and compare the optimum to an expected value.

Exit codes: 0 match, 1 mismatch or solver failure, 77 when highspy is not installed.
"""
import argparse
import sys

try:
    import highspy
except ImportError:
    print("highspy not available, skipping")
    sys.exit(77)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("lp")
    ap.add_argument("--expect", type=float, required=True)
    ap.add_argument("--fix-zero", default="", help="variable name prefix to fix at 0")
    ap.add_argument("--tol", type=float, default=1e-6)
    ap.add_argument("--time-limit", type=float, default=600.0)
    args = ap.parse_args()

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("time_limit", args.time_limit)
    h.setOptionValue("mip_rel_gap", 0.0)
    if h.readModel(args.lp) != highspy.HighsStatus.kOk:
        print(f"cannot read {args.lp}")
        return 1
    if args.fix_zero:
        lp = h.getLp()
        for j, name in enumerate(lp.col_names_):
            if name.startswith(args.fix_zero):
                h.changeColBounds(j, 0.0, 0.0)
    h.run()
    status = h.getModelStatus()
    if status != highspy.HighsModelStatus.kOptimal:
        print(f"solver status {h.modelStatusToString(status)}")
        return 1
    obj = h.getInfo().objective_function_value
    ok = abs(obj - args.expect) <= args.tol
    print(f"objective {obj:g}, expected {args.expect:g}: {'ok' if ok else 'mismatch'}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
