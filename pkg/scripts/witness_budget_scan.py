"""How large a conjugating family does a transversal witness need?

For a boundary line span((x, 1)) the aimed rotation through step n
exists exactly when x p^{2n} has nonzero valuation, so three regimes
show up as the depth d = -v(x) varies:

  * shallow targets certify quickly (witness-found);
  * even d crosses a unit step after the first solve, breaking the
    Cauchy chain (the run stays inconclusive rather than splicing);
  * x itself is only known to precision - d digits, so deep targets can
    never reach the certification depth however many steps are allowed.
"""

import argparse

from buildinglab.building import GroupContext
from buildinglab.dynamics import classify
from buildinglab import chabauty as ch


def regime(verdict, budget):
    if verdict.status == "witness-found":
        return "certified"
    if verdict.first_n is None:
        return "no solve yet"
    if len(verdict.agreements) + 1 < budget - verdict.first_n:
        return "chain broken at unit crossing"
    return "window-capped"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-steps", type=int, default=18,
                    help="largest conjugating family to try")
    ap.add_argument("--depths", type=int, nargs="+",
                    default=[1, 2, 3, 4, 6, 9],
                    help="depths d; the target parameter is unit * p^-d")
    ap.add_argument("--unit", type=int, default=3)
    args = ap.parse_args()

    ctx = GroupContext(2, 5)
    spec = ch.so2_subgroup(ctx)
    certs = [classify(ctx.diag((-k, k))) for k in range(1, args.max_steps + 1)]

    print("target x = %d * 5^(-d); precision %d, certification depth %d"
          % (args.unit, ctx.precision, ctx.precision - 4))
    print("%5s %8s %8s %16s %10s  %s" % ("d", "first_n", "budget", "status",
                                         "agreement", "regime"))
    for d in args.depths:
        x = ctx.s(args.unit).shift(-d)
        target = ch.line_simplex(ctx, x)
        settled = None
        for budget in range(2, args.max_steps + 1):
            v = ch.check_transP(spec, certs[:budget], [target])[0]
            if v.status == "witness-found":
                settled = budget
                break
        v = ch.check_transP(spec, certs, [target])[0]
        agree = ("%g" % v.agreements[-1]) if v.agreements else "-"
        print("%5d %8s %8s %16s %10s  %s"
              % (d, v.first_n if v.first_n is not None else "-",
                 settled if settled is not None else ">%d" % args.max_steps,
                 v.status, agree, regime(v, args.max_steps)))


if __name__ == "__main__":
    main()
