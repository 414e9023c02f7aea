"""Spherical statistics of a gauge: M, b, quantiles, and hull ratios.

The hull ratio table is the heart of the package: for each t it
estimates the median gauge M_t of conv(K u tB_2) together with the
certified maximum b_t, and fits the constant in the lower bound
M_t >= c t sqrt(log(c'n/t^2)/n).
"""

import math

from banach import (
    HullBody,
    PNormBody,
    estimate_b,
    estimate_stats,
    john_transform,
    lemma1_ratio,
)
from banach.svgplot import write_plot


def main():
    body, cert = john_transform(PNormBody(1, 64))
    st = estimate_stats(body, 50000, 0, contacts=cert.contacts)
    print(f"John l1 n=64: mean={st.mean_M:.4f} median={st.median:.4f} "
          f"b={st.b_max:.4f} k_dvoretzky={st.k_dvoretzky:.1f}")
    print("quantiles:", {k: round(v, 4) for k, v in sorted(st.quantiles.items())})

    # b_t at contacts is exactly 1/t
    for t in (1.0, 2.0, 4.0, 8.0):
        bt = estimate_b(HullBody(body, t), contacts=cert.contacts, rng=0)
        print(f"  t={t:>4}: b_t={float(bt):.6f} certified={bt.certified}")

    tbl = lemma1_ratio(body, [2.0, 4.0, 8.0], 20000, 7, c_prime=4.0,
                       contacts=cert.contacts)
    print(f"\nhull ratio table (fitted c = {tbl.fitted_c:.3f}):")
    for r in tbl.rows:
        print(f"  t={r.t:>4}: M_t={r.m_t:.5f} b_t={r.b_t:.5f} "
              f"ratio={r.ratio:.3f} c_term={r.c_term:.3f}")

    ts = [r.t for r in tbl.rows]
    write_plot("hull_ratios.svg",
               [("M_t", ts, [r.m_t for r in tbl.rows]),
                ("b_t", ts, [r.b_t for r in tbl.rows])],
               title="hull statistics, John l1 n=64",
               xlabel="t", ylabel="gauge", logy=True)
    print("\nwrote hull_ratios.svg")


if __name__ == "__main__":
    main()
