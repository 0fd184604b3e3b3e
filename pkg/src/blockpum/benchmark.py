"""Scaling harness for the block structure build and range search.

For each problem size: build the structure over Halton data (timed),
run one fixed-radius query per subdomain center (timed, with candidate
counts), time the brute-force scan on a query subsample, and verify the
block search against brute force on another subsample.
"""

from __future__ import annotations

import time

import numpy as np

from .blockpart import blocks_per_side, brute_force_range_search, build, range_search
from .geometry import convex_hull, grid_on_rect, halton, reduce_to_domain
from .pum import _side_count, subdomain_radius, suggest_d_r


def run_search_benchmark(
    sizes,
    dim: int = 2,
    build_repeats: int = 3,
    brute_sample: int = 200,
    check_sample: int = 1000,
) -> dict:
    """Benchmark rows per size plus consecutive-size time ratios."""
    rows = []
    for n in sizes:
        pts = halton(int(n), dim)
        dom = convex_hull(pts)
        d_r = suggest_d_r(len(pts), dom.measure, dom.box.edge, dim)
        d_r_actual = _side_count(d_r, dim) ** dim
        delta = subdomain_radius(dom.box.edge, d_r_actual, dim)
        q = blocks_per_side(dom.box.edge, delta, "cover")

        t_build = np.inf
        for _ in range(build_repeats):
            t0 = time.perf_counter()
            bs = build(pts, dom.box, q)
            t_build = min(t_build, time.perf_counter() - t0)

        centers = reduce_to_domain(grid_on_rect(dom.rect, d_r_actual), dom).coords

        cand_total = 0
        cand_max = 0
        t0 = time.perf_counter()
        for c in centers:
            found = range_search(bs, c, delta)
            cand_total += found.candidates
            cand_max = max(cand_max, found.candidates)
        t_search = time.perf_counter() - t0

        stride = max(1, len(centers) // brute_sample)
        brute_queries = centers[::stride][:brute_sample]
        t0 = time.perf_counter()
        for c in brute_queries:
            brute_force_range_search(pts.coords, c, delta)
        t_brute = time.perf_counter() - t0

        stride = max(1, len(centers) // check_sample)
        mismatches = 0
        for c in centers[::stride][:check_sample]:
            got = range_search(bs, c, delta)
            want = brute_force_range_search(pts.coords, c, delta)
            if not (
                np.array_equal(got.indices, want.indices)
                and np.allclose(got.distances, want.distances, rtol=0, atol=1e-14)
            ):
                mismatches += 1

        rows.append(
            {
                "n": len(pts),
                "dim": dim,
                "q": q,
                "delta": delta,
                "n_queries": len(centers),
                "t_build_s": t_build,
                "t_search_total_s": t_search,
                "t_search_per_query_s": t_search / len(centers),
                "cand_mean": cand_total / len(centers),
                "cand_max": cand_max,
                "t_brute_per_query_s": t_brute / len(brute_queries),
                "brute_mismatches": mismatches,
            }
        )

    def ratios(key):
        vals = [r[key] for r in rows]
        return [vals[i + 1] / vals[i] if vals[i] > 0 else float("inf") for i in range(len(vals) - 1)]

    return {
        "rows": rows,
        "build_time_ratios": ratios("t_build_s"),
        "search_time_ratios": ratios("t_search_total_s"),
        "per_query_time_ratios": ratios("t_search_per_query_s"),
    }
