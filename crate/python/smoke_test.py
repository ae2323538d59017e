"""Smoke test for the permwalk_py extension.

Build and install first, e.g.

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/permwalk_py-*.whl
    python python/smoke_test.py
"""

import itertools
import math
import random

import permwalk_py as pw


def textbook_t(x, y):
    m, n = len(x), len(y)
    mx, my = sum(x) / m, sum(y) / n
    ssd = sum((v - mx) ** 2 for v in x) + sum((v - my) ** 2 for v in y)
    return (mx - my) / math.sqrt(ssd / (m + n - 2) * (1 / m + 1 / n))


def pearson(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def check_permutations():
    p = pw.Permutation([2, 4, 1, 3])
    assert p.cycles() == [[1, 2, 4, 3]], p.cycles()
    assert (p * p.inverse()).is_identity()
    rng = random.Random(1)
    for _ in range(200):
        n = rng.randint(1, 12)
        images = list(range(1, n + 1))
        rng.shuffle(images)
        q = pw.Permutation(images)
        assert pw.Permutation.from_transpositions(n, q.transpositions()) == q
    try:
        pw.Permutation([1, 1, 2])
    except ValueError:
        pass
    else:
        raise AssertionError("non-bijection accepted")


def check_states():
    s = pw.TwoSampleState([1.0, 2.0, 3.0], [4.0, 5.0])
    s.swap(0, 1)
    assert s.x == [5.0, 2.0, 3.0] and s.y == [4.0, 1.0]
    assert abs(s.t_statistic() - textbook_t(s.x, s.y)) < 1e-12
    tw = pw.PairedState([0.1, 0.5, 0.9, 1.4], [0.2, 0.9, 0.4, 1.1])
    tw.flip(2)
    assert abs(tw.correlation() - pearson(tw.x, tw.y)) < 1e-12
    assert pw.direct_t([1.0, 1.0], [2.0, 2.0]) is None


def check_pvalues():
    rng = random.Random(7)
    x = [rng.gauss(0.5, 1) for _ in range(6)]
    y = [rng.gauss(0.0, 1) for _ in range(6)]
    observed = textbook_t(x, y)
    pooled = x + y
    hits = total = 0
    for idx in itertools.combinations(range(12), 6):
        xs = [pooled[i] for i in idx]
        ys = [pooled[i] for i in range(12) if i not in idx]
        total += 1
        hits += textbook_t(xs, ys) >= observed - 1e-12
    exact = hits / total
    p, assignments, _ = pw.exact_pvalue(x, y, comparison="at_least")
    assert assignments == 924 and abs(p - exact) < 1e-12, (p, exact)
    walk = pw.walk_pvalue(x, y, walks=400_000, seed=3)
    assert abs(walk.p_value - exact) < 0.01, (walk, exact)
    naive = pw.naive_pvalue(x, y, permutations=50_000, seed=3)
    assert abs(naive.p_value - exact) < 0.015, (naive, exact)


def check_field():
    rng = random.Random(11)
    xs = [[rng.gauss(2.0 if v < 2 else 0.0, 1) for _ in range(10)] for v in range(20)]
    ys = [[rng.gauss(0.0, 1) for _ in range(10)] for _ in range(20)]
    a = pw.field_ttest(xs, ys, walks=20_000, seed=5, correction=True)
    b = pw.field_ttest(xs, ys, walks=20_000, seed=5, correction=True, threads=4)
    assert a == b
    assert len(a["p_values"]) == 20
    assert all(c >= p for c, p in zip(a["corrected"], a["p_values"]))
    hi, lo = a["thresholds"]
    assert lo < 0 < hi


def check_twins():
    rng = random.Random(5)
    shared = [rng.gauss(0, 1) for _ in range(10)]
    x = [s + 0.5 * rng.gauss(0, 1) for s in shared]
    y = [s + 0.5 * rng.gauss(0, 1) for s in shared]
    exact = 0.0
    for mask in range(1 << 10):
        a = [y[k] if mask >> k & 1 else x[k] for k in range(10)]
        b = [x[k] if mask >> k & 1 else y[k] for k in range(10)]
        exact += pearson(a, b)
    exact /= 1 << 10
    mean, _ = pw.average_twin_correlation(x, y, walks=1_000_000, seed=1, report_every=10_000)
    assert abs(mean - exact) < 1e-3, (mean, exact)
    assert pw.heritability_index([0.8, 0.5], [0.4, 0.5]) == [0.8 - 0.4, 0.0]


def check_experiments():
    curve = pw.mixing_curve(200, 200, walks=600, reps=500, seed=2)
    assert curve[0] == 0.0 and curve[500] >= 0.45
    walks_per_s, naive_per_s, speedup = pw.throughput(walks=200_000, naive_perms=2_000)
    assert speedup > 1.0 and walks_per_s > naive_per_s


if __name__ == "__main__":
    for check in (check_permutations, check_states, check_pvalues, check_field, check_twins, check_experiments):
        check()
        print(f"ok  {check.__name__}")
    print(f"permwalk_py {pw.__version__}: all smoke checks passed")
