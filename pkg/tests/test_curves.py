"""Point counting against exhaustive oracles, reductions, and the registry."""
import pytest

from eclab.curves import (
    BadReductionError,
    ReducedCurve,
    SingularCurveError,
    WeierstrassCurve,
    _count_bsgs,
    _short_model,
    builtin_curves,
    count_points,
    discriminant,
    get_curve,
    load_curve_file,
    naive_count,
    parse_curve_line,
    reduce_mod,
    trace_record,
)
from eclab.primes import primes_up_to

LABELS = ("37a", "389a", "5077a", "11a", "32a")

# Verified against an exhaustive double loop in this file's own oracle below.
KNOWN_37A_TRACES = {
    2: -2, 3: -3, 5: -2, 7: -1, 11: -5, 13: -2, 17: 0, 19: 0,
    23: 2, 29: 6, 31: -4, 41: -9, 43: 2, 47: -9,
}


def brute_count(curve: WeierstrassCurve, p: int) -> int:
    """O(p^2) oracle: test the long Weierstrass equation at every (x, y)."""
    a1, a2, a3, a4, a6 = (c % p for c in curve.coefficients())
    total = 1  # point at infinity
    for x in range(p):
        rhs = (x * x * x + a2 * x * x + a4 * x + a6) % p
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y - rhs) % p == 0:
                total += 1
    return total


def least_nonresidue(p: int) -> int:
    for d in range(2, p):
        if pow(d, (p - 1) // 2, p) == p - 1:
            return d
    raise AssertionError(f"no nonresidue modulo {p}")


def test_discriminant_examples():
    assert discriminant(0, 0, 1, -1, 0) == 37
    assert discriminant(0, 0, 0, -1, 1) == -368
    assert discriminant(0, 0, 0, 0, 0) == 0


def test_singular_curve_rejected():
    with pytest.raises(SingularCurveError):
        WeierstrassCurve(0, 0, 0, 0, 0)
    with pytest.raises(SingularCurveError):
        WeierstrassCurve(0, 0, 0, -3, 2)  # disc = -16(4*(-27) + 27*4) = 0


def test_count_points_hand_examples():
    # y^2 = x^3 + x + 1 over F_5 has 9 points, so a_5 = -3
    c = WeierstrassCurve(0, 0, 0, 1, 1)
    assert count_points(reduce_mod(c, 5)) == 9
    assert brute_count(c, 5) == 9
    assert trace_record(c, 5) == (5, -3, 9)
    # y^2 = x^3 + x over F_3 has 4 points
    c2 = WeierstrassCurve(0, 0, 0, 1, 0)
    assert count_points(reduce_mod(c2, 3)) == 4
    assert brute_count(c2, 3) == 4


@pytest.mark.parametrize("label", LABELS)
def test_count_points_matches_exhaustive_oracle(label):
    curve = get_curve(label)
    for p in primes_up_to(97):
        rc = reduce_mod(curve, p)
        if not rc.good:
            continue
        expected = brute_count(curve, p)
        assert count_points(rc) == expected, (label, p)
        assert naive_count(rc) == expected, (label, p)


@pytest.mark.parametrize("label", LABELS)
def test_fast_count_matches_naive_to_2000(label):
    curve = get_curve(label)
    for p in primes_up_to(2000):
        rc = reduce_mod(curve, p)
        if rc.good:
            assert count_points(rc) == naive_count(rc), (label, p)


def test_bsgs_matches_naive_below_and_above_cutoff():
    curve = get_curve("37a")
    sample = [p for p in primes_up_to(600) if p >= 5]
    sample += [p for p in primes_up_to(4400) if p > 4000]
    for p in sample:
        rc = reduce_mod(curve, p)
        if rc.good:
            assert _count_bsgs(rc) == naive_count(rc), p


def test_short_model_preserves_group_order():
    curve = get_curve("37a")
    for p in (5, 7, 11, 101, 997):
        rc = reduce_mod(curve, p)
        a, b = _short_model(rc)
        short = ReducedCurve(p, 0, 0, 0, a, b, True)
        assert naive_count(short) == naive_count(rc), p


def test_quadratic_twist_orders_sum_to_2p_plus_2():
    curve = get_curve("37a")
    for p in (p for p in primes_up_to(300) if p >= 5):
        rc = reduce_mod(curve, p)
        if not rc.good:
            continue
        a, b = _short_model(rc)
        d = least_nonresidue(p)
        twist = ReducedCurve(p, 0, 0, 0, a * d * d % p, b * d**3 % p, True)
        assert naive_count(rc) + naive_count(twist) == 2 * p + 2, p


@pytest.mark.parametrize("label", LABELS)
def test_hasse_window(label):
    curve = get_curve(label)
    for p in primes_up_to(2000):
        if reduce_mod(curve, p).good:
            rec = trace_record(curve, p)
            assert rec.a_p * rec.a_p <= 4 * p
            assert rec.n == p + 1 - rec.a_p
            assert rec.n / 16 <= p <= 16 * rec.n


def test_known_traces_for_37a():
    curve = get_curve("37a")
    for p, a in KNOWN_37A_TRACES.items():
        rec = trace_record(curve, p)
        assert rec.a_p == a, p
        assert rec.n == brute_count(curve, p), p


def test_reduce_mod_examples():
    c37 = get_curve("37a")
    rc = reduce_mod(c37, 5)
    assert (rc.a1, rc.a2, rc.a3, rc.a4, rc.a6) == (0, 0, 1, 4, 0)
    assert rc.good
    assert not reduce_mod(c37, 37).good
    assert not reduce_mod(WeierstrassCurve(0, 0, 0, -1, 1), 2).good  # -368 is even


def test_reduce_mod_requires_prime():
    with pytest.raises(ValueError):
        reduce_mod(get_curve("37a"), 4)


def test_bad_reduction_errors():
    rc = reduce_mod(get_curve("37a"), 37)
    with pytest.raises(BadReductionError):
        count_points(rc)
    with pytest.raises(BadReductionError):
        naive_count(rc)
    with pytest.raises(BadReductionError):
        trace_record(get_curve("37a"), 37)


def test_builtin_registry():
    curves = builtin_curves()
    assert set(curves) == set(LABELS)
    assert curves["37a"].coefficients() == (0, 0, 1, -1, 0)
    assert curves["37a"].serre_bound == 74
    assert curves["389a"].serre_bound == 778
    assert curves["5077a"].serre_bound == 10154
    assert curves["11a"].serre_bound == 110
    assert curves["32a"].serre_bound == 0
    assert curves["32a"].cm
    assert not curves["37a"].cm


def test_parse_curve_line():
    c = parse_curve_line("x1:1,2,3,4,5,cm=1,serre=99")
    assert c.label == "x1"
    assert c.coefficients() == (1, 2, 3, 4, 5)
    assert c.cm
    assert c.serre_bound == 99
    plain = parse_curve_line("p:0,0,1,-1,0")
    assert not plain.cm
    assert plain.serre_bound is None


@pytest.mark.parametrize(
    "line",
    [
        "no colon here",
        "lbl:1,2,3",
        "lbl:1,2,3,4,x",
        "lbl:1,2,3,4,5,bogus=1",
        ":1,2,3,4,5",
    ],
)
def test_parse_curve_line_rejects_malformed(line):
    with pytest.raises(ValueError):
        parse_curve_line(line)


def test_load_curve_file(tmp_path):
    path = tmp_path / "curves.txt"
    path.write_text("# comment\n\nw:0,0,1,-1,0,serre=74\nv:0,0,0,1,1\n")
    curves = load_curve_file(str(path))
    assert set(curves) == {"w", "v"}
    dup = tmp_path / "dup.txt"
    dup.write_text("w:0,0,1,-1,0\nw:0,0,0,1,1\n")
    with pytest.raises(ValueError):
        load_curve_file(str(dup))


def test_get_curve_unknown_label():
    with pytest.raises(KeyError) as exc:
        get_curve("zz9")
    assert "37a" in exc.value.args[0]
