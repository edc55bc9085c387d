import pickle
import random
from fractions import Fraction as F

import pytest

from condtypes.cps import ConditioningFamily, Cps, FiniteSpace, Measure
from condtypes.extension import base_prefix
from condtypes.hierarchy import (
    HierarchyPrefix,
    Partition,
    PrefixError,
    check_prefix_coherence,
    dirac_tower,
    level_from_masses,
    pushforward_under_partition,
    truncate,
    unfold,
)
from condtypes.io import parse_prefix, serialize_prefix
from condtypes.structure import TypeStructure

from oracles import unfold_direct


@pytest.fixture
def split_example():
    """Two player-1 types that disagree on S; player 2 is sure of (a, t1)."""
    return TypeStructure(
        ["a", "b"],
        [[["a", "b"]], [["a", "b"]]],
        [["t1", "t1'"], ["t2"]],
        [
            {
                "t1": {("a", "b"): {("a", "t2"): F(1, 3), ("b", "t2"): F(2, 3)}},
                "t1'": {("a", "b"): {("a", "t2"): F(1, 2), ("b", "t2"): F(1, 2)}},
            },
            {"t2": {("a", "b"): {("a", "t1"): 1}}},
        ],
    )


def test_one_point_space_gives_dirac_towers(friedenberg):
    for n in (1, 2, 3, 5):
        a, b = unfold(friedenberg, n)
        assert set(a.values()) == {dirac_tower(friedenberg.frame, 0, n)}
        assert set(b.values()) == {dirac_tower(friedenberg.frame, 1, n)}


def test_first_order_on_one_point(friedenberg):
    a, _ = unfold(friedenberg, 1)
    p = a["t'_a"]
    assert p.order == 1
    assert p.levels[0][frozenset({"s"})] == Measure.dirac(friedenberg.space, "s")


def test_second_order_belief_points_at_first_order_prefix(split_example):
    h1, h2 = unfold(split_example, 2)
    first = h1["t1"].levels[0]
    assert first[frozenset("ab")].as_dict() == {"a": F(1, 3), "b": F(2, 3)}
    q = unfold(split_example, 1)[0]["t1"]
    lvl = h2["t2"].levels[1]
    assert lvl.conditionals[0].as_dict() == {("a", q): 1}
    assert h1["t1"] != h1["t1'"]


def test_interning_gives_identity():
    ts_a = TypeStructure(["s"], [[["s"]], [["s"]]], [["x"], ["y"]], [{"x": {("s",): {("s", "y"): 1}}}, {"y": {("s",): {("s", "x"): 1}}}])
    ts_b = TypeStructure(["s"], [[["s"]], [["s"]]], [["u", "v"], ["w"]], [
        {"u": {("s",): {("s", "w"): 1}}, "v": {("s",): {("s", "w"): 1}}},
        {"w": {("s",): {("s", "u"): F(1, 2), ("s", "v"): F(1, 2)}}},
    ])
    pa, pb = unfold(ts_a, 4), unfold(ts_b, 4)
    assert pa[0]["x"] is pb[0]["u"] is pb[0]["v"]
    assert pa[1]["y"] is pb[1]["w"]


def test_truncate_identity_and_consistency(structures):
    for ts in structures[:30]:
        deep = unfold(ts, 4)
        for m in (1, 2, 3):
            shallow = unfold(ts, m)
            for i in (0, 1):
                for t, p in deep[i].items():
                    assert truncate(p, 4) is p
                    assert truncate(p, m) == shallow[i][t]
    with pytest.raises(ValueError):
        truncate(deep[0][ts.types[0].points[0]], 5)


def _bad_prefix():
    s = FiniteSpace("ab")
    fam = ConditioningFamily(s, ["ab"])
    frame = TypeStructure(s, [fam, fam], [["x"], ["y"]], [{"x": {"ab": {("a", "y"): 1}}}, {"y": {"ab": {("a", "x"): 1}}}]).frame
    q = base_prefix(frame, 1)
    mu1 = Cps(s, fam, [{"a": 1}])
    mu2 = level_from_masses(frame, 0, [{("a", q): F(1, 2), ("b", q): F(1, 2)}])
    return frame, HierarchyPrefix(frame, 0, (mu1, mu2))


def test_incoherent_prefix_is_located():
    frame, p = _bad_prefix()
    report = check_prefix_coherence(p)
    assert not report.valid
    v = report.violations[0]
    assert v.kind == "incoherent"
    assert v.witness[0] == 1
    assert v.witness[1] == frozenset("ab")
    assert check_prefix_coherence(truncate(p, 1)).valid


def test_prefix_shape_is_enforced():
    frame, p = _bad_prefix()
    with pytest.raises(PrefixError):
        HierarchyPrefix(frame, 0, ())
    with pytest.raises(PrefixError):
        # the second level ranges over player 1's own prefixes, not the other player's
        wrong = level_from_masses(frame, 0, [{("a", truncate(p, 1)): 1}])
        HierarchyPrefix(frame, 0, (p.levels[0], wrong))


def test_unfolded_prefixes_are_coherent(structures):
    for ts in structures[:40]:
        for i in (0, 1):
            for p in unfold(ts, 4)[i].values():
                assert check_prefix_coherence(p).valid


def test_partition_pushforward_trivial_and_discrete(split_example):
    ts = split_example
    mu = ts.belief(0, "t1")
    triv = pushforward_under_partition(mu, Partition.trivial(ts.types[1]))
    assert triv.conditionals[0].as_dict() == {("a", 0): F(1, 3), ("b", 0): F(2, 3)}
    disc = pushforward_under_partition(mu, Partition.discrete(ts.types[1]), {0: "t2"})
    assert disc == mu
    nu = ts.belief(1, "t2")
    lumped = pushforward_under_partition(nu, Partition.trivial(ts.types[0]))
    assert lumped.conditionals[0].as_dict() == {("a", 0): 1}
    split = pushforward_under_partition(nu, Partition.from_labels(ts.types[0], ["x", "y"]))
    assert split.conditionals[0].as_dict() == {("a", 0): 1}


def test_partition_over_wrong_types_rejected(split_example):
    with pytest.raises(ValueError):
        pushforward_under_partition(split_example.belief(0, "t1"), Partition.trivial(split_example.types[0]))


def test_unfold_matches_direct_computation(structures):
    for ts in structures:
        for n in (1, 2, 3):
            got = unfold(ts, n)
            want = unfold_direct(ts, n)
            for i in (0, 1):
                assert got[i] == want[i]


def test_serialization_round_trip(structures):
    for ts in structures[:25]:
        for i in (0, 1):
            for p in unfold(ts, 3)[i].values():
                text = serialize_prefix(p)
                back = parse_prefix(text)
                assert back is p
                assert serialize_prefix(back) == text


def test_prefixes_pickle_to_the_same_object(split_example):
    p = unfold(split_example, 3)[1]["t2"]
    assert pickle.loads(pickle.dumps(p)) is p


def test_canonical_order_is_total_and_stable(structures):
    rng = random.Random(3)
    pool = {p for ts in structures[:20] for p in unfold(ts, 2)[0].values()}
    pool = list(pool)
    a = sorted(pool)
    rng.shuffle(pool)
    assert sorted(pool) == a
