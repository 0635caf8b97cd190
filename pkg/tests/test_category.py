import numpy as np
import pytest

from qwcat.category import (
    ModelWalk,
    Pairing,
    common_divisor,
    decompose,
    has_uniform_intertwiner,
    intertwiner_space,
    is_indecomposable,
    similarity,
    split_model,
    translation_shift,
    verify_intertwiner,
)
from qwcat.errors import DimensionMismatch, WindowTooSmall
from qwcat.registry import coin_decomposable, resolve
from qwcat.spectral import EigenvalueFunction
from qwcat.symbol import direct_sum, make_walk

from closed_forms import decomposable_branch, match_closed_forms

PI = np.pi


@pytest.fixture(scope="module")
def dec():
    cache = {}

    def get(ref):
        if ref not in cache:
            cache[ref] = decompose(resolve(ref), 2048)
        return cache[ref]

    return get


@pytest.fixture(scope="module")
def s3_grover4():
    return has_uniform_intertwiner(resolve("@s3-walk"), resolve("@grover4"), 2048)


def sampled(f, period=2 * PI, grid=4096):
    k = 2 * PI / grid * np.arange(int(round(period / (2 * PI))) * grid)
    return EigenvalueFunction(f(k), period, grid)


def test_decomposable_walk_parts(dec):
    d = dec("@coin-decomposable(0.6)")
    assert [p.period for p in d.parts] == [pytest.approx(2 * PI)] * 2
    forms = [(decomposable_branch(0.6, s), 2 * PI) for s in (1, -1)]
    assert match_closed_forms(d.spectrum, forms) <= 1e-8


def test_coin_is_one_model_walk(dec):
    (p,) = dec("@coin(0.6)").parts
    assert p.period == pytest.approx(4 * PI) and p.minimal


def test_grover4_four_parts(dec):
    parts = dec("@grover4").parts
    assert len(parts) == 4 and all(p.period == pytest.approx(2 * PI) for p in parts)
    consts = sorted(p.eigenfunction.constant_value().real for p in parts if p.is_constant)
    assert consts == pytest.approx([-1.0, 1.0])
    assert sorted(p.eigenfunction.winding for p in parts if not p.is_constant) == [-1, 1]


@pytest.mark.parametrize("ref", ["@coin(0.6)", "@grover3", "@grover4", "@cube", "@s3-walk", "@identity"])
def test_dimension_count(dec, ref):
    assert dec(ref).dimension_count() == resolve(ref).n


def test_split_cube(dec):
    spec = dec("@cube").spectrum
    parts = split_model(ModelWalk(spec.branches[0], 6 * PI))
    assert len(parts) == 2
    assert all(p.period == pytest.approx(3 * PI) for p in parts)
    assert [p.copy for p in parts] == [0, 1]


def test_split_coin_and_constant(dec):
    m = dec("@coin(0.6)").parts[0]
    assert split_model(m) == [m]
    const = next(p for p in dec("@grover3").parts if p.is_constant)
    assert split_model(const) == [const] and const.is_constant


def test_translation_shift_identity(dec):
    lam = dec("@coin(0.6)").parts[0].eigenfunction
    assert translation_shift(lam, lam) == 0.0


def test_translation_shift_synthetic():
    f = decomposable_branch(0.6, 1)
    l = translation_shift(sampled(f), sampled(lambda k: f(k - PI / 3)))
    assert l == pytest.approx(PI / 3, abs=1e-8)
    # shifts are reported modulo the period
    l = translation_shift(sampled(f), sampled(lambda k: f(k + PI / 3)))
    assert l == pytest.approx(2 * PI - PI / 3, abs=1e-8)


def test_translation_shift_rejects_other_coin():
    a = sampled(decomposable_branch(0.6, 1))
    for s in (1, -1):
        assert translation_shift(a, sampled(decomposable_branch(0.8, s))) is None


def test_translation_shift_period_mismatch(dec):
    a = dec("@coin(0.6)").parts[0].eigenfunction
    b = sampled(decomposable_branch(0.6, 1))
    assert translation_shift(a, b) is None


def test_intertwiner_space_cases(dec):
    coin = dec("@coin(0.6)").parts[0]
    desc = intertwiner_space(coin, coin)
    assert desc.kind == "translation" and desc.shift == 0.0
    g4 = dec("@grover4").parts
    plus = next(p for p in g4 if not p.is_constant and p.eigenfunction.winding == 1)
    one = next(p for p in g4 if p.is_constant and p.eigenfunction.constant_value().real > 0)
    minus_one = next(p for p in g4 if p.is_constant and p.eigenfunction.constant_value().real < 0)
    assert intertwiner_space(one, minus_one).kind == "none"
    assert intertwiner_space(one, one).exists
    assert intertwiner_space(plus, minus_one).kind == "none"
    cube_branch = dec("@cube").spectrum.branches[0]
    with pytest.raises(ValueError):
        intertwiner_space(ModelWalk(cube_branch, 6 * PI), ModelWalk(cube_branch, 6 * PI))


def test_s3_walk_into_grover4(s3_grover4):
    rep = s3_grover4
    assert rep.verdict
    pairs = [(rep.source.parts[p.part1].eigenfunction.winding, rep.target.parts[p.part2].eigenfunction.winding) for p in rep.pairs]
    assert sorted(pairs) == [(-1, -1), (1, 1)]
    assert all(p.shift == pytest.approx(0.0, abs=1e-8) for p in rep.pairs)


def test_no_intertwiner_between_coin_variants():
    rep = has_uniform_intertwiner(coin_decomposable(0.6), coin_decomposable(0.8), 2048)
    assert not rep.verdict and rep.pairs == []
    assert common_divisor(coin_decomposable(0.6), coin_decomposable(0.8), 2048) == []


def test_self_intertwiner():
    w = resolve("@coin(0.6)")
    rep = has_uniform_intertwiner(w, w, 2048)
    assert rep.verdict and [(p.part1, p.part2) for p in rep.pairs] == [(0, 0)]
    assert verify_intertwiner(rep, window=128, states=5) <= 1e-12


def test_intertwiner_needs_one_dimension():
    with pytest.raises(DimensionMismatch):
        has_uniform_intertwiner(resolve("@grover2d"), resolve("@grover2d"))


@pytest.mark.parametrize("ref,expected", [
    ("@coin(0.6)", True), ("@coin-decomposable(0.6)", False), ("@cube", False),
    ("@shift", True), ("@identity", True), ("@grover3", False),
])
def test_indecomposable(ref, expected):
    assert is_indecomposable(resolve(ref), 2048) is expected


def test_common_divisor_s3_grover4():
    parts = common_divisor(resolve("@s3-walk"), resolve("@grover4"), 2048)
    assert sorted(p.eigenfunction.winding for p in parts) == [-1, 1]
    assert all(p.period == pytest.approx(2 * PI) for p in parts)


def test_common_divisor_self(dec):
    parts = common_divisor(resolve("@grover4"), resolve("@grover4"), 2048)
    assert len(parts) == len(dec("@grover4").parts)


def test_verify_s3_grover4(s3_grover4):
    assert verify_intertwiner(s3_grover4, window=256, states=20, seed=0) <= 1e-6


def test_mismatched_pairing_fails(s3_grover4):
    rep = s3_grover4
    (a, b) = rep.pairs
    swapped = [Pairing(a.part1, b.part2, 0.0), Pairing(b.part1, a.part2, 0.0)]
    assert verify_intertwiner(rep, swapped, window=256, states=5) > 0.1


def test_multiplier_family(s3_grover4):
    f = lambda u: 0.4 + np.exp(1j * np.cos(u)) * np.sin(2 * u)
    assert verify_intertwiner(s3_grover4, window=128, states=5, multiplier=f) <= 1e-6


def test_split_parts_intertwine():
    w = resolve("@cube")
    rep = has_uniform_intertwiner(w, w, 2048)
    assert len(rep.pairs) == 4
    assert verify_intertwiner(rep, window=128, states=5) <= 1e-6
    # a single copy-to-copy map is an intertwiner on its own
    assert verify_intertwiner(rep, [rep.pairs[1]], window=128, states=5) <= 1e-6


def test_window_too_small(s3_grover4):
    with pytest.raises(WindowTooSmall):
        verify_intertwiner(s3_grover4, window=8, states=1)


def test_direct_sum_decomposition_is_union(dec):
    w = direct_sum(resolve("@coin(0.6)"), resolve("@grover3"))
    parts = decompose(w, 2048).parts
    union = dec("@coin(0.6)").parts + dec("@grover3").parts
    assert len(parts) == len(union)
    used = set()
    for p in parts:
        j = next(j for j, q in enumerate(union) if j not in used and abs(p.period - q.period) < 1e-9 and intertwiner_space(p, q).exists)
        used.add(j)


def conjugated(w, v):
    """The walk V U V^* for a constant unitary V."""
    n = w.n
    entries = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = {}
            for p in range(n):
                for q in range(n):
                    for shift, coeff in w.entries[p][q].as_dict().items():
                        acc[shift] = acc.get(shift, 0) + v[i, p] * coeff * np.conj(v[j, q])
            row.append(acc)
        entries.append(row)
    return make_walk(entries, name=f"{w.name}-conjugated")


def test_similarity_reflexive_and_chain():
    a, b = resolve("@coin(0.6)"), resolve("@s3-walk")
    c, s = np.cos(0.3), np.sin(0.3)
    w1 = direct_sum(a, b)
    w2 = direct_sum(b, a)
    w3 = direct_sum(conjugated(b, np.array([[c, -s], [s, c]])), a)
    assert similarity(w1, w1, 2048).verdict
    assert similarity(w1, w2, 2048).verdict
    assert similarity(w2, w3, 2048).verdict
    rep = similarity(w1, w3, 2048, verify=True, window=128, states=3)
    assert rep.verdict and rep.defect <= 1e-6
    assert not similarity(a, b, 2048).verdict
