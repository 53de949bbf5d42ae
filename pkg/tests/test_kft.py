from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from keyfuse import (
    CapacityError,
    DimensionError,
    KeyDistribution,
    KeyRangeError,
    KeySpace,
    KftKind,
    KftSpec,
    NlSource,
    ValidationError,
    apply,
    check_laws,
    fuse_dist,
    fuse_keys,
    fuse_many,
    is_latin_square,
    is_leaked,
    min_entropy,
    point_mass,
    shannon_entropy,
    uniform,
    verify_latin_square,
)
from keyfuse.kft import default_permutation, table_laws
from oracles import brute_laws, brute_latin, exact_convolve, exact_fold, nonassociative_xor_witness, op_fn

TWO = KeySpace(2)
XOR2 = KftSpec(TWO, KftKind.XOR)
A_EXACT = [Fraction(1, 3), Fraction(1, 4), Fraction(1, 6), Fraction(1, 4)]
B_EXACT = [Fraction(0), Fraction(0), Fraction(0), Fraction(1)]
C_EXACT = [Fraction(1, 2), Fraction(1, 5), Fraction(1, 6), Fraction(2, 15)]
K_A, K_B, K_C = (KeyDistribution.from_probs(x) for x in (A_EXACT, B_EXACT, C_EXACT))

KIND_NAMES = {KftKind.XOR: "xor", KftKind.ADD_MOD: "add", KftKind.SUB_MOD: "sub"}


def all_specs(bits):
    space = KeySpace(bits)
    return [KftSpec(space, k) for k in (KftKind.XOR, KftKind.ADD_MOD, KftKind.SUB_MOD)] + [
        KftSpec(space, KftKind.PERMUTED, base=b) for b in (KftKind.XOR, KftKind.ADD_MOD, KftKind.SUB_MOD)
    ]


def oracle_op(k):
    base = k.base if k.kind is KftKind.PERMUTED else k.kind
    return op_fn(KIND_NAMES[base], k.space.size, k.permutation)


@st.composite
def dist_pairs(draw):
    n = draw(st.sampled_from([2, 3]))
    m = 1 << n
    out = []
    for _ in range(2):
        w = draw(st.lists(st.integers(0, 50), min_size=m, max_size=m).filter(any))
        out.append(KeyDistribution(KeySpace(n), np.array(w) / sum(w)))
    return out


class TestApply:
    def test_xor(self):
        assert apply(XOR2, 1, 3) == 2

    def test_add(self):
        assert apply(KftSpec(TWO, KftKind.ADD_MOD), 3, 2) == 1

    def test_sub(self):
        assert apply(KftSpec(TWO, KftKind.SUB_MOD), 1, 2) == 3

    @pytest.mark.parametrize("a", range(4))
    def test_xor_identity(self, a):
        assert apply(XOR2, a, 0) == a

    def test_permuted_default_rotation(self):
        k = KftSpec(TWO, KftKind.PERMUTED)
        assert k.permutation == (1, 2, 3, 0)
        assert apply(k, 1, 3) == 3  # rotate(1 ^ 3 = 2)

    @pytest.mark.parametrize("a,b", [(4, 0), (0, -1), (0, 4)])
    def test_range(self, a, b):
        with pytest.raises(KeyRangeError):
            apply(XOR2, a, b)

    def test_wide_keys(self):
        k = KftSpec(KeySpace(64), KftKind.ADD_MOD)
        assert apply(k, (1 << 64) - 1, 2) == 1

    def test_rows_match_apply(self):
        for k in all_specs(3):
            for a in range(8):
                assert list(k.row(a)) == [apply(k, a, b) for b in range(8)]


class TestSpecValidation:
    def test_bad_permutation(self):
        with pytest.raises(ValidationError):
            KftSpec(TWO, KftKind.PERMUTED, permutation=(0, 0, 1, 2))

    def test_permutation_only_for_permuted(self):
        with pytest.raises(ValidationError):
            KftSpec(TWO, KftKind.XOR, permutation=(0, 1, 2, 3))

    def test_accepts_string_kind(self):
        assert KftSpec(TWO, "add").kind is KftKind.ADD_MOD


class TestFuseDist:
    def test_k_ab_after_leaked_input(self):
        k_ab = fuse_dist(XOR2, K_A, K_B)
        np.testing.assert_allclose(k_ab.probs, [1 / 4, 1 / 6, 1 / 4, 1 / 3], atol=1e-15)
        assert min_entropy(k_ab) == pytest.approx(1.5849625007211562, abs=1e-12)

    def test_k_abc_against_exact_oracle(self):
        xor = op_fn("xor", 4)
        k_ab_exact = exact_convolve(xor, A_EXACT, B_EXACT)
        assert k_ab_exact == [Fraction(1, 4), Fraction(1, 6), Fraction(1, 4), Fraction(1, 3)]
        k_abc_exact = exact_convolve(xor, k_ab_exact, C_EXACT)
        assert k_abc_exact == [Fraction(11, 45), Fraction(2, 9), Fraction(23, 90), Fraction(5, 18)]
        k_abc = fuse_dist(XOR2, fuse_dist(XOR2, K_A, K_B), K_C)
        np.testing.assert_allclose(k_abc.probs, [float(x) for x in k_abc_exact], atol=1e-12)
        assert min_entropy(k_abc) == pytest.approx(1.8479969065549500, abs=1e-12)

    @pytest.mark.parametrize("k", all_specs(2) + all_specs(3), ids=repr)
    def test_uniform_absorbs(self, k):
        rng = np.random.default_rng(7)
        a = KeyDistribution(k.space, rng.dirichlet(np.ones(k.space.size)))
        u = uniform(k.space)
        assert fuse_dist(k, a, u).allclose(u, atol=1e-15)
        assert fuse_dist(k, u, a).allclose(u, atol=1e-15)

    @pytest.mark.parametrize("k", all_specs(2) + all_specs(3), ids=repr)
    def test_uniform_output_independent_of_other_input(self, k):
        # Joint law of (X, op(X, U)) factorises when U is uniform: conditioning on any
        # value of X leaves the output uniform.
        u = uniform(k.space)
        for v in range(k.space.size):
            assert fuse_dist(k, point_mass(k.space, v), u).allclose(u, atol=1e-15)

    @pytest.mark.parametrize("k", all_specs(2), ids=repr)
    def test_point_mass_is_a_permutation(self, k):
        for v in range(4):
            out = fuse_dist(k, K_A, point_mass(TWO, v))
            assert sorted(out.probs) == sorted(K_A.probs)
            assert shannon_entropy(out) == pytest.approx(shannon_entropy(K_A), abs=1e-12)

    def test_space_mismatch(self):
        with pytest.raises(DimensionError):
            fuse_dist(XOR2, K_A, uniform(KeySpace(3)))

    @pytest.mark.parametrize("bits", [2, 3, 4])
    def test_float_matches_exact_oracle(self, bits):
        rng = np.random.default_rng(bits)
        m = 1 << bits
        for k in all_specs(bits):
            for _ in range(5):
                wa, wb = rng.integers(0, 20, m) + (np.arange(m) == 0), rng.integers(0, 20, m) + 1
                ea = [Fraction(int(x), int(wa.sum())) for x in wa]
                eb = [Fraction(int(x), int(wb.sum())) for x in wb]
                exact = exact_convolve(oracle_op(k), ea, eb)
                got = fuse_dist(k, KeyDistribution.from_probs(ea), KeyDistribution.from_probs(eb))
                np.testing.assert_allclose(got.probs, [float(x) for x in exact], rtol=0, atol=1e-12)


@settings(max_examples=500, deadline=None)
@given(dist_pairs(), st.sampled_from(["xor", "add", "sub", "perm-xor", "perm-add"]))
def test_min_entropy_monotone(pair, name):
    a, b = pair
    if name.startswith("perm"):
        base = KftKind.XOR if name == "perm-xor" else KftKind.ADD_MOD
        k = KftSpec(a.space, KftKind.PERMUTED, base=base)
    else:
        k = KftSpec(a.space, name)
    out = fuse_dist(k, a, b)
    assert min_entropy(out) >= max(min_entropy(a), min_entropy(b)) - 1e-12


@settings(max_examples=200, deadline=None)
@given(dist_pairs(), st.sampled_from(["xor", "add"]))
def test_commutative_instances_symmetric(pair, name):
    a, b = pair
    k = KftSpec(a.space, name)
    np.testing.assert_allclose(fuse_dist(k, a, b).probs, fuse_dist(k, b, a).probs, rtol=0, atol=1e-12)


class TestFuseMany:
    def test_three_key_window(self):
        out = fuse_many(XOR2, [K_A, K_B, K_C])
        assert min_entropy(out) == pytest.approx(1.8479969065549500, abs=1e-12)
        assert min_entropy(out) >= max(map(min_entropy, (K_A, K_B, K_C)))

    def test_single(self):
        assert fuse_many(XOR2, [K_A]) is K_A

    def test_uniform_then_point_masses(self):
        u = uniform(TWO)
        assert fuse_many(XOR2, [u, point_mass(TWO, 1), point_mass(TWO, 2)]).allclose(u, atol=0)

    def test_empty(self):
        with pytest.raises(ValueError):
            fuse_many(XOR2, [])

    def test_left_fold_order_matters_for_sub(self):
        k = KftSpec(TWO, KftKind.SUB_MOD)
        exact = exact_fold(op_fn("sub", 4), [A_EXACT, C_EXACT, B_EXACT])
        got = fuse_many(k, [K_A, K_C, K_B])
        np.testing.assert_allclose(got.probs, [float(x) for x in exact], atol=1e-12)
        assert not fuse_many(k, [K_A, K_C, K_B]).allclose(fuse_many(k, [K_C, K_A, K_B]))

    def test_one_unleaked_input_protects_window(self):
        rng = np.random.default_rng(3)
        src = NlSource(KeySpace(3), 2.5)
        for _ in range(200):
            k = KftSpec(KeySpace(3), rng.choice(list(KftKind)))
            strong = uniform(KeySpace(3))
            weak = [point_mass(KeySpace(3), int(rng.integers(8))) for _ in range(rng.integers(1, 4))]
            ds = weak + [strong] + weak
            assert is_leaked(weak[0], src)
            assert not is_leaked(fuse_many(k, ds), src)


class TestFuseKeys:
    def test_xor(self):
        assert fuse_keys(XOR2, [1, 2, 3]) == 0

    def test_single(self):
        assert fuse_keys(KftSpec(TWO, KftKind.SUB_MOD), [2]) == 2

    def test_add_mod_sixteen(self):
        k = KftSpec(KeySpace(4), KftKind.ADD_MOD)
        assert fuse_keys(k, [5, 6]) == 11
        assert fuse_keys(k, [7, 8]) == 15
        assert fuse_keys(k, [9, 9]) == 2

    def test_empty(self):
        with pytest.raises(ValueError):
            fuse_keys(XOR2, [])

    def test_range(self):
        with pytest.raises(KeyRangeError):
            fuse_keys(XOR2, [1, 7])


class TestStructure:
    @pytest.mark.parametrize("bits", [1, 2, 3, 4])
    def test_all_kinds_latin(self, bits):
        for k in all_specs(bits):
            assert verify_latin_square(k)
            assert brute_latin(oracle_op(k), k.space.size)

    def test_and_table_is_not_latin(self):
        table = [[a & b for b in range(4)] for a in range(4)]
        assert not is_latin_square(table)
        assert not brute_latin(lambda a, b: a & b, 4)

    def test_latin_rejects_shapes_and_values(self):
        assert not is_latin_square([[0, 1, 2]])
        assert not is_latin_square([[0, 5], [5, 0]])
        assert not is_latin_square([[0, 1], [0, 1]])

    def test_latin_capacity(self):
        with pytest.raises(CapacityError):
            verify_latin_square(KftSpec(KeySpace(13)))

    def test_laws_capacity(self):
        with pytest.raises(CapacityError):
            check_laws(KftSpec(KeySpace(9)))

    def test_xor_laws(self):
        assert check_laws(XOR2) == (True, True)

    def test_sub_laws(self):
        assert brute_laws(op_fn("sub", 4), 4) == (False, False)
        assert check_laws(KftSpec(TWO, KftKind.SUB_MOD)) == (False, False)

    def test_permuted_witness(self):
        perm = nonassociative_xor_witness(4)
        assert perm is not None
        laws = check_laws(KftSpec(TWO, KftKind.PERMUTED, permutation=perm))
        assert laws == (True, False) == brute_laws(op_fn("xor", 4, perm), 4)

    def test_default_permutation_breaks_associativity(self):
        for bits in (2, 3):
            k = KftSpec(KeySpace(bits), KftKind.PERMUTED)
            assert k.permutation == default_permutation(k.space)
            assert check_laws(k) == (True, False)

    @pytest.mark.parametrize("bits", [1, 2, 3])
    def test_laws_match_brute_force(self, bits):
        for k in all_specs(bits):
            assert tuple(check_laws(k)) == brute_laws(oracle_op(k), k.space.size)

    def test_table_laws_on_non_latin(self):
        assert table_laws([[a & b for b in range(4)] for a in range(4)]) == (True, True)
