import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aqclust import (
    ClusterAssignment,
    DataSet,
    DegenerateAssignmentError,
    assignment_from_spins,
    brute_force,
    center,
    decode,
    encode,
    energy,
    gen_blobs,
    gram,
    ising_full,
    ising_reduced,
)
from aqclust.ising import IsingModel, Kernel, dump_model, energies, ket, load_model


def all_spins(q):
    return [np.array(s) for s in itertools.product((1, -1), repeat=q)]


def random_centered(rng, n, m=2):
    return center(DataSet(rng.normal(size=(m, n))))


class TestGram:
    def test_linear_centered_rows_sum_to_zero(self, blobs26):
        Q = gram(blobs26).q
        assert np.abs(Q @ np.ones(8)).max() <= 1e-9 * 8 * np.abs(Q).max()

    def test_orthonormal_identity(self):
        Q = gram(DataSet(np.eye(2))).q
        np.testing.assert_array_equal(Q, np.eye(2))

    def test_rbf_unit_diagonal(self, rng):
        Q = gram(DataSet(rng.normal(size=(3, 7))), "rbf:0.7").q
        assert (np.diag(Q) == 1.0).all()

    @pytest.mark.parametrize("kernel", ["linear", "rbf:2.0", "poly:3:1.5"])
    def test_exactly_symmetric(self, rng, kernel):
        Q = gram(DataSet(rng.normal(size=(4, 9))), kernel).q
        assert np.array_equal(Q, Q.T)

    def test_linear_psd(self, rng):
        Q = gram(DataSet(rng.normal(size=(3, 10)))).q
        assert np.linalg.eigvalsh(Q).min() >= -1e-9 * np.abs(Q).max()

    def test_poly_matches_formula(self, rng):
        X = rng.normal(size=(2, 5))
        Q = gram(DataSet(X), Kernel("poly", degree=2, c0=0.5)).q
        np.testing.assert_allclose(Q, (X.T @ X + 0.5) ** 2, rtol=1e-14)

    @pytest.mark.parametrize("bad", ["rbf:0", "rbf:-1", "poly:0:1", "poly:1.5:1", "cosine", "rbf"])
    def test_bad_kernels(self, bad):
        with pytest.raises(ValueError):
            Kernel.parse(bad)

    def test_kernel_str_roundtrip(self):
        for text in ["linear", "rbf:0.25", "poly:3:2.0"]:
            assert str(Kernel.parse(text)) == text


class TestFullModel:
    def test_line_energy(self, line4):
        m = ising_full(gram(line4))
        assert energy(m, [1, 1, -1, -1]) == -36.0

    def test_line_ground_pair(self, line4):
        g = brute_force(ising_full(gram(line4)))
        assert g.min_energy == -36.0
        assert [ket(z, 4) for z in g.states] == ["0011", "1100"]

    def test_uniform_spins_zero(self, blobs26):
        m = ising_full(gram(blobs26))
        assert abs(energy(m, np.ones(8))) <= 1e-9 * np.abs(m.couplings).max() * 64

    def test_energy_is_minus_norm_sq(self, rng):
        d = random_centered(rng, 9, 3)
        m = ising_full(gram(d))
        for _ in range(50):
            s = rng.choice([-1, 1], size=9)
            ref = -np.sum((d.values @ s) ** 2)
            assert energy(m, s) == pytest.approx(ref, rel=1e-9, abs=1e-12)
            assert energy(m, s) <= 0

    def test_flip_symmetry(self, rng):
        m = ising_full(gram(random_centered(rng, 10)))
        for _ in range(200):
            s = rng.choice([-1, 1], size=10)
            assert energy(m, s) == energy(m, -s)

    def test_length_mismatch(self, line4):
        with pytest.raises(ValueError):
            energy(ising_full(gram(line4)), [1, -1])


class TestReducedModel:
    @pytest.mark.parametrize("n", [2, 3, 5, 8, 12])
    def test_embedding_exhaustive(self, n):
        rng = np.random.default_rng(n)
        G = gram(random_centered(rng, n))
        full = ising_full(G)
        for f in {0, n - 1, n // 2}:
            red = ising_reduced(G, f)
            e_red = energies(red, np.arange(1 << (n - 1)))
            e_full = np.array([energy(full, red.embed(decode(z, n - 1))) for z in range(1 << (n - 1))])
            np.testing.assert_allclose(e_red, e_full, rtol=1e-9, atol=1e-12 * np.abs(G.q).max())

    @pytest.mark.parametrize("q12", [-2.0, 0.5])
    def test_two_points_enumeration(self, q12):
        Q = np.array([[1.0, q12], [q12, 3.0]])
        from aqclust.ising import GramMatrix

        red = ising_reduced(GramMatrix(Q), fixed_index=1)
        e = {s: energy(red, [s]) for s in (1, -1)}
        # by hand: E(s1) = -Q11 - 2 Q12 s1 - Q22
        assert e[1] == -1.0 - 2 * q12 - 3.0
        assert e[-1] == -1.0 + 2 * q12 - 3.0
        g = brute_force(red)
        assert len(g.states) == 1
        assert decode(g.states[0], 1)[0] == np.sign(q12)

    def test_reduced_ground_in_full_pair(self, blobs26):
        G = gram(blobs26)
        full = brute_force(ising_full(G))
        for f in range(8):
            red = ising_reduced(G, f)
            g = brute_force(red)
            assert len(g.states) == 1
            s = red.embed(decode(g.states[0], 7))
            assert encode(s) in full.states
            assert g.min_energy == pytest.approx(full.min_energy, rel=1e-12)

    def test_out_of_range(self, line4):
        with pytest.raises(ValueError):
            ising_reduced(gram(line4), 4)

    def test_fields_and_offset(self, line4):
        Q = gram(line4).q
        red = ising_reduced(gram(line4), 3)
        np.testing.assert_array_equal(red.couplings, Q[:3, :3])
        np.testing.assert_array_equal(red.fields, 2 * Q[3, :3])
        assert red.offset == Q[3, 3]


class TestCodec:
    def test_fig_ket(self):
        s = decode(int("00111111", 2), 8)
        np.testing.assert_array_equal(s, [1, 1, -1, -1, -1, -1, -1, -1])

    def test_zero_all_up(self):
        assert (decode(0, 5) == 1).all()

    @settings(max_examples=200)
    @given(st.integers(1, 16).flatmap(lambda q: st.tuples(st.just(q), st.integers(0, (1 << q) - 1))))
    def test_roundtrip_and_complement(self, qz):
        q, z = qz
        s = decode(z, q)
        assert encode(s) == z
        np.testing.assert_array_equal(decode((1 << q) - 1 - z, q), -s)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            decode(8, 3)
        with pytest.raises(ValueError):
            encode([1, 0, -1])


class TestBruteForce:
    def test_blob_pair(self, blobs26):
        g = brute_force(ising_full(gram(blobs26)))
        assert len(g.states) == 2
        assert g.states[0] ^ g.states[1] == 255
        assert [ket(z, 8) for z in g.states] == ["00111111", "11000000"]

    def test_identity_all_tie(self):
        m = IsingModel(np.eye(6), np.zeros(6))
        g = brute_force(m)
        assert g.min_energy == -6.0
        assert g.states == tuple(range(64))

    def test_matches_enumeration(self, rng):
        J = rng.normal(size=(7, 7))
        m = IsingModel(J + J.T, rng.normal(size=7), 0.3)
        e = [energy(m, s) for s in all_spins(7)]
        g = brute_force(m)
        assert g.min_energy == pytest.approx(min(e), rel=1e-12)
        assert g.states == (int(np.argmin(e)),)

    def test_chunked_search(self):
        # 18 spins span several enumeration chunks
        rng = np.random.default_rng(5)
        d = center(DataSet(np.hstack([rng.normal(-2, 0.3, (2, 5)), rng.normal(1, 0.3, (2, 13))])))
        m = ising_full(gram(d))
        g = brute_force(m)
        assert len(g.states) == 2 and g.states[0] + g.states[1] == (1 << 18) - 1
        assert ket(g.states[0], 18) == "0" * 5 + "1" * 13

    def test_refuses_large(self):
        with pytest.raises(ValueError, match="refusing"):
            brute_force(IsingModel(np.zeros((27, 27)), np.zeros(27)))

    def test_argmin_is_argmax_norm(self, rng):
        for n in (4, 7, 10):
            d = random_centered(rng, n)
            g = brute_force(ising_full(gram(d)))
            norms = [np.sum((d.values @ s) ** 2) for s in all_spins(n)]
            best = max(norms)
            argmax = {i for i, v in enumerate(norms) if v >= best * (1 - 1e-9)}
            assert set(g.states) == argmax


class TestAssignmentFromSpins:
    def test_fig_bipartition(self):
        a = assignment_from_spins([1, 1, -1, -1, -1, -1, -1, -1])
        np.testing.assert_array_equal(a.labels, [1, 1, 2, 2, 2, 2, 2, 2])

    def test_flip_swaps_labels(self):
        s = np.array([1, -1, -1, 1, -1])
        a, b = assignment_from_spins(s), assignment_from_spins(-s)
        assert a.same_partition(b)
        np.testing.assert_array_equal(a.labels, 3 - b.labels)

    def test_fixed_point_inserted(self):
        a = assignment_from_spins([-1, -1, -1, -1, -1, -1, 1], fixed=(7, 1))
        assert a.n == 8 and a.labels[7] == 1
        np.testing.assert_array_equal(a.labels, [2, 2, 2, 2, 2, 2, 1, 1])

    def test_degenerate(self):
        with pytest.raises(DegenerateAssignmentError):
            assignment_from_spins([1, 1, 1])
        with pytest.raises(DegenerateAssignmentError):
            assignment_from_spins([1, 1], fixed=(0, 1))


class TestHeuristicExactness:
    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 16))
    def test_correction_factor(self, seed, n):
        from aqclust import scatter_stats

        rng = np.random.default_rng(seed)
        d = random_centered(rng, n, 3)
        labels = rng.integers(1, 3, size=n)
        labels[0], labels[-1] = 1, 2
        a = ClusterAssignment(labels)
        n1, n2 = a.sizes
        lhs = 2 * np.sum((d.values @ a.spins) ** 2)
        rhs = scatter_stats(d, a).s_b * 4 * n1 * n2 / n**2
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)


def test_dump_roundtrip(tmp_path, blobs26):
    red = ising_reduced(gram(blobs26), 0)
    text = dump_model(red, tmp_path / "m.txt")
    assert text.startswith("ising v1\n7\n")
    back = load_model((tmp_path / "m.txt").read_text())
    np.testing.assert_array_equal(back.couplings, red.couplings)
    np.testing.assert_array_equal(back.fields, red.fields)
    assert back.offset == red.offset
