import numpy as np
import pytest

from liefloquet.algebra import (
    AlgebraError,
    AntisymmetryViolation,
    DimensionMismatch,
    JacobiViolation,
    ad_matrix,
    algebra_from_dict,
    algebra_to_dict,
    bracket,
    build_algebra,
    center,
    is_semisimple,
    jacobi_residual,
    killing_gram,
    killing_pairing,
    preset_algebra,
    quotient_by_center,
)


def e(i, n=3):
    v = np.zeros(n)
    v[i - 1] = 1.0
    return v


class TestBuildAlgebra:
    def test_sp1r_valid(self, sp1r):
        # [e1,e2] = -e3, [e2,e3] = e1, [e3,e1] = e2
        assert sp1r.dim == 3
        assert np.array_equal(bracket(sp1r, e(1), e(2)), -e(3))
        assert np.array_equal(bracket(sp1r, e(2), e(3)), e(1))
        assert np.array_equal(bracket(sp1r, e(3), e(1)), e(2))

    def test_abelian_zero_tensor(self):
        a = build_algebra(2, np.zeros((2, 2, 2)))
        assert np.array_equal(bracket(a, np.array([1.0, 2.0]), np.array([3.0, 4.0])), np.zeros(2))

    def test_antisymmetry_violation_reports_indices(self):
        lam = np.zeros((3, 3, 3))
        lam[0, 1, 2] = 1.0
        lam[1, 0, 2] = 1.0  # equal instead of sign-flipped
        with pytest.raises(AntisymmetryViolation) as exc:
            build_algebra(3, lam)
        assert exc.value.indices == (1, 2, 3)

    def test_jacobi_violation_reports_indices(self):
        # perturb both orderings of one sp(1,R) entry so antisymmetry survives
        lam = np.array(preset_algebra("sp1R").constants)
        lam[1, 2, 0] += 1e-3
        lam[2, 1, 0] -= 1e-3
        with pytest.raises(JacobiViolation) as exc:
            build_algebra(3, lam)
        assert len(exc.value.indices) == 4
        assert exc.value.residual > 1e-12

    def test_jacobi_tolerance_is_relaxable(self):
        lam = np.array(preset_algebra("sp1R").constants)
        lam[1, 2, 0] += 1e-3
        lam[2, 1, 0] -= 1e-3
        a = build_algebra(3, lam, jacobi_tol=1e-2)
        assert a.dim == 3

    def test_shape_mismatch(self):
        with pytest.raises(AlgebraError):
            build_algebra(3, np.zeros((2, 2, 2)))

    def test_constants_frozen(self, sp1r):
        with pytest.raises(ValueError):
            sp1r.constants[0, 0, 0] = 1.0


class TestBracket:
    def test_self_bracket_vanishes(self, sp1r, rng):
        for _ in range(5):
            x = rng.uniform(-3, 3, size=3)
            assert np.abs(bracket(sp1r, x, x)).max() == 0.0

    def test_so3_bilinear_expansion(self, so3):
        # [e1+e2, e3] = [e1,e3] + [e2,e3] = -e2 + e1
        got = bracket(so3, e(1) + e(2), e(3))
        assert np.allclose(got, e(1) - e(2), atol=0.0)

    def test_dimension_mismatch(self, sp1r):
        with pytest.raises(DimensionMismatch):
            bracket(sp1r, np.zeros(2), np.zeros(3))

    def test_vector_level_jacobi(self, sp1r, so3, heis, rng):
        for algebra in (sp1r, so3, heis):
            sample = rng.uniform(-1, 1, size=(20, 3, 3))
            for x, y, z in sample:
                total = (
                    bracket(algebra, x, bracket(algebra, y, z))
                    + bracket(algebra, y, bracket(algebra, z, x))
                    + bracket(algebra, z, bracket(algebra, x, y))
                )
                assert np.abs(total).max() <= 1e-10


class TestAdMatrix:
    def test_sp1r_ad_e1_columns(self, sp1r):
        # from [e1,e2] = -e3 and [e1,e3] = -e2
        expected = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, -1.0, 0.0]])
        assert np.array_equal(ad_matrix(sp1r, e(1)), expected)

    def test_abelian_ad_vanishes(self):
        a = build_algebra(4, np.zeros((4, 4, 4)))
        assert np.abs(ad_matrix(a, np.arange(4.0))).max() == 0.0

    def test_heisenberg_central_ad(self, heis):
        assert np.abs(ad_matrix(heis, e(3))).max() == 0.0

    def test_linearity(self, sp1r, rng):
        for _ in range(10):
            x, y = rng.uniform(-2, 2, size=(2, 3))
            a, b = rng.uniform(-2, 2, size=2)
            lhs = ad_matrix(sp1r, a * x + b * y)
            rhs = a * ad_matrix(sp1r, x) + b * ad_matrix(sp1r, y)
            assert np.abs(lhs - rhs).max() <= 1e-12


class TestKilling:
    def test_sp1r_gram(self, sp1r):
        assert np.array_equal(killing_gram(sp1r), np.diag([-2.0, -2.0, 2.0]))

    def test_so3_gram(self, so3):
        assert np.array_equal(killing_gram(so3), 2.0 * np.eye(3))

    def test_heisenberg_gram_zero(self, heis):
        assert np.array_equal(killing_gram(heis), np.zeros((3, 3)))

    def test_symmetry(self, sp1r):
        G = killing_gram(sp1r)
        assert np.array_equal(G, G.T)

    def test_ad_invariance(self, sp1r, so3, rng):
        # <[a,b], c> + <b, [a,c]> = 0
        for algebra in (sp1r, so3):
            for _ in range(20):
                a, b, c = rng.uniform(-2, 2, size=(3, 3))
                lhs = killing_pairing(algebra, bracket(algebra, a, b), c)
                rhs = killing_pairing(algebra, b, bracket(algebra, a, c))
                scale = np.linalg.norm(a) * np.linalg.norm(b) * np.linalg.norm(c)
                assert abs(lhs + rhs) <= 1e-9 * max(scale, 1.0)


class TestCenter:
    def test_heisenberg_center_is_e3(self, heis):
        z = center(heis)
        assert z.shape == (1, 3)
        assert np.allclose(np.abs(z[0]), e(3), atol=1e-12)

    def test_sp1r_center_empty(self, sp1r):
        assert center(sp1r).shape == (0, 3)

    def test_abelian_center_is_everything(self):
        a = build_algebra(2, np.zeros((2, 2, 2)))
        z = center(a)
        assert z.shape == (2, 2)
        assert np.allclose(z @ z.T, np.eye(2), atol=1e-14)

    def test_center_vectors_have_zero_ad(self, heis):
        for v in center(heis):
            assert np.abs(ad_matrix(heis, v)).max() <= 1e-10

    def test_orthonormal_rows(self, heis):
        z = center(heis)
        assert np.allclose(z @ z.T, np.eye(len(z)), atol=1e-14)


class TestSemisimple:
    def test_sp1r(self, sp1r):
        assert is_semisimple(sp1r)

    def test_so3(self, so3):
        assert is_semisimple(so3)

    def test_heisenberg(self, heis):
        assert not is_semisimple(heis)

    def test_abelian(self):
        assert not is_semisimple(build_algebra(3, np.zeros((3, 3, 3))))


class TestQuotient:
    def test_heisenberg_quotient_abelian(self, heis):
        q, projection, section = quotient_by_center(heis)
        assert q.dim == 2
        assert np.abs(q.constants).max() == 0.0
        assert projection.shape == (2, 3)
        assert len(section) == 2

    def test_trivial_center_is_identity(self, sp1r):
        q, projection, section = quotient_by_center(sp1r)
        assert q.dim == 3
        assert np.array_equal(projection, np.eye(3))
        assert np.array_equal(q.constants, sp1r.constants)

    def test_sp1r_plus_line(self, sp1r):
        # sp(1,R) + a central line: the quotient reproduces the sp(1,R) constants
        lam = np.zeros((4, 4, 4))
        lam[:3, :3, :3] = sp1r.constants
        a = build_algebra(4, lam)
        q, projection, section = quotient_by_center(a)
        assert q.dim == 3
        assert np.allclose(q.constants, sp1r.constants, atol=1e-14)

    def test_projection_section_identity(self, heis):
        _, projection, section = quotient_by_center(heis)
        assert np.allclose(projection @ np.array(section).T, np.eye(2), atol=1e-14)

    def test_quotient_bracket_consistency(self, heis, rng):
        # bracket downstairs == project(bracket(section(x), section(y)))
        q, projection, section = quotient_by_center(heis)
        S = np.array(section)
        for _ in range(10):
            x, y = rng.uniform(-2, 2, size=(2, q.dim))
            upstairs = projection @ bracket(heis, S.T @ x, S.T @ y)
            downstairs = bracket(q, x, y)
            assert np.abs(upstairs - downstairs).max() <= 1e-10

    def test_abelian_quotient_rejected(self):
        with pytest.raises(AlgebraError):
            quotient_by_center(build_algebra(2, np.zeros((2, 2, 2))))


class TestPresetsAndJson:
    def test_presets_validate(self):
        for name in ("sp1R", "so3", "heisenberg3", "abelian2", "abelian5"):
            a = preset_algebra(name)
            worst, _ = jacobi_residual(a.constants)
            assert worst <= 1e-12

    def test_unknown_preset(self):
        with pytest.raises(AlgebraError):
            preset_algebra("su2")

    def test_round_trip(self, sp1r):
        again = algebra_from_dict(algebra_to_dict(sp1r))
        assert np.array_equal(again.constants, sp1r.constants)
        assert again.labels == sp1r.labels

    def test_both_orderings_required_by_default(self):
        data = {"dim": 3, "brackets": [{"i": 1, "j": 2, "k": 3, "c": 1.0}]}
        with pytest.raises(AntisymmetryViolation):
            algebra_from_dict(data)

    def test_antisymmetric_completion(self):
        data = {
            "dim": 3,
            "antisymmetric_completion": True,
            "brackets": [{"i": 1, "j": 2, "k": 3, "c": 1.0}],
        }
        a = algebra_from_dict(data)
        assert np.array_equal(bracket(a, e(1), e(2)), e(3))
        assert np.array_equal(bracket(a, e(2), e(1)), -e(3))

    def test_duplicate_entry_rejected(self):
        data = {
            "dim": 2,
            "brackets": [
                {"i": 1, "j": 2, "k": 1, "c": 1.0},
                {"i": 1, "j": 2, "k": 1, "c": 2.0},
            ],
        }
        with pytest.raises(AlgebraError):
            algebra_from_dict(data)

    def test_index_out_of_range(self):
        data = {"dim": 2, "brackets": [{"i": 1, "j": 3, "k": 1, "c": 1.0}]}
        with pytest.raises(AlgebraError):
            algebra_from_dict(data)
