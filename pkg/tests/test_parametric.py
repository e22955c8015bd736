import numpy as np
import pytest
from scipy import integrate
from scipy.stats import multivariate_normal

from cbcopula.errors import ParamOutOfRange, ResolutionMismatch
from cbcopula.grid import derivative_field, grid_from_mass, is_si
from cbcopula.orders import sup_distance
from cbcopula.parametric import (
    EFGM,
    FrechetM,
    FrechetW,
    Gaussian,
    Independence,
    ShuffleOfMin,
    bivariate_normal_cdf,
    describe,
    efgm_conditional_quantile,
    efgm_inverse_first_integral,
    materialize,
    parse_family,
    transpose_shuffle,
)


class TestBivariateNormal:
    @pytest.mark.parametrize("rho", [-0.9, -0.3, 0.0, 0.352, 0.6, 0.95])
    def test_matches_reference(self, rho):
        rng = np.random.default_rng(1)
        pts = rng.normal(size=(20, 2)) * 1.5
        mvn = multivariate_normal([0, 0], [[1, rho], [rho, 1]])
        ours = bivariate_normal_cdf(pts[:, 0], pts[:, 1], rho)
        ref = mvn.cdf(pts)
        assert np.abs(ours - ref).max() < 1e-6

    def test_against_density_quadrature(self):
        rho, h, k = 0.6, 0.4, -0.7
        dens = multivariate_normal([0, 0], [[1, rho], [rho, 1]]).pdf
        ref, _ = integrate.dblquad(lambda y, x: dens([x, y]), -12, h, -12, k, epsabs=1e-11)
        assert bivariate_normal_cdf(h, k, rho) == pytest.approx(ref, abs=1e-8)

    def test_axes(self):
        # one argument zero exercises the limiting branch of the formula
        rho = 0.4
        mvn = multivariate_normal([0, 0], [[1, rho], [rho, 1]])
        for h, k in [(0.0, 0.8), (-1.1, 0.0), (0.0, 0.0)]:
            assert bivariate_normal_cdf(h, k, rho) == pytest.approx(mvn.cdf([h, k]), abs=1e-7)


class TestMaterialize:
    def test_independence(self):
        assert np.allclose(materialize(Independence(), 4).mass, 1 / 16, atol=1e-17)

    def test_zero_correlation_is_independence(self):
        a = materialize(Gaussian(0.0), 8)
        b = materialize(Independence(), 8)
        assert np.abs(a.mass - b.mass).max() < 1e-15

    def test_identity_shuffle_is_comonotone(self):
        a = materialize(ShuffleOfMin(tuple(range(1, 9))), 8)
        assert np.array_equal(a.mass, materialize(FrechetM(), 8).mass)

    def test_reversal_shuffle_is_countermonotone(self):
        a = materialize(ShuffleOfMin(tuple(range(8, 0, -1))), 8)
        assert np.array_equal(a.mass, materialize(FrechetW(), 8).mass)

    @pytest.mark.parametrize("rho", [1.0, -1.0])
    def test_boundary_correlations(self, rho):
        expected = FrechetM() if rho > 0 else FrechetW()
        assert np.array_equal(materialize(Gaussian(rho), 16).mass, materialize(expected, 16).mass)

    def test_shuffle_resolution(self):
        with pytest.raises(ResolutionMismatch):
            materialize(ShuffleOfMin((2, 1, 3)), 8)

    def test_parameter_ranges(self):
        with pytest.raises(ParamOutOfRange):
            Gaussian(1.5)
        with pytest.raises(ParamOutOfRange):
            EFGM(-2.0)
        with pytest.raises(ParamOutOfRange):
            ShuffleOfMin((1, 1, 2))
        with pytest.raises(ParamOutOfRange):
            materialize(Independence(), 1)

    @pytest.mark.parametrize(
        "spec",
        [Gaussian(0.3), Gaussian(-0.8), EFGM(1.0), EFGM(-0.5), FrechetW(), ShuffleOfMin((3, 1, 2, 4))],
    )
    def test_grids_validate(self, spec):
        g = materialize(spec, 16)
        grid_from_mass(g.mass, tol=1e-12)

    @pytest.mark.parametrize("rho", [0.0, 0.3, 0.7071, 0.936, 1.0])
    def test_nonnegative_gaussian_is_si(self, rho):
        assert is_si(derivative_field(materialize(Gaussian(rho), 64)), 1e-12)

    def test_gaussian_increasing_in_rho(self):
        rhos = [0.0, 0.2, 0.5, 0.8, 0.95, 1.0]
        vs = [materialize(Gaussian(r), 32).vertex for r in rhos]
        for lo, hi in zip(vs, vs[1:]):
            assert np.all(lo <= hi + 1e-10)

    def test_shuffles_are_scaled_permutations(self):
        g = materialize(transpose_shuffle(3), 9)
        assert np.all((g.mass > 0).sum(axis=0) == 1)
        assert np.all((g.mass > 0).sum(axis=1) == 1)
        assert np.allclose(g.mass[g.mass > 0], 1 / 9)


class TestTransposeShuffle:
    def test_two(self):
        assert transpose_shuffle(2).sigma == (1, 3, 2, 4)

    def test_distance_to_independence(self):
        d = {}
        for m in (8, 16):
            n = m * m
            d[m] = sup_distance(materialize(transpose_shuffle(m), n), materialize(Independence(), n))
        # oracle: direct cumulative sums of the permutation matrix
        n = 64
        perm = np.zeros((n, n))
        for a in range(8):
            for b in range(8):
                perm[b * 8 + a, a * 8 + b] = 1 / n
        cum = np.zeros((n + 1, n + 1))
        cum[1:, 1:] = perm.cumsum(0).cumsum(1)
        g = np.arange(n + 1) / n
        assert d[8] == pytest.approx(np.abs(cum - np.outer(g, g)).max(), abs=1e-14)
        assert d[8] <= 0.25
        assert d[16] < d[8]

    def test_needs_two_stripes(self):
        with pytest.raises(ParamOutOfRange):
            transpose_shuffle(1)


class TestEfgm:
    def test_quantile_inverts_conditional_cdf(self):
        t = np.linspace(0, 1, 11)
        w = 0.37
        v = efgm_conditional_quantile(1.0, t, w)
        assert np.allclose(v + v * (1 - v) * (1 - 2 * t), w, atol=1e-14)

    def test_quantile_matches_closed_form_away_from_half(self):
        t = np.array([0.1, 0.3, 0.7, 0.9])
        v = 0.25
        closed = (1 - t - np.sqrt((1 - t) ** 2 - v * (1 - 2 * t))) / (1 - 2 * t)
        assert np.allclose(efgm_conditional_quantile(1.0, t, v), closed, atol=1e-14)

    def test_integral_at_one_fifth(self):
        assert efgm_inverse_first_integral(1.0, 0.2) == pytest.approx(0.228, abs=1e-3)

    def test_quarter_value(self):
        # independent quadrature of the closed form on both sides of t = 1/2
        f = lambda t: (1 - t - np.sqrt((1 - t) ** 2 - 0.25 * (1 - 2 * t))) / (1 - 2 * t)
        ref = integrate.quad(f, 0, 0.5)[0] + integrate.quad(f, 0.5, 1)[0]
        assert efgm_inverse_first_integral(1.0, 0.25) == pytest.approx(ref, abs=1e-6)

    def test_independence_case(self):
        assert efgm_inverse_first_integral(0.0, 0.25) == pytest.approx(0.25, abs=1e-12)

    def test_marginal_condition_fails(self):
        assert abs(efgm_inverse_first_integral(1.0, 0.25) - 0.25) > 0.01

    def test_domain(self):
        with pytest.raises(ParamOutOfRange):
            efgm_inverse_first_integral(1.0, 1.0)


class TestDescriptors:
    @pytest.mark.parametrize("text", ["gaussian:0.6", "efgm:1", "m", "w", "pi", "shuffle:2,1,3"])
    def test_round_trip(self, text):
        assert describe(parse_family(text)) == text

    def test_tshuffle(self):
        assert parse_family("tshuffle:2") == ShuffleOfMin((1, 3, 2, 4))

    @pytest.mark.parametrize("text", ["gaussian:abc", "frank:2", "shuffle:1,1", "m:3"])
    def test_rejects(self, text):
        with pytest.raises(ParamOutOfRange):
            parse_family(text)

    def test_range_message_names_parameter(self):
        with pytest.raises(ParamOutOfRange, match="rho"):
            parse_family("gaussian:1.5")
