#include <doctest.h>

#include "oracles.hpp"
#include "stfsim/precoder.hpp"
#include "stfsim/stfbc.hpp"

using namespace stfsim;

namespace {

// Haar-ish random orthonormal N x M basis (QR of a Gaussian matrix).
Eigen::MatrixXcd random_basis(int n, int m, Rng& rng) {
    Eigen::MatrixXcd g(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) g(i, j) = rng.cgauss();
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    return Eigen::MatrixXcd(qr.householderQ()).leftCols(m);
}

Eigen::VectorXd random_simplex(int m, Rng& rng) {
    Eigen::VectorXd p(m);
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
        p(i) = -std::log(1.0 - rng.uniform());
        sum += p(i);
    }
    return p / sum;
}

CorrelationModel random_psd_model(int n, int l_taps, Rng& rng) {
    Eigen::MatrixXcd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.cgauss();
    Eigen::MatrixXcd r = g * g.adjoint();
    r *= static_cast<double>(n) / r.trace().real();
    return CorrelationModel::from_matrix(r, l_taps);
}

double kkt_max_residual(const Eigen::VectorXd& c, const Eigen::VectorXd& p) {
    // active streams share c_i / (1 + c_i p_i) = nu; inactive ones sit at
    // or below the level
    double nu = 0.0;
    for (int i = 0; i < c.size(); ++i) {
        if (p(i) > 0.0) {
            nu = c(i) / (1.0 + c(i) * p(i));
            break;
        }
    }
    double res = std::abs(p.sum() - 1.0);
    for (int i = 0; i < c.size(); ++i) {
        if (p(i) > 0.0) {
            res = std::max(res, std::abs(c(i) / (1.0 + c(i) * p(i)) - nu) / nu);
        } else {
            res = std::max(res, std::max(0.0, c(i) - nu) / nu);
        }
        res = std::max(res, -p(i));
    }
    return res;
}

}  // namespace

TEST_CASE("effective SINR") {
    const auto s = effective_sinr(1.0, 8, 0.25, 0.5, 5);
    CHECK(s.eta == doctest::Approx(1.0 / (4.0 * (8 * 0.25 + 0.5))));
    CHECK(s.gamma == doctest::Approx(s.eta * 5 * 8));
    CHECK_THROWS_AS(effective_sinr(1.0, 8, 0.0, 0.0, 5), std::invalid_argument);
}

TEST_CASE("design direction") {
    SUBCASE("identity correlation gives standard basis columns") {
        const auto model = exponential_correlation(0.0, 4);
        const auto spectrum = spectrum_of(model, 2);
        const auto [v0, u0] = design_direction(spectrum, ostbc_distance(1.0, 2));
        for (int c = 0; c < 2; ++c) {
            CHECK(v0.col(c).cwiseAbs().maxCoeff() == doctest::Approx(1.0));
            CHECK(v0.col(c).norm() == doctest::Approx(1.0));
        }
        CHECK((u0 - Eigen::MatrixXcd::Identity(2, 2)).norm() == doctest::Approx(0.0));
    }
    SUBCASE("2x2 Toeplitz eigenvectors up to phase") {
        const auto model = exponential_correlation(0.6, 2);
        const auto spectrum = spectrum_of(model, 2);
        const auto [v0, u0] = design_direction(spectrum, ostbc_distance(1.0, 2));
        Eigen::VectorXcd plus(2), minus(2);
        plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
        minus << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
        CHECK(std::abs((v0.col(0).adjoint() * plus)(0, 0)) == doctest::Approx(1.0));
        CHECK(std::abs((v0.col(1).adjoint() * minus)(0, 0)) == doctest::Approx(1.0));
    }
    SUBCASE("beats random directions on the determinant objective") {
        const auto model = exponential_correlation(0.5, 4);
        const auto spectrum = spectrum_of(model, 2);
        const double scale = 5.0;
        const auto objective = [&](const Eigen::MatrixXcd& v) {
            const Eigen::MatrixXcd core =
                0.5 * scale * (v.adjoint() * model.r0 * v);  // equal power
            return (Eigen::MatrixXcd::Identity(2, 2) + core).determinant().real();
        };
        const auto [v0, u0] = design_direction(spectrum, ostbc_distance(1.0, 2));
        const double best = objective(v0);
        Rng rng(7);
        for (int trial = 0; trial < 100; ++trial) {
            CHECK(best >= objective(random_basis(4, 2, rng)) - 1e-9);
        }
    }
}

TEST_CASE("water-filling") {
    SUBCASE("symmetric gains split evenly") {
        Eigen::VectorXd c(2);
        c << 3.7, 3.7;
        const auto p = waterfill_powers(c);
        CHECK(p(0) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(p(1) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("matches exhaustive grid search") {
        // d_R = (1.6, 0.4) at eta mu0 L N_v = 1 concentrates on stream 1
        Eigen::VectorXd c(2);
        c << 1.6, 0.4;
        const auto p = waterfill_powers(c);
        const auto ref = oracle::waterfill_grid_search(1.6, 0.4);
        CHECK(std::abs(p(0) - ref(0)) < 1e-3);
        CHECK(std::abs(p(1) - ref(1)) < 1e-3);
    }
    SUBCASE("low SINR limit is a single beam") {
        Eigen::VectorXd c = 1e-4 * Eigen::Vector2d(1.6, 0.4);
        const auto p = waterfill_powers(c);
        CHECK(std::abs(p(0) - 1.0) < 1e-6);
        CHECK(std::abs(p(1)) < 1e-6);
    }
    SUBCASE("rejects degenerate input") {
        CHECK_THROWS_AS(waterfill_powers(Eigen::VectorXd::Zero(2)), std::invalid_argument);
        const auto model = exponential_correlation(0.3, 4);
        const auto spectrum = spectrum_of(model, 2);
        CHECK_THROWS_AS(
            waterfill(spectrum, ostbc_distance(0.4, 2), EffectiveSinr{0.0, 0.0}, 8, model),
            std::invalid_argument);
    }
    SUBCASE("KKT residuals and power conservation on random spectra") {
        Rng rng(17);
        for (int trial = 0; trial < 50; ++trial) {
            const int m = 2 + rng.uniform_int(3);
            Eigen::VectorXd c(m);
            for (int i = 0; i < m; ++i)
                c(i) = std::pow(10.0, -3.0 + 6.0 * rng.uniform());
            std::sort(c.data(), c.data() + m, std::greater<double>());
            const auto p = waterfill_powers(c);
            CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
            CHECK(kkt_max_residual(c, p) < 1e-8);
        }
    }
    SUBCASE("converges to equal power as Gamma grows") {
        Eigen::Vector2d d_r(1.6, 0.4);
        double prev = 1.0;
        for (double gamma_mu0 : {1e2, 1e3, 1e4, 1e5, 1e6}) {
            const auto p = waterfill_powers(gamma_mu0 * d_r);
            const double gap = (p - Eigen::VectorXd::Constant(2, 0.5)).cwiseAbs().maxCoeff();
            CHECK(gap < prev);
            prev = gap;
        }
        CHECK(prev < 1e-3);
    }
    SUBCASE("equal-power distance shrinks below 1e-3 at Gamma mu0 = 1e6") {
        const auto p = waterfill_powers(1e6 * Eigen::Vector2d(1.6, 0.4));
        CHECK((p - equal_power(2)).cwiseAbs().maxCoeff() < 1e-3);
    }
}

TEST_CASE("fixed allocations") {
    SUBCASE("equal power") {
        CHECK((equal_power(2) - Eigen::Vector2d(0.5, 0.5)).norm() == doctest::Approx(0.0));
        CHECK((equal_power(4) - Eigen::Vector4d(0.25, 0.25, 0.25, 0.25)).norm() ==
              doctest::Approx(0.0));
        CHECK_THROWS_AS(equal_power(0), std::invalid_argument);
    }
    SUBCASE("single beam picks the strongest product, lowest index on ties") {
        const auto dist = ostbc_distance(0.4, 2);
        EigenSpectrum s;
        s.basis = Eigen::MatrixXcd::Identity(2, 2);
        s.values = Eigen::Vector2d(1.6, 0.4);
        CHECK((single_beam(s, dist) - Eigen::Vector2d(1, 0)).norm() == doctest::Approx(0.0));
        s.values = Eigen::Vector2d(1.0, 1.0);
        CHECK((single_beam(s, dist) - Eigen::Vector2d(1, 0)).norm() == doctest::Approx(0.0));
    }
}

TEST_CASE("PEP bound") {
    const auto model = exponential_correlation(0.3, 4, 5);
    const auto dist = ostbc_distance(0.4, 2);

    SUBCASE("eta 0 gives 1") {
        const auto prec = optimal_precoder(model, dist, EffectiveSinr{1.0, 40.0}, 8, 2);
        CHECK(pep_bound(prec, dist, model, EffectiveSinr{0.0, 0.0}, 8) == doctest::Approx(1.0));
    }
    SUBCASE("zero power gives 1") {
        Precoder p = optimal_precoder(model, dist, EffectiveSinr{1.0, 40.0}, 8, 2);
        p.d.setZero();
        CHECK(pep_bound(p, dist, model, EffectiveSinr{1.0, 40.0}, 8) == doctest::Approx(1.0));
    }
    SUBCASE("closed form matches the Monte Carlo average") {
        const EffectiveSinr sinr{1.0, 40.0};
        const auto prec = optimal_precoder(model, dist, sinr, 8, 2);
        const double closed = pep_bound(prec, dist, model, sinr, 8);
        Rng rng(5);
        const double mc = pep_bound_monte_carlo(prec, dist, model, sinr, 8, 400000, rng);
        CHECK(std::abs(mc - closed) / closed < 0.02);
    }
    SUBCASE("monotone in eta, taps and spread factor") {
        const auto prec = optimal_precoder(model, dist, EffectiveSinr{1.0, 40.0}, 8, 2);
        double prev = 1.0;
        for (double eta : {0.01, 0.1, 1.0, 10.0}) {
            const double b = pep_bound(prec, dist, model, EffectiveSinr{eta, eta * 40}, 8);
            CHECK(b <= prev + 1e-15);
            prev = b;
        }
        for (int l : {1, 2, 10, 20}) {
            auto m2 = exponential_correlation(0.3, 4, l);
            const double b = pep_bound(prec, dist, m2, EffectiveSinr{1.0, 1.0 * l * 8}, 8);
            if (l > 1) CHECK(b <= prev + 1e-15);
            prev = b;
        }
        prev = 1.0;
        for (int n_v : {1, 2, 8}) {
            const double b = pep_bound(prec, dist, model, EffectiveSinr{1.0, 5.0 * n_v}, n_v);
            CHECK(b <= prev + 1e-15);
            prev = b;
        }
    }
    SUBCASE("rejects non-PSD inputs") {
        CodewordDistance bad = dist;
        bad.a0(0, 0) = -1.0;
        const auto prec = optimal_precoder(model, dist, EffectiveSinr{1.0, 40.0}, 8, 2);
        CHECK_THROWS_AS(pep_bound(prec, bad, model, EffectiveSinr{1.0, 40.0}, 8),
                        std::invalid_argument);
    }
    SUBCASE("optimal design beats random candidates") {
        Rng rng(23);
        const auto dist2 = ostbc_distance(0.4, 2);
        for (int trial = 0; trial < 200; ++trial) {
            const auto m = random_psd_model(4, 1 + rng.uniform_int(8), rng);
            const double eta = std::pow(10.0, -2.0 + 4.0 * rng.uniform());
            const int n_v = 1 << rng.uniform_int(4);
            const EffectiveSinr sinr{eta, eta * m.tap_count * n_v};
            const auto best = optimal_precoder(m, dist2, sinr, n_v, 2);
            const double best_bound = pep_bound(best, dist2, m, sinr, n_v);
            for (int cand = 0; cand < 100; ++cand) {
                Precoder p;
                p.v = random_basis(4, 2, rng);
                p.d = random_simplex(2, rng).cwiseSqrt();
                p.u = random_basis(2, 2, rng);
                CHECK(best_bound <= pep_bound(p, dist2, m, sinr, n_v) + 1e-12);
            }
        }
    }
    SUBCASE("depends on eta, L, N_v only through the product") {
        Rng rng(29);
        for (int trial = 0; trial < 20; ++trial) {
            const double kappa = 0.9 * rng.uniform();
            const int l_taps = 1 + rng.uniform_int(20);
            const int n_v = 1 << rng.uniform_int(4);
            const double eta = std::pow(10.0, -3.0 + 6.0 * rng.uniform());
            const auto m_many = exponential_correlation(kappa, 4, l_taps);
            const auto m_one = exponential_correlation(kappa, 4, 1);
            const EffectiveSinr s_many{eta, eta * l_taps * n_v};
            const EffectiveSinr s_one{eta * l_taps * n_v, eta * l_taps * n_v};
            const double a =
                pep_bound(optimal_precoder(m_many, dist, s_many, n_v, 2), dist, m_many, s_many, n_v);
            const double b =
                pep_bound(optimal_precoder(m_one, dist, s_one, 1, 2), dist, m_one, s_one, 1);
            CHECK(std::abs(a - b) / a <= 1e-12);
        }
    }
}

TEST_CASE("coding gain") {
    SUBCASE("single-carrier flat case") {
        EigenSpectrum s;
        s.basis = Eigen::MatrixXcd::Identity(2, 2);
        s.values = Eigen::Vector2d(1.0, 1.0);
        const auto dist = ostbc_distance(1.0, 2);
        CHECK(coding_gain(equal_power(2), dist, s, 1, 1) == doctest::Approx(0.5));
        CHECK(coding_gain(equal_power(2), dist, s, 5, 8) == doctest::Approx(20.0));
    }
    SUBCASE("zero power or zero eigenvalue kills the gain") {
        EigenSpectrum s;
        s.basis = Eigen::MatrixXcd::Identity(2, 2);
        s.values = Eigen::Vector2d(1.6, 0.0);
        CHECK(coding_gain(equal_power(2), ostbc_distance(1.0, 2), s, 1, 1) == 0.0);
        s.values = Eigen::Vector2d(1.6, 0.4);
        CHECK(coding_gain(Eigen::Vector2d(1.0, 0.0), ostbc_distance(1.0, 2), s, 1, 1) == 0.0);
    }
    SUBCASE("full-rank gain peaks at zero correlation") {
        const auto dist = ostbc_distance(1.0, 4);
        double best = -1.0;
        double at_zero = 0.0;
        for (double kappa : {0.0, 0.3, 0.6, 0.9}) {
            const auto model = exponential_correlation(kappa, 4);
            const auto s = spectrum_of(model, 4);
            const double g = coding_gain(equal_power(4), dist, s, 1, 1);
            if (kappa == 0.0) at_zero = g;
            best = std::max(best, g);
        }
        CHECK(at_zero == doctest::Approx(best));
    }
}

TEST_CASE("diversity slope") {
    SUBCASE("synthetic quartic curve") {
        std::vector<std::pair<double, double>> curve;
        for (double eta : {1e3, 2e3, 5e3, 1e4}) curve.push_back({eta, std::pow(eta, -4.0)});
        CHECK(diversity_slope(curve) == doctest::Approx(4.0));
    }
    SUBCASE("rejects bad curves") {
        CHECK_THROWS_AS(diversity_slope({{1e3, 1e-4}}), std::invalid_argument);
        CHECK_THROWS_AS(diversity_slope({{1e3, 0.0}, {1e4, 1e-4}}), std::invalid_argument);
    }
    SUBCASE("bound slopes follow the stream count") {
        const auto model = exponential_correlation(0.3, 4, 1);
        for (int m : {4, 2}) {
            const auto dist = ostbc_distance(0.4, m);
            std::vector<std::pair<double, double>> curve;
            for (int k = 0; k <= 9; ++k) {
                const double eta = 1e3 * std::pow(10.0, k / 9.0);
                const EffectiveSinr sinr{eta, eta};
                const auto prec = optimal_precoder(model, dist, sinr, 1, m);
                curve.push_back({eta, pep_bound(prec, dist, model, sinr, 1)});
            }
            const double slope = diversity_slope(curve);
            if (m == 4) CHECK(slope == doctest::Approx(4.0).epsilon(0.05));
            if (m == 2) CHECK(slope == doctest::Approx(2.0).epsilon(0.05));
        }
    }
}
