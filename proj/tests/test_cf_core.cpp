#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/distributions/normal.hpp>
#include <random>

#include "qcm/cf_core.hpp"
#include "test_support.hpp"

using namespace qcm;
using testsupport::cf_design;
using testsupport::grid99;
using testsupport::make_pool;

TEST_CASE("design_row pins the regression basis") {
    auto r = cf::design_row(0.5);
    CHECK(r.row[0] == 1.0);
    CHECK(std::abs(r.row[1]) < 1e-12);
    CHECK(r.row[2] == doctest::Approx(-1.0));
    CHECK(std::abs(r.row[3]) < 1e-12);

    // Phi(1) = 0.8413447..., so the quantile sits at ~1.
    r = cf::design_row(0.8413447);
    CHECK(r.x == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(std::abs(r.row[2]) < 1e-4);
    CHECK(r.row[3] == doctest::Approx(-2.0).epsilon(1e-4));

    r = cf::design_row(0.975);
    CHECK(r.x == doctest::Approx(1.959964).epsilon(1e-6));
    CHECK(r.row[2] == doctest::Approx(2.841459).epsilon(1e-6));
    CHECK(r.row[3] == doctest::Approx(1.649230).epsilon(1e-6));

    CHECK_THROWS_AS(cf::design_row(0.0), DomainError);
    CHECK_THROWS_AS(cf::design_row(1.0), DomainError);
    CHECK_THROWS_AS(cf::design_row(-0.2), DomainError);
}

TEST_CASE("normal quantile matches an independent oracle to 1e-9 relative") {
    boost::math::normal ref;
    for (int i = 1; i <= 9999; ++i) {
        double a = i / 10000.0;
        double expected = boost::math::quantile(ref, a);
        double got = cf::design_row(a).x;
        if (std::abs(expected) < 1e-12) {
            CHECK(std::abs(got) < 1e-12);
        } else {
            CHECK(std::abs(got - expected) / std::abs(expected) <= 1e-9);
        }
    }
    // Deep tails.
    for (double a : {1e-8, 1e-6, 1e-4, 1.0 - 1e-4, 1.0 - 1e-6, 1.0 - 1e-8}) {
        double expected = boost::math::quantile(ref, a);
        double got = cf::design_row(a).x;
        CHECK(std::abs(got - expected) / std::abs(expected) <= 1e-9);
    }
}

TEST_CASE("ols_fit recovers targets in the column space") {
    auto levels = grid99();
    Eigen::MatrixXd Z = cf_design(levels);

    SUBCASE("normal law: Y = 1 + 2x") {
        Eigen::VectorXd y = Z.col(0) + 2.0 * Z.col(1);
        auto t = cf::ols_fit(make_pool(levels, y));
        CHECK(t.beta0 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(t.beta1 == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(std::abs(t.beta2) < 1e-12);
        CHECK(std::abs(t.beta3) < 1e-12);
    }
    SUBCASE("all-zero values") {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(99);
        auto t = cf::ols_fit(make_pool(levels, y));
        CHECK(std::abs(t.beta0) < 1e-14);
        CHECK(std::abs(t.beta1) < 1e-14);
        CHECK(std::abs(t.beta2) < 1e-14);
        CHECK(std::abs(t.beta3) < 1e-14);
    }
    SUBCASE("interpolation: Y = x + 0.1(x^2-1)") {
        Eigen::VectorXd y = Z.col(1) + 0.1 * Z.col(2);
        auto t = cf::ols_fit(make_pool(levels, y));
        CHECK(std::abs(t.beta0) < 1e-12);
        CHECK(t.beta1 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(t.beta2 == doctest::Approx(0.1).epsilon(1e-10));
        CHECK(std::abs(t.beta3) < 1e-12);
    }
    SUBCASE("polynomial exactness for random coefficients") {
        std::mt19937_64 eng(42);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        for (int rep = 0; rep < 50; ++rep) {
            double a = u(eng), b = u(eng), c = u(eng), d = u(eng);
            Eigen::VectorXd y = a * Z.col(0) + b * Z.col(1) + c * Z.col(2) + d * Z.col(3);
            auto t = cf::ols_fit(make_pool(levels, y));
            CHECK(std::abs(t.beta0 - a) < 1e-10);
            CHECK(std::abs(t.beta1 - b) < 1e-10);
            CHECK(std::abs(t.beta2 - c) < 1e-10);
            CHECK(std::abs(t.beta3 - d) < 1e-10);
        }
    }
    SUBCASE("pool too small") {
        std::vector<double> few = {0.1, 0.5, 0.9};
        Eigen::VectorXd y = Eigen::VectorXd::Zero(3);
        CHECK_THROWS_AS(cf::ols_fit(make_pool(few, y)), InsufficientPoolError);
    }
    SUBCASE("duplicated single level is singular") {
        std::vector<double> dup(10, 0.3);
        Eigen::VectorXd y = Eigen::VectorXd::Ones(10);
        CHECK_THROWS_AS(cf::ols_fit(make_pool(dup, y)), SingularDesignError);
    }
}

TEST_CASE("ols_fit equals the dense normal-equation oracle on random pools") {
    std::mt19937_64 eng(7);
    std::uniform_real_distribution<double> ulevel(0.02, 0.98);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<double> levels(40);
        for (auto& a : levels) a = ulevel(eng);
        std::sort(levels.begin(), levels.end());
        Eigen::VectorXd y(40);
        for (int i = 0; i < 40; ++i) y[i] = 0.5 + 1.7 * noise(eng);
        auto t = cf::ols_fit(make_pool(levels, y));
        Eigen::VectorXd oracle = testsupport::dense_ols(cf_design(levels), y);
        CHECK(std::abs(t.beta0 - oracle[0]) < 1e-10);
        CHECK(std::abs(t.beta1 - oracle[1]) < 1e-10);
        CHECK(std::abs(t.beta2 - oracle[2]) < 1e-10);
        CHECK(std::abs(t.beta3 - oracle[3]) < 1e-10);
    }
}

TEST_CASE("moment mapping and constraint check") {
    cf::ThetaEstimate t;
    SUBCASE("normal case") {
        t.beta1 = 1.0;
        auto q = cf::qcm_from_theta(t);
        CHECK(q.h == doctest::Approx(1.0));
        CHECK(q.s == doctest::Approx(0.0));
        CHECK(q.k == doctest::Approx(3.0));
        CHECK(q.constraint_ok);
    }
    SUBCASE("direct arithmetic") {
        t.beta1 = 2.0;
        t.beta2 = 0.5;
        t.beta3 = 0.1;
        auto q = cf::qcm_from_theta(t);
        CHECK(q.h == doctest::Approx(4.0));
        CHECK(q.s == doctest::Approx(1.5));
        CHECK(q.k == doctest::Approx(4.2));
        CHECK(q.constraint_ok); // 4 - 4.5 + 2.4 = 1.9
    }
    SUBCASE("division guard") {
        t.beta1 = 1e-12;
        t.beta2 = 0.1;
        CHECK_THROWS_AS(cf::qcm_from_theta(t), DegenerateScaleError);
    }
    SUBCASE("constraint arithmetic") {
        cf::ThetaEstimate a{0.0, 1.0, 0.0, 0.0};
        CHECK(cf::moment_constraint_holds(a));
        cf::ThetaEstimate b{0.0, 1.0, 0.3, 0.0}; // 1 - 18*0.09 = -0.62
        CHECK_FALSE(cf::moment_constraint_holds(b));
        cf::ThetaEstimate c{0.0, 2.0, 0.5, 0.1};
        CHECK(cf::moment_constraint_holds(c));
    }
}

TEST_CASE("location shift and scale equivariance") {
    auto levels = grid99();
    Eigen::MatrixXd Z = cf_design(levels);
    std::mt19937_64 eng(3);
    std::normal_distribution<double> noise(0.0, 0.05);
    Eigen::VectorXd y = 1.4 * Z.col(1) + 0.08 * Z.col(2) + 0.02 * Z.col(3);
    for (int i = 0; i < 99; ++i) y[i] += noise(eng);

    auto base = cf::qcm_from_theta(cf::ols_fit(make_pool(levels, y)));

    SUBCASE("adding a constant moves only the intercept") {
        double m = 2.71;
        auto t0 = cf::ols_fit(make_pool(levels, y));
        auto t1 = cf::ols_fit(make_pool(levels, Eigen::VectorXd((y.array() + m).matrix())));
        CHECK(t1.beta0 - t0.beta0 == doctest::Approx(m).epsilon(1e-10));
        auto shifted = cf::qcm_from_theta(t1);
        CHECK(std::abs(shifted.h - base.h) < 1e-12);
        CHECK(std::abs(shifted.s - base.s) < 1e-12);
        CHECK(std::abs(shifted.k - base.k) < 1e-12);
    }
    SUBCASE("positive scaling") {
        double lam = 3.7;
        auto t0 = cf::ols_fit(make_pool(levels, y));
        auto t1 = cf::ols_fit(make_pool(levels, Eigen::VectorXd(lam * y)));
        CHECK(t1.beta1 == doctest::Approx(lam * t0.beta1).epsilon(1e-10));
        CHECK(t1.beta2 == doctest::Approx(lam * t0.beta2).epsilon(1e-10));
        CHECK(t1.beta3 == doctest::Approx(lam * t0.beta3).epsilon(1e-10));
        auto scaled = cf::qcm_from_theta(t1);
        CHECK(scaled.h == doctest::Approx(lam * lam * base.h).epsilon(1e-10));
        CHECK(std::abs(scaled.s - base.s) < 1e-10);
        CHECK(std::abs(scaled.k - base.k) < 1e-10);
    }
}

TEST_CASE("constrained least squares") {
    auto levels = grid99();
    Eigen::MatrixXd Z = cf_design(levels);

    SUBCASE("inactive constraint returns the plain fit") {
        Eigen::VectorXd y = 0.3 * Z.col(0) + 1.1 * Z.col(1) + 0.05 * Z.col(2);
        auto ols = cf::ols_fit(make_pool(levels, y));
        auto con = cf::constrained_ls_fit(make_pool(levels, y));
        CHECK(con.beta0 == ols.beta0);
        CHECK(con.beta1 == ols.beta1);
        CHECK(con.beta2 == ols.beta2);
        CHECK(con.beta3 == ols.beta3);
    }
    SUBCASE("constant pool is a zero-residual feasible point") {
        Eigen::VectorXd y = Eigen::VectorXd::Constant(99, 4.2);
        auto con = cf::constrained_ls_fit(make_pool(levels, y));
        CHECK(con.beta0 == doctest::Approx(4.2).epsilon(1e-12));
        CHECK(std::abs(con.beta1) < 1e-12);
        CHECK(std::abs(con.beta2) < 1e-12);
        CHECK(std::abs(con.beta3) < 1e-12);
    }
    SUBCASE("active constraint lands on the boundary at the oracle objective") {
        Eigen::VectorXd y = Z.col(1) + 0.5 * Z.col(2);
        auto ols = cf::ols_fit(make_pool(levels, y));
        CHECK_FALSE(cf::moment_constraint_holds(ols)); // 1 - 18*0.25 = -3.5

        auto con = cf::constrained_ls_fit(make_pool(levels, y));
        CHECK(cf::moment_constraint_holds(con));
        double g = con.beta1 * con.beta1 - 18.0 * con.beta2 * con.beta2 +
                   12.0 * con.beta1 * con.beta3;
        CHECK(g >= 0.0);
        CHECK(g <= 1e-6); // boundary solution

        Eigen::Vector4d b(con.beta0, con.beta1, con.beta2, con.beta3);
        double ssr = (y - Z * b).squaredNorm();
        double oracle = testsupport::boundary_grid_oracle(Z, y);
        CHECK(ssr <= oracle + 1e-6);
        CHECK(oracle <= ssr + 1e-6);
    }
    SUBCASE("output always satisfies the constraint on random violating pools") {
        std::mt19937_64 eng(11);
        std::normal_distribution<double> noise(0.0, 0.1);
        std::uniform_real_distribution<double> b2(0.35, 0.8);
        for (int rep = 0; rep < 10; ++rep) {
            Eigen::VectorXd y = Z.col(1) + b2(eng) * Z.col(2);
            for (int i = 0; i < 99; ++i) y[i] += noise(eng);
            auto con = cf::constrained_ls_fit(make_pool(levels, y));
            CHECK(cf::moment_constraint_holds(con));
        }
    }
}
