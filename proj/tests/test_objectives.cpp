#include <cmath>

#include <gtest/gtest.h>

#include "accel/harness/instances.hpp"
#include "accel/objectives.hpp"
#include "accel/rng.hpp"
#include "support/oracles.hpp"

using namespace accel;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

} // namespace

TEST(Quadratic, ExtremesGiveMuAndLip) {
    const Objective q = make_quadratic({{1.0, 100.0}, 0, Vector()});
    EXPECT_DOUBLE_EQ(q.mu(), 1.0);
    EXPECT_DOUBLE_EQ(q.lip(), 100.0);
    EXPECT_DOUBLE_EQ(condition_number(q), 100.0);
}

TEST(Quadratic, GradientVanishesAtOffset) {
    Rng rng(3);
    const Vector off = rng.normal_vector(6);
    const Objective q = make_quadratic({{1, 2, 5, 9, 20, 40}, 17, off});
    EXPECT_LE(q.gradient(off).norm(), 1e-12);
    ASSERT_TRUE(q.minimizer());
    EXPECT_LE((*q.minimizer() - off).norm(), 0.0);
    EXPECT_DOUBLE_EQ(*q.fmin(), 0.0);
}

TEST(Quadratic, HandEvaluatedScalar) {
    const Objective q = make_quadratic({{4.0}, 0, Vector()});
    const Vector x = vec({2.0});
    EXPECT_DOUBLE_EQ(q.value(x), 8.0);
    EXPECT_DOUBLE_EQ(q.gradient(x)[0], 8.0);
    EXPECT_DOUBLE_EQ(q.hess_vec(x, vec({3.0}))[0], 12.0);
}

TEST(Quadratic, SpectrumMatchesEigensolver) {
    const auto spec = harness::standard_quadratic_spec(100.0, 12, 5);
    const Objective q = make_quadratic(spec);
    const Vector ev = oracle::sym_eigenvalues(q.model_as<QuadraticFunction>()->matrix());
    for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i)
        EXPECT_NEAR(ev[static_cast<Eigen::Index>(i)], spec.eigenvalues[i], 1e-10);
}

TEST(Quadratic, EigenvectorHelper) {
    const auto spec = harness::standard_quadratic_spec(30.0, 8, 9);
    const Objective q = make_quadratic(spec);
    for (Eigen::Index i = 0; i < 8; ++i) {
        const Vector u = quadratic_eigenvector(spec, i);
        EXPECT_NEAR(u.norm(), 1.0, 1e-12);
        EXPECT_LE((q.hess_vec(u, u) - spec.eigenvalues[static_cast<std::size_t>(i)] * u).norm(), 1e-10);
    }
}

TEST(Quadratic, HessVecIsTheStoredMatrixAndRayleighInRange) {
    const Objective q = harness::standard_quadratic(50.0, 10, 4);
    const Matrix& a = q.model_as<QuadraticFunction>()->matrix();
    Rng rng(10);
    for (int i = 0; i < 100; ++i) {
        const Vector x = rng.normal_vector(10), v = rng.normal_vector(10);
        const Vector hv = q.hess_vec(x, v);
        EXPECT_TRUE(hv == a * v);
        const double rq = v.dot(hv) / v.squaredNorm();
        EXPECT_GE(rq, q.mu() - 1e-10);
        EXPECT_LE(rq, q.lip() + 1e-10);
    }
}

TEST(Quadratic, GapSandwich) {
    Rng rng(11);
    const Vector off = rng.normal_vector(10);
    const Objective q = make_quadratic({linspace_spectrum(40.0, 10), 2, off});
    for (int i = 0; i < 100; ++i) {
        const Vector x = off + rng.normal_vector(10) * 3.0;
        const double r2 = (x - off).squaredNorm();
        EXPECT_GE(q.f_gap(x), 0.5 * q.mu() * r2 * (1 - 1e-12));
        EXPECT_LE(q.f_gap(x), 0.5 * q.lip() * r2 * (1 + 1e-12));
    }
}

TEST(Quadratic, RejectsBadSpecs) {
    EXPECT_THROW(make_quadratic({{}, 0, Vector()}), InvalidSpec);
    EXPECT_THROW(make_quadratic({{1.0, -2.0}, 0, Vector()}), InvalidSpec);
    EXPECT_THROW(make_quadratic({{1.0, 2.0}, 0, vec({1.0})}), InvalidSpec);
}

TEST(Quadratic, SeedDeterminesRotation) {
    const Objective a = harness::standard_quadratic(10.0, 6, 1);
    const Objective b = harness::standard_quadratic(10.0, 6, 1);
    const Objective c = harness::standard_quadratic(10.0, 6, 2);
    const Matrix& ma = a.model_as<QuadraticFunction>()->matrix();
    EXPECT_EQ(ma, b.model_as<QuadraticFunction>()->matrix());
    EXPECT_GT((ma - c.model_as<QuadraticFunction>()->matrix()).norm(), 1e-3);
}

TEST(LogSumExp, SymmetricPairAtOrigin) {
    Matrix rows(2, 1);
    rows << 1.0, -1.0;
    const Objective f = make_log_sum_exp(rows, Vector::Zero(2), 1.0);
    EXPECT_DOUBLE_EQ(f.value(vec({0.0})), std::log(2.0));
    EXPECT_DOUBLE_EQ(f.gradient(vec({0.0}))[0], 0.0);
    EXPECT_NEAR(f.value(vec({1.0})), std::log(std::exp(1.0) + std::exp(-1.0)), 1e-15);
    EXPECT_DOUBLE_EQ(f.mu(), 0.0);
    EXPECT_THROW(condition_number(f), Inapplicable);
}

TEST(LogSumExp, StableForLargeArguments) {
    Matrix rows(2, 1);
    rows << 1.0, -1.0;
    const Objective f = make_log_sum_exp(rows, Vector::Zero(2), 1.0);
    EXPECT_NEAR(f.value(vec({800.0})), 800.0, 1e-9);
    EXPECT_TRUE(f.gradient(vec({800.0})).allFinite());
}

TEST(LogSumExp, LipschitzBoundsCurvature) {
    const Objective f = harness::standard_log_sum_exp();
    Rng rng(12);
    for (int i = 0; i < 100; ++i) {
        const Vector x = rng.normal_vector(f.dim()), v = rng.normal_vector(f.dim());
        const double rq = v.dot(f.hess_vec(x, v)) / v.squaredNorm();
        EXPECT_GE(rq, -1e-12);
        EXPECT_LE(rq, f.lip() * (1 + 1e-12));
    }
}

TEST(LogSumExp, LocatedMinimizerIsStationary) {
    const Objective f = harness::standard_log_sum_exp();
    ASSERT_TRUE(f.minimizer());
    EXPECT_LE(f.gradient(*f.minimizer()).norm(), 1e-10);
}

TEST(Counterexample, PiecesAndContinuity) {
    const Objective f = make_counterexample_1d();
    EXPECT_DOUBLE_EQ(f.gradient(vec({0.0}))[0], 0.0);
    EXPECT_DOUBLE_EQ(f.gradient(vec({3.0}))[0], 51.0);
    const auto* pw = f.model_as<PiecewiseGradient1DFunction>();
    ASSERT_NE(pw, nullptr);
    EXPECT_DOUBLE_EQ(pw->piece_gradient(0, 1.0), 25.0);
    EXPECT_DOUBLE_EQ(pw->piece_gradient(1, 1.0), 25.0);
    EXPECT_DOUBLE_EQ(pw->piece_gradient(1, 2.0), 26.0);
    EXPECT_DOUBLE_EQ(pw->piece_gradient(2, 2.0), 26.0);
    EXPECT_LE(pw->max_gradient_jump(), 1e-12);
    EXPECT_DOUBLE_EQ(f.mu(), 1.0);
    EXPECT_DOUBLE_EQ(f.lip(), 25.0);
    EXPECT_DOUBLE_EQ((*f.minimizer())[0], 0.0);
    EXPECT_DOUBLE_EQ(*f.fmin(), 0.0);
}

TEST(Counterexample, ValueIsContinuousAndMatchesPieces) {
    const Objective f = make_counterexample_1d();
    // Independent antiderivatives of the three gradient pieces.
    auto ref = [](double x) {
        if (x < 1) return 12.5 * x * x;
        if (x < 2) return 0.5 * x * x + 24 * x - 12;
        return 12.5 * x * x - 24 * x + 36;
    };
    for (double x : {-3.0, -0.5, 0.0, 0.7, 1.0, 1.5, 2.0, 2.5, 4.0})
        EXPECT_NEAR(f.value(vec({x})), ref(x), 1e-12) << x;
    for (double b : {1.0, 2.0})
        EXPECT_NEAR(f.value(vec({b - 1e-12})), f.value(vec({b})), 1e-9);
}

TEST(Counterexample, BreakpointHessianUsesLeftSegment) {
    const Objective f = make_counterexample_1d();
    EXPECT_DOUBLE_EQ(f.hess_vec(vec({1.0}), vec({1.0}))[0], 25.0);
    EXPECT_DOUBLE_EQ(f.hess_vec(vec({2.0}), vec({1.0}))[0], 1.0);
}

TEST(Counterexample, CorruptedSlopesBreakContinuity) {
    const Objective f = make_counterexample_1d({25.0, 2.0, 25.0});
    EXPECT_GT(f.model_as<PiecewiseGradient1DFunction>()->max_gradient_jump(), 0.5);
}

TEST(Piecewise, DefaultInterceptsAreContinuous) {
    const Objective f = make_piecewise_1d({{-1.0, 0.5, 3.0}, {2.0, 7.0, 1.0, 4.0}, std::nullopt});
    EXPECT_LE(f.model_as<PiecewiseGradient1DFunction>()->max_gradient_jump(), 1e-12);
    EXPECT_THROW(make_piecewise_1d({{1.0, 0.5}, {1.0, 2.0, 3.0}, std::nullopt}), InvalidSpec);
    EXPECT_THROW(make_piecewise_1d({{1.0}, {1.0}, std::nullopt}), InvalidSpec);
}

TEST(ConditionNumber, IdentityCase) {
    const Objective q = make_quadratic({{3.0, 3.0}, 0, Vector()});
    EXPECT_DOUBLE_EQ(condition_number(q), 1.0);
}

TEST(GradientCheck, QuadraticIsExactUpToRounding) {
    const Objective q = harness::standard_quadratic(100.0);
    Rng rng(13);
    for (int i = 0; i < 20; ++i) EXPECT_LE(check_gradient(q, rng.normal_vector(10), 1e-6), 1e-6);
}

TEST(GradientCheck, LogSumExpAtOrigin) {
    const Objective f = harness::standard_log_sum_exp();
    EXPECT_LE(check_gradient(f, Vector::Zero(f.dim()), 1e-6), 1e-5);
}

TEST(GradientCheck, CounterexampleInterior) {
    const Objective f = make_counterexample_1d();
    EXPECT_LE(check_gradient(f, vec({0.5}), 1e-8), 1e-5);
}

TEST(GradientCheck, DetectsAWrongGradient) {
    struct Wrong final : SmoothFunction {
        double value(const Vector& x) const override { return 0.5 * x.squaredNorm(); }
        Vector gradient(const Vector& x) const override { return 1.1 * x; }
        Vector hess_vec(const Vector&, const Vector& v) const override { return v; }
    };
    const Objective f(std::make_shared<Wrong>(), 3, 1.0, 1.0, std::nullopt, std::nullopt, "wrong");
    EXPECT_GT(check_gradient(f, vec({1.0, 2.0, 3.0}), 1e-6), 1e-2);
}

// Property: for every shipped objective, 100 seeded points agree with a fourth-order
// difference oracle that shares no code with check_gradient.
TEST(GradientCheck, IndependentOracleAgreesOnAllObjectives) {
    std::vector<Objective> objs{harness::standard_quadratic(100.0), harness::standard_log_sum_exp(),
                                make_counterexample_1d()};
    Rng rng(14);
    for (const auto& f : objs) {
        for (int i = 0; i < 100; ++i) {
            Vector x = rng.normal_vector(f.dim()) * 2.0;
            if (f.dim() == 1) x[0] = std::floor(x[0]) + 0.05 + 0.9 * rng.uniform();
            const Vector g = oracle::fd_gradient([&](const Vector& y) { return f.value(y); }, x, 1e-4);
            const Vector ga = f.gradient(x);
            EXPECT_LE((g - ga).lpNorm<Eigen::Infinity>() / (1 + ga.lpNorm<Eigen::Infinity>()), 1e-7) << f.tag();
            EXPECT_LE(check_gradient(f, x, 1e-6), 1e-5) << f.tag();
        }
    }
}

TEST(Objective, RejectsInconsistentConstants) {
    const auto fn = std::make_shared<QuadraticFunction>(Matrix::Identity(2, 2), Vector::Zero(2));
    EXPECT_THROW(Objective(fn, 2, 2.0, 1.0, std::nullopt, std::nullopt, "x"), InvalidSpec);
    EXPECT_THROW(Objective(fn, 2, 0.0, 0.0, std::nullopt, std::nullopt, "x"), InvalidSpec);
    EXPECT_THROW(Objective(fn, 2, 1.0, 1.0, vec({1.0}), std::nullopt, "x"), InvalidSpec);
}

TEST(Rng, DocumentedRecurrence) {
    Rng a(42);
    std::uint64_t s = 42;
    for (int i = 0; i < 5; ++i) {
        s = 6364136223846793005ULL * s + 1442695040888963407ULL;
        EXPECT_EQ(a.uniform(), static_cast<double>(s >> 11) * 0x1.0p-53);
    }
}

TEST(Rng, NormalMoments) {
    Rng rng(1);
    double m = 0, m2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        m += z;
        m2 += z * z;
    }
    EXPECT_NEAR(m / n, 0.0, 0.01);
    EXPECT_NEAR(m2 / n, 1.0, 0.01);
}

TEST(Rng, OrthogonalMatrix) {
    const Matrix q = random_orthogonal(9, 77);
    EXPECT_LE((q.transpose() * q - Matrix::Identity(9, 9)).norm(), 1e-12);
}
