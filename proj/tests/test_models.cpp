#include <doctest.h>

#include <cmath>
#include <random>

#include "gomp/models.hpp"

using namespace gomp;

namespace {

// Independent least-squares oracle: normal equations solved by Gaussian
// elimination with partial pivoting, no library solver involved.
Eigen::VectorXd normal_equations_oracle(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const int k = static_cast<int>(X.cols());
    Eigen::MatrixXd A = X.transpose() * X;
    Eigen::VectorXd b = X.transpose() * y;
    for (int col = 0; col < k; ++col) {
        int piv = col;
        for (int r = col + 1; r < k; ++r)
            if (std::fabs(A(r, col)) > std::fabs(A(piv, col))) piv = r;
        A.row(col).swap(A.row(piv));
        std::swap(b[col], b[piv]);
        for (int r = col + 1; r < k; ++r) {
            double f = A(r, col) / A(col, col);
            A.row(r) -= f * A.row(col);
            b[r] -= f * b[col];
        }
    }
    Eigen::VectorXd beta(k);
    for (int r = k - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < k; ++c) s -= A(r, c) * beta[c];
        beta[r] = s / A(r, r);
    }
    return beta;
}

// Independent logistic oracle: plain dense Newton iterations on the score,
// no weights/working-response reformulation.
Eigen::VectorXd newton_logistic_oracle(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const int n = static_cast<int>(X.rows());
    Eigen::MatrixXd Z(n, X.cols() + 1);
    Z.col(0).setOnes();
    Z.rightCols(X.cols()) = X;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(Z.cols());
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXd mu = (1.0 / (1.0 + (-(Z * beta)).array().exp())).matrix();
        Eigen::VectorXd g = Z.transpose() * (y - mu);
        Eigen::MatrixXd H =
            Z.transpose() * (mu.array() * (1.0 - mu.array())).matrix().asDiagonal() * Z;
        Eigen::VectorXd step = H.fullPivLu().solve(g);
        beta += step;
        if (step.cwiseAbs().maxCoeff() < 1e-12) break;
    }
    return beta;
}

// Independent one-dimensional Cox oracle: golden-section maximization of the
// Breslow partial likelihood over a bracket.
double golden_cox_oracle(const Eigen::VectorXd& x, const Eigen::VectorXd& time,
                         const Eigen::VectorXd& event) {
    auto pll = [&](double b) {
        Eigen::MatrixXd X = x;
        Eigen::VectorXd beta(1);
        beta[0] = b;
        return cox_partial_loglik(X, beta, time, event);
    };
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = -20.0, hi = 20.0;
    double c = hi - phi * (hi - lo), d = lo + phi * (hi - lo);
    double fc = pll(c), fd = pll(d);
    while (hi - lo > 1e-12) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = pll(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = pll(d);
        }
    }
    return 0.5 * (lo + hi);
}

Eigen::MatrixXd random_design(int n, int k, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd X(n, k);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) X(i, j) = nd(rng);
    return X;
}

}  // namespace

TEST_CASE("linear fit matches the normal-equations oracle") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 20; ++rep) {
        int n = 15 + static_cast<int>(rng() % 30);
        int k = 1 + static_cast<int>(rng() % 5);
        Eigen::MatrixXd X = random_design(n, k, 100 + rep);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) y[i] = nd(rng);

        FittedModel m = fit_linear(X, y);
        Eigen::MatrixXd Z(n, k + 1);
        Z.col(0).setOnes();
        Z.rightCols(k) = X;
        Eigen::VectorXd oracle = normal_equations_oracle(Z, y);
        CHECK((m.beta - oracle).cwiseAbs().maxCoeff() < 1e-8);

        // Gaussian log-likelihood at the MLE variance
        Eigen::VectorXd r = y - Z * oracle;
        double rss = r.squaredNorm();
        double ll = -0.5 * n * (std::log(2.0 * M_PI * rss / n) + 1.0);
        CHECK(m.log_likelihood == doctest::Approx(ll).epsilon(1e-9));
        CHECK(m.rss == doctest::Approx(rss).epsilon(1e-9));
        CHECK(m.df == k + 1);  // estimated coefficients including the intercept
    }
}

TEST_CASE("linear fit survives exact collinearity") {
    Eigen::MatrixXd X = random_design(30, 2, 7);
    Eigen::MatrixXd Xc(30, 3);
    Xc << X, X.col(0) * 2.0;  // third column aliased
    Eigen::VectorXd y = X.col(0) + Eigen::VectorXd::Random(30) * 0.1;
    FittedModel m = fit_linear(Xc, y);
    REQUIRE(m.dropped_cols.size() == 1);
    CHECK(m.beta[1 + m.dropped_cols[0]] == 0.0);
    // fit quality equals the two-column fit
    FittedModel m2 = fit_linear(X, y);
    CHECK(m.rss == doctest::Approx(m2.rss).epsilon(1e-9));
}

TEST_CASE("logistic fit matches a dense Newton oracle") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud;
    for (int rep = 0; rep < 10; ++rep) {
        int n = 60;
        int k = 1 + static_cast<int>(rng() % 3);
        Eigen::MatrixXd X = random_design(n, k, 300 + rep);
        Eigen::VectorXd beta_true = Eigen::VectorXd::Constant(k, 0.7);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            double eta = X.row(i) * beta_true;
            y[i] = ud(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
        }
        if (y.sum() == 0.0 || y.sum() == n) continue;

        FittedModel m = fit_logistic(X, y);
        if (!m.converged) continue;
        Eigen::VectorXd oracle = newton_logistic_oracle(X, y);
        if (oracle.cwiseAbs().maxCoeff() > 25.0) continue;  // near-separated draw
        CHECK((m.beta - oracle).cwiseAbs().maxCoeff() < 1e-6);
        CHECK(m.log_likelihood == doctest::Approx(logistic_loglik(X, y, oracle)).epsilon(1e-9));
        CHECK(m.df == k + 1);
    }
}

TEST_CASE("separated logistic data reports non-convergence under the cap") {
    // narrow margin: the coefficient must blow past the cap before the
    // log-likelihood change flattens out
    Eigen::MatrixXd X(8, 1);
    X << -0.20, -0.15, -0.10, -0.05, 0.05, 0.10, 0.15, 0.20;
    Eigen::VectorXd y(8);
    y << 0, 0, 0, 0, 1, 1, 1, 1;
    FittedModel m = fit_logistic(X, y);
    CHECK_FALSE(m.converged);
    CHECK(std::isfinite(m.log_likelihood));
}

TEST_CASE("one-dimensional Cox fit matches golden-section maximization") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> nd;
    std::exponential_distribution<double> ed(1.0);
    std::uniform_real_distribution<double> ud;
    for (int rep = 0; rep < 10; ++rep) {
        int n = 50;
        Eigen::VectorXd x(n), time(n), event(n);
        for (int i = 0; i < n; ++i) {
            x[i] = nd(rng);
            time[i] = ed(rng) * std::exp(-0.8 * x[i]);
            event[i] = ud(rng) < 0.8 ? 1.0 : 0.0;
        }
        if (event.sum() < 5) continue;
        Eigen::MatrixXd X = x;
        FittedModel m = fit_cox(X, time, event);
        if (!m.converged) continue;
        double oracle = golden_cox_oracle(x, time, event);
        CHECK(m.beta[0] == doctest::Approx(oracle).epsilon(1e-6));
        Eigen::VectorXd ob(1);
        ob[0] = oracle;
        CHECK(m.log_likelihood ==
              doctest::Approx(cox_partial_loglik(X, ob, time, event)).epsilon(1e-8));
        CHECK(m.has_intercept == false);
        CHECK(m.df == 1);
    }
}

TEST_CASE("cox handles ties via Breslow blocks") {
    // tied event times; partial likelihood evaluated by hand
    Eigen::VectorXd time(4), event(4), x(4);
    time << 1, 1, 2, 3;
    event << 1, 1, 1, 0;
    x << 1, 0, -1, 0.5;
    Eigen::MatrixXd X = x;
    Eigen::VectorXd beta(1);
    beta[0] = 0.4;
    // risk set at t=1 is everyone; two events share the same denominator
    Eigen::VectorXd eta = X * beta;
    double s_all = eta.array().exp().sum();
    double s_after = std::exp(eta[2]) + std::exp(eta[3]);
    double by_hand = eta[0] + eta[1] - 2.0 * std::log(s_all) + eta[2] - std::log(s_after);
    CHECK(cox_partial_loglik(X, beta, time, event) == doctest::Approx(by_hand).epsilon(1e-12));
}

TEST_CASE("cox score matches a finite difference of the partial likelihood") {
    Eigen::VectorXd time(6), event(6), x(6);
    time << 2, 5, 1, 4, 3, 6;
    event << 1, 0, 1, 1, 0, 1;
    x << 0.3, -1.2, 0.8, 0.1, -0.5, 1.4;
    Eigen::MatrixXd X = x;
    Eigen::VectorXd beta(1);
    beta[0] = 0.25;
    const double h = 1e-6;
    Eigen::VectorXd bp = beta, bm = beta;
    bp[0] += h;
    bm[0] -= h;
    double fd =
        (cox_partial_loglik(X, bp, time, event) - cox_partial_loglik(X, bm, time, event)) /
        (2.0 * h);
    CHECK(cox_score(X, beta, time, event)[0] == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("martingale residuals equal the eta-gradient and sum to zero at the fit") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> nd;
    std::exponential_distribution<double> ed(1.0);
    int n = 40;
    Eigen::VectorXd x(n), time(n), event(n);
    for (int i = 0; i < n; ++i) {
        x[i] = nd(rng);
        time[i] = ed(rng);
        event[i] = (i % 4 != 0) ? 1.0 : 0.0;
    }
    Eigen::MatrixXd X = x;
    Outcome o;
    o.kind = OutcomeKind::Survival;
    o.time = time;
    o.event = event;
    FittedModel m = fit_cox(X, time, event);
    Eigen::VectorXd r = residuals(m, X, o, ResidualKind::Martingale);
    auto stats = cox_eta_stats(X * m.beta, time, event);
    CHECK((r - stats.grad).cwiseAbs().maxCoeff() < 1e-12);
    // event_i - cumhaz_i * exp(eta_i) by definition
    Eigen::VectorXd direct =
        event.array() - stats.cumhaz.array() * (X * m.beta).array().exp();
    CHECK((r - direct).cwiseAbs().maxCoeff() < 1e-10);
    if (m.converged) CHECK(std::fabs((r.array() * x.array()).sum()) < 1e-6);
}

TEST_CASE("residual kinds") {
    Eigen::MatrixXd X = random_design(25, 2, 55);
    Eigen::VectorXd y(25);
    std::mt19937_64 rng(56);
    std::uniform_real_distribution<double> ud;
    for (int i = 0; i < 25; ++i) y[i] = ud(rng) < 0.5 ? 1.0 : 0.0;
    Outcome o;
    o.kind = OutcomeKind::Binary;
    o.y = y;
    FittedModel m = fit_logistic(X, y);

    Eigen::VectorXd raw = residuals(m, X, o, ResidualKind::Raw);
    CHECK((raw - (y - m.fitted)).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::VectorXd pe = residuals(m, X, o, ResidualKind::Pearson);
    for (int i = 0; i < 25; ++i) {
        double mu = m.fitted[i];
        CHECK(pe[i] == doctest::Approx((y[i] - mu) / std::sqrt(mu * (1 - mu))).epsilon(1e-10));
    }

    Eigen::VectorXd de = residuals(m, X, o, ResidualKind::Deviance);
    for (int i = 0; i < 25; ++i) {
        double mu = m.fitted[i];
        double dev = y[i] == 1.0 ? -2.0 * std::log(mu) : -2.0 * std::log(1.0 - mu);
        double expect = (y[i] > mu ? 1.0 : -1.0) * std::sqrt(dev);
        CHECK(de[i] == doctest::Approx(expect).epsilon(1e-10));
    }

    // family mismatches refuse
    CHECK_THROWS(residuals(m, X, o, ResidualKind::Martingale));
}

TEST_CASE("default residual kinds per family") {
    CHECK(default_residual(Family::Linear) == ResidualKind::Raw);
    CHECK(default_residual(Family::Logistic) == ResidualKind::Raw);
    CHECK(default_residual(Family::Cox) == ResidualKind::Martingale);
}

TEST_CASE("build_design expands categoricals, reference level dropped") {
    Dataset d;
    FeatureColumn cont;
    cont.name = "x";
    cont.values = Eigen::Vector4d(0.1, 0.2, 0.3, 0.4);
    FeatureColumn cat;
    cat.name = "g";
    cat.kind = FeatureKind::Categorical;
    cat.values = Eigen::Vector4d(0, 1, 2, 1);
    cat.level_count = 3;
    d.features = {cont, cat};
    d.outcome.kind = OutcomeKind::Continuous;
    d.outcome.y = Eigen::Vector4d(1, 2, 3, 4);

    DesignInfo di = build_design(d, {1, 0});
    REQUIRE(di.X.cols() == 3);  // two dummies + one continuous
    CHECK(di.col_feature == std::vector<int>{1, 1, 0});
    CHECK(di.X(0, 0) == 0.0);
    CHECK(di.X(1, 0) == 1.0);
    CHECK(di.X(2, 1) == 1.0);
    CHECK(di.X(3, 0) == 1.0);
    CHECK(di.X(2, 2) == doctest::Approx(0.3));
}

TEST_CASE("likelihood ratio is clamped at zero") {
    Eigen::MatrixXd X = random_design(20, 1, 77);
    Eigen::VectorXd y = Eigen::VectorXd::Random(20);
    FittedModel a = fit_linear(X, y);
    FittedModel b = a;
    b.log_likelihood = a.log_likelihood - 1e-13;  // float noise ordering
    CHECK(log_likelihood_ratio(b, a) == 0.0);
    b.log_likelihood = a.log_likelihood + 2.0;
    CHECK(log_likelihood_ratio(b, a) == doctest::Approx(4.0));
}
