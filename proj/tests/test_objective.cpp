#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "clbr/errors.hpp"
#include "clbr/objective.hpp"
#include "clbr/rng.hpp"
#include "support/oracles.hpp"

using namespace clbr;

namespace {

PropagatedEmbeddings table_of(const NodeSpace& space, int dim, std::uint64_t seed) {
    PropagatedEmbeddings p;
    p.space = space;
    p.values.resize(space.total(), dim);
    RngStream rng(seed);
    for (Eigen::Index r = 0; r < p.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) p.values(r, c) = rng.gaussian(0, 1);
    }
    return p;
}

TrainBatch random_batch(const NodeSpace& space, int triples, std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<TrainBatch::Triple> t;
    for (int i = 0; i < triples; ++i) {
        const auto user = static_cast<NodeId>(rng.uniform_index(space.num_users));
        const auto pos = static_cast<NodeId>(rng.uniform_index(space.num_bundles));
        auto neg = static_cast<NodeId>(rng.uniform_index(space.num_bundles));
        if (neg == pos) neg = (neg + 1) % space.num_bundles;
        t.push_back({user, pos, neg});
    }
    return make_train_batch(std::move(t));
}

}  // namespace

TEST_CASE("distance is -exp(dot/tau)") {
    RowVector u(2), v(2);
    u << 1, 0;
    v << 0, 1;
    CHECK(distance(u, u, 1.0) == doctest::Approx(-std::exp(1.0)));     // -2.718281828...
    CHECK(distance(u, v, 1.0) == doctest::Approx(-1.0));
    CHECK(distance(u, v, 0.37) == doctest::Approx(-1.0));
    CHECK(distance(u, u, 2.0) == doctest::Approx(-1.6487212707001282));
    CHECK_THROWS_AS(distance(u, v, 0.0), ConfigError);
}

TEST_CASE("distance symmetry and monotonicity on sampled grids") {
    RngStream rng(3);
    for (int i = 0; i < 50; ++i) {
        RowVector a(4), b(4);
        for (int c = 0; c < 4; ++c) {
            a(c) = rng.gaussian(0, 1);
            b(c) = rng.gaussian(0, 1);
        }
        CHECK(distance(a, b, 1.3) == distance(b, a, 1.3));
    }
    // Strictly decreasing in the inner product at fixed tau.
    RowVector e1(2), probe(2);
    e1 << 1, 0;
    double prev = 1e300;
    for (double dot = -1.0; dot <= 1.0; dot += 0.125) {
        probe << dot, 0;
        const double d = distance(e1, probe, 0.8);
        CHECK(d < prev);
        prev = d;
    }
    // Strictly increasing in tau for positive inner products.
    probe << 0.9, 0;
    prev = -1e300;
    for (double tau = 0.25; tau <= 4.0; tau *= 2.0) {
        const double d = distance(e1, probe, tau);
        CHECK(d > prev);
        prev = d;
    }
}

TEST_CASE("constraint_loss hand values") {
    SUBCASE("single-row batch is the bare consistency distance") {
        Matrix row(1, 2);
        row << 1, 0;
        CHECK(constraint_loss(row, row, std::nullopt, 1.0) == doctest::Approx(-std::exp(1.0)));
    }
    SUBCASE("two orthogonal identical-view rows, lambda 1") {
        Matrix rows(2, 2);
        rows << 1, 0, 0, 1;
        CHECK(constraint_loss(rows, rows, 1.0, 1.0) == doctest::Approx(1.0 - std::exp(1.0)));
    }
    SUBCASE("lambda 0 reduces to the mean consistency distance") {
        Matrix rows(2, 2);
        rows << 1, 0, 0, 1;
        CHECK(constraint_loss(rows, rows, 0.0, 1.0) == doctest::Approx(-std::exp(1.0)));
    }
    SUBCASE("shape mismatch is an error") {
        Matrix a(2, 2), b(3, 2);
        CHECK_THROWS_AS(constraint_loss(a, b, std::nullopt, 1.0), DataError);
    }
}

TEST_CASE("bpr_loss hand values") {
    CHECK(bpr_loss({1.0}, {1.0}) == doctest::Approx(std::log(2.0)));  // sigma(0) = 1/2
    CHECK(bpr_loss({1.0}, {0.0}) == doctest::Approx(0.31326168751822286));
    CHECK(bpr_loss({50.0}, {0.0}) < 1e-6);  // large-margin limit
    CHECK(bpr_loss({1.0, 1.0}, {1.0, 0.0}) ==
          doctest::Approx(0.5 * (std::log(2.0) + 0.31326168751822286)));
    CHECK_THROWS_AS(bpr_loss({}, {}), DataError);
    CHECK_THROWS_AS(bpr_loss({1.0}, {1.0, 2.0}), DataError);
}

TEST_CASE("total_loss composition") {
    LossConfig cfg;
    cfg.omega_u = 0.0;
    cfg.omega_b = 0.0;
    CHECK(total_loss(0.7, -3.0, 5.0, cfg).total == 0.7);

    cfg.omega_u = 0.1;
    cfg.omega_b = 0.05;
    const LossBreakdown b = total_loss(0.5, -1.0, -2.0, cfg);
    CHECK(b.total == doctest::Approx(0.3));
    CHECK(total_loss(0, 0, 0, cfg).total == 0.0);

    RngStream rng(5);
    for (int i = 0; i < 100; ++i) {
        cfg.omega_u = rng.uniform_real();
        cfg.omega_b = rng.uniform_real();
        const double task = rng.gaussian(0, 2);
        const double lu = rng.gaussian(0, 2);
        const double lb = rng.gaussian(0, 2);
        const LossBreakdown out = total_loss(task, lu, lb, cfg);
        CHECK(std::abs(out.total - (out.l_task + cfg.omega_u * out.l_u + cfg.omega_b * out.l_b)) <
              1e-12);
    }
}

TEST_CASE("make_train_batch derives sorted unique constraint rows") {
    const TrainBatch batch = make_train_batch({{3, 1, 0}, {1, 1, 2}, {3, 0, 1}});
    CHECK(batch.users == std::vector<NodeId>{1, 3});
    CHECK(batch.bundles == std::vector<NodeId>{0, 1});
    CHECK(batch.triples.size() == 3);
}

TEST_CASE("single BPR triple at zero margin gives the -1/2 gradient pattern") {
    const NodeSpace space{2, 1, 2};
    PropagatedEmbeddings prop = table_of(space, 3, 8);
    // Force equal positive and negative scores for user 0.
    prop.values.row(space.global_bundle(1)) = prop.values.row(space.global_bundle(0));
    const TrainBatch batch = make_train_batch({{0, 0, 1}});

    LossConfig cfg;
    cfg.omega_u = cfg.omega_b = 0.0;
    const LossGradients g = loss_gradients(batch, prop, nullptr, cfg);
    const RowVector xu = prop.values.row(space.global_user(0));
    const RowVector xp = prop.values.row(space.global_bundle(0));
    const RowVector xn = prop.values.row(space.global_bundle(1));

    CHECK((g.d_factual.row(space.global_user(0)) + 0.5 * (xp - xn)).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK((g.d_factual.row(space.global_bundle(0)) + 0.5 * xu).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((g.d_factual.row(space.global_bundle(1)) - 0.5 * xu).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(g.breakdown.total == doctest::Approx(std::log(2.0)));
}

TEST_CASE("analytic gradients match finite differences on the propagated embeddings") {
    const NodeSpace space{5, 3, 4};
    const PropagatedEmbeddings factual = table_of(space, 3, 21);
    const PropagatedEmbeddings view = table_of(space, 3, 22);
    const TrainBatch batch = random_batch(space, 8, 23);

    LossConfig cfg;
    cfg.omega_u = 0.4;
    cfg.omega_b = 0.25;
    cfg.tau = 0.9;

    const LossGradients analytic = loss_gradients(batch, factual, &view, cfg);

    const auto loss_of_factual = [&](const Matrix& values) {
        PropagatedEmbeddings probe = factual;
        probe.values = values;
        return compute_loss(batch, probe, &view, cfg).total;
    };
    const auto loss_of_view = [&](const Matrix& values) {
        PropagatedEmbeddings probe = view;
        probe.values = values;
        return compute_loss(batch, factual, &probe, cfg).total;
    };

    const Matrix fd_factual =
        testsupport::finite_difference_gradient(loss_of_factual, factual.values, 1e-5);
    const Matrix fd_view = testsupport::finite_difference_gradient(loss_of_view, view.values, 1e-5);

    CHECK(testsupport::max_relative_error(analytic.d_factual, fd_factual) < 1e-5);
    CHECK(testsupport::max_relative_error(analytic.d_view, fd_view) < 1e-5);
}

TEST_CASE("constraint gradient vanishes by symmetry on identical constant embeddings") {
    const NodeSpace space{4, 2, 3};
    PropagatedEmbeddings prop;
    prop.space = space;
    prop.values = Matrix::Ones(space.total(), 3) * 0.6;
    const TrainBatch batch = random_batch(space, 6, 31);

    LossConfig with_constraint;
    with_constraint.omega_u = 1.0;
    with_constraint.omega_b = 1.0;
    LossConfig without;
    without.omega_u = 0.0;
    without.omega_b = 0.0;

    const LossGradients g1 = loss_gradients(batch, prop, &prop, with_constraint);
    const LossGradients g0 = loss_gradients(batch, prop, nullptr, without);
    CHECK((g1.d_factual - g0.d_factual).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(g1.d_view.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("nonzero constraint weights without a view are rejected") {
    const NodeSpace space{2, 2, 2};
    const PropagatedEmbeddings prop = table_of(space, 2, 40);
    const TrainBatch batch = make_train_batch({{0, 0, 1}});
    LossConfig cfg;
    cfg.omega_u = 0.5;
    CHECK_THROWS_AS(loss_gradients(batch, prop, nullptr, cfg), ConfigError);
}
