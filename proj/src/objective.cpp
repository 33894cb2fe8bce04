#include "clbr/objective.hpp"

#include <algorithm>
#include <cmath>

#include "clbr/errors.hpp"

namespace clbr {

namespace {

double softplus(double z) {
    // log(1 + e^z) without overflow.
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Gradient of x -> x/||x|| applied to an upstream gradient g. Zero rows
// normalize to themselves, so the gradient passes through unchanged.
RowVector normalization_backward(const RowVector& g, const RowVector& unit_row, double norm) {
    if (norm == 0.0) return g;
    return (g - unit_row.dot(g) * unit_row) / norm;
}

// One side (users or bundles) of the constraint. Returns the unweighted
// loss; when d_factual/d_view are non-null, accumulates `weight` times the
// loss gradient w.r.t. the unnormalized propagated rows.
double constraint_side(const std::vector<NodeId>& rows, NodeType type,
                       const PropagatedEmbeddings& factual, const PropagatedEmbeddings& view,
                       std::optional<double> lambda_opt, double tau, double weight,
                       Matrix* d_factual, Matrix* d_view) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (n == 0) return 0.0;

    const NodeSpace& space = factual.space;
    const int dim = static_cast<int>(factual.values.cols());
    const double lambda = lambda_opt.value_or(n > 1 ? 1.0 / static_cast<double>(n - 1) : 0.0);

    Matrix fx(n, dim), vx(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        const NodeId g = space.global_id(type, rows[i]);
        fx.row(i) = factual.values.row(g);
        vx.row(i) = view.values.row(g);
    }
    Eigen::VectorXd f_norm(n), v_norm(n);
    Matrix f(n, dim), c(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        f_norm(i) = fx.row(i).norm();
        v_norm(i) = vx.row(i).norm();
        f.row(i) = fx.row(i);
        c.row(i) = vx.row(i);
        if (f_norm(i) > 0.0) f.row(i) /= f_norm(i);
        if (v_norm(i) > 0.0) c.row(i) /= v_norm(i);
    }

    // S(i,j) = exp(c_i . f_j / tau); D(c_i, f_j) = -S(i,j).
    Matrix S = ((c * f.transpose()) / tau).array().exp();

    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double unres = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) unres += S(j, i);
        }
        loss += -S(i, i) + lambda * unres;
    }
    loss /= static_cast<double>(n);

    if (d_factual == nullptr || d_view == nullptr || weight == 0.0) return loss;

    const double inv_n = 1.0 / static_cast<double>(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        RowVector dc = RowVector::Zero(dim);
        RowVector df = RowVector::Zero(dim);
        dc += -S(k, k) / tau * f.row(k);
        df += -S(k, k) / tau * c.row(k);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i == k) continue;
            dc += lambda * S(k, i) / tau * f.row(i);
            df += lambda * S(i, k) / tau * c.row(i);
        }
        dc *= inv_n;
        df *= inv_n;

        const NodeId g = space.global_id(type, rows[k]);
        d_view->row(g) += weight * normalization_backward(dc, c.row(k), v_norm(k));
        d_factual->row(g) += weight * normalization_backward(df, f.row(k), f_norm(k));
    }
    return loss;
}

// Mean BPR loss over the batch triples; optionally accumulates gradients
// w.r.t. the propagated factual table.
double bpr_side(const std::vector<TrainBatch::Triple>& triples, const PropagatedEmbeddings& factual,
                Matrix* d_factual) {
    if (triples.empty()) throw DataError("BPR loss requires at least one triple");
    const NodeSpace& space = factual.space;
    const double inv_m = 1.0 / static_cast<double>(triples.size());

    double loss = 0.0;
    for (const auto& t : triples) {
        const NodeId gu = space.global_user(t.user);
        const NodeId gp = space.global_bundle(t.pos_bundle);
        const NodeId gn = space.global_bundle(t.neg_bundle);
        const auto xu = factual.values.row(gu);
        const auto xp = factual.values.row(gp);
        const auto xn = factual.values.row(gn);
        const double margin = xu.dot(xp) - xu.dot(xn);
        loss += softplus(-margin) * inv_m;
        if (d_factual != nullptr) {
            const double coeff = -sigmoid(-margin) * inv_m;  // d/dmargin of -ln sigmoid(margin)
            d_factual->row(gu) += coeff * (xp - xn);
            d_factual->row(gp) += coeff * xu;
            d_factual->row(gn) -= coeff * xu;
        }
    }
    return loss;
}

LossGradients evaluate_objective(const TrainBatch& batch, const PropagatedEmbeddings& factual,
                                 const PropagatedEmbeddings* view, const LossConfig& cfg,
                                 bool with_gradients) {
    cfg.validate();
    const bool use_constraint = cfg.omega_u > 0.0 || cfg.omega_b > 0.0;
    if (use_constraint && view == nullptr) {
        throw ConfigError("constraint weights are nonzero but no counterfactual view was given");
    }
    if (view != nullptr && view->values.rows() != factual.values.rows()) {
        throw DataError("factual and view embeddings disagree on table size");
    }

    LossGradients out;
    if (with_gradients) {
        out.d_factual = Matrix::Zero(factual.values.rows(), factual.values.cols());
        if (use_constraint) out.d_view = Matrix::Zero(factual.values.rows(), factual.values.cols());
    }
    Matrix* df = with_gradients ? &out.d_factual : nullptr;
    Matrix* dv = with_gradients && use_constraint ? &out.d_view : nullptr;

    const double l_task = bpr_side(batch.triples, factual, df);
    double l_u = 0.0;
    double l_b = 0.0;
    if (use_constraint) {
        l_u = constraint_side(batch.users, NodeType::User, factual, *view, cfg.lambda_u, cfg.tau,
                              cfg.omega_u, df, dv);
        l_b = constraint_side(batch.bundles, NodeType::Bundle, factual, *view, cfg.lambda_b,
                              cfg.tau, cfg.omega_b, df, dv);
    }
    out.breakdown = total_loss(l_task, l_u, l_b, cfg);
    return out;
}

}  // namespace

void LossConfig::validate() const {
    if (omega_u < 0.0 || omega_b < 0.0) {
        throw ConfigError("constraint weights omega_u/omega_b must be non-negative");
    }
    if (tau <= 0.0) throw ConfigError("temperature tau must be positive");
    if ((lambda_u && *lambda_u < 0.0) || (lambda_b && *lambda_b < 0.0)) {
        throw ConfigError("lambda_u/lambda_b must be non-negative when set");
    }
}

double distance(const RowVector& e_i, const RowVector& e_j, double tau) {
    if (tau <= 0.0) throw ConfigError("temperature tau must be positive");
    if (e_i.size() != e_j.size()) throw DataError("distance: dimension mismatch");
    return -std::exp(e_i.dot(e_j) / tau);
}

double constraint_loss(const Matrix& view_rows, const Matrix& factual_rows,
                       std::optional<double> lambda, double tau) {
    if (view_rows.rows() != factual_rows.rows() || view_rows.cols() != factual_rows.cols()) {
        throw DataError("constraint_loss: block shapes differ");
    }
    if (tau <= 0.0) throw ConfigError("temperature tau must be positive");
    const auto n = view_rows.rows();
    if (n == 0) return 0.0;
    const double lam = lambda.value_or(n > 1 ? 1.0 / static_cast<double>(n - 1) : 0.0);

    Matrix S = ((view_rows * factual_rows.transpose()) / tau).array().exp();
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double unres = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) unres += S(j, i);
        }
        loss += -S(i, i) + lam * unres;
    }
    return loss / static_cast<double>(n);
}

double bpr_loss(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores) {
    if (pos_scores.empty() || pos_scores.size() != neg_scores.size()) {
        throw DataError("bpr_loss requires equal-length, nonempty score lists");
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < pos_scores.size(); ++i) {
        loss += softplus(-(pos_scores[i] - neg_scores[i]));
    }
    return loss / static_cast<double>(pos_scores.size());
}

LossBreakdown total_loss(double l_task, double l_u, double l_b, const LossConfig& cfg) {
    LossBreakdown b;
    b.l_task = l_task;
    b.l_u = l_u;
    b.l_b = l_b;
    b.total = l_task + cfg.omega_u * l_u + cfg.omega_b * l_b;
    return b;
}

TrainBatch make_train_batch(std::vector<TrainBatch::Triple> triples) {
    TrainBatch batch;
    batch.users.reserve(triples.size());
    batch.bundles.reserve(triples.size());
    for (const auto& t : triples) {
        batch.users.push_back(t.user);
        batch.bundles.push_back(t.pos_bundle);
    }
    auto uniq = [](std::vector<NodeId>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(batch.users);
    uniq(batch.bundles);
    batch.triples = std::move(triples);
    return batch;
}

LossBreakdown compute_loss(const TrainBatch& batch, const PropagatedEmbeddings& factual,
                           const PropagatedEmbeddings* view, const LossConfig& cfg) {
    return evaluate_objective(batch, factual, view, cfg, /*with_gradients=*/false).breakdown;
}

LossGradients loss_gradients(const TrainBatch& batch, const PropagatedEmbeddings& factual,
                             const PropagatedEmbeddings* view, const LossConfig& cfg) {
    return evaluate_objective(batch, factual, view, cfg, /*with_gradients=*/true);
}

}  // namespace clbr
