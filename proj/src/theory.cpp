#include "pdrls/theory.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "pdrls/errors.hpp"

namespace pdrls {

namespace {

void check_dimension(int n_nodes, int m) {
    if (static_cast<long>(n_nodes) * m > kMaxTheoryDimension) {
        std::ostringstream msg;
        msg << "closed-form analysis supports n_nodes * m <= "
            << kMaxTheoryDimension << " (got " << n_nodes * m << ")";
        throw ResourceError(msg.str());
    }
}

/// vec by column stacking: out(j*n + i) = a(i, j).
Eigen::VectorXd vec_columns(const Eigen::MatrixXd& a) {
    return Eigen::Map<const Eigen::VectorXd>(a.data(), a.size());
}

} // namespace

Eigen::MatrixXd mean_update_matrix(const Topology& topology,
                                   const CombinationMatrix& weights,
                                   double rho, int m) {
    const int n_nodes = topology.n_nodes;
    check_dimension(n_nodes, m);
    const Eigen::Index n = static_cast<Eigen::Index>(n_nodes) * m;
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    for (int p = 0; p < n_nodes; ++p) {
        double neighbor_weight = 0.0;
        for (int l : topology.strict_neighbors(p)) {
            neighbor_weight += weights.weights(l, p);
        }
        const double diag = 1.0 - rho * neighbor_weight;
        for (int t = 0; t < m; ++t) q(p * m + t, p * m + t) = diag;
        for (int l : topology.strict_neighbors(p)) {
            const double off = rho * weights.weights(l, p);
            for (int t = 0; t < m; ++t) q(p * m + t, l * m + t) = off;
        }
    }
    return q;
}

double selection_pair_probability(SchemeKind kind, int node_p, int node_q,
                                  int t1, int t2, int l, int m) {
    if (m < 1 || l < 1 || l > m) {
        throw ConfigError("entry count must satisfy 1 <= l <= m");
    }
    if (l == m) return 1.0;
    const double rho = static_cast<double>(l) / m;
    const bool shared = (kind == SchemeKind::sequential) || (node_p == node_q);
    if (!shared) return rho * rho;
    if (t1 == t2) return rho;
    // Both entries drawn from one uniform l-subset; m >= 2 since l < m.
    return rho * static_cast<double>(l - 1) / static_cast<double>(m - 1);
}

Eigen::MatrixXd selection_pair_moment(SchemeKind kind, int t, int node_p,
                                      int node_q, int l, int m) {
    if (t < 0 || t >= m) throw ConfigError("entry index out of range");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
    for (int t2 = 0; t2 < m; ++t2) {
        out(t2, t2) =
            selection_pair_probability(kind, node_p, node_q, t, t2, l, m);
    }
    return out;
}

namespace {

/// One block of the update matrix: entry (p*m+t, q*m+t) is affine in the
/// selection indicators, c0 + sum_j coef_j * kappa(t, node_j).
struct AffineBlock {
    int p = 0;
    int q = 0;
    double c0 = 0.0;
    std::vector<std::pair<int, double>> terms; // (node, coefficient)
};

std::vector<AffineBlock> collect_blocks(const Topology& topology,
                                        const CombinationMatrix& weights) {
    std::vector<AffineBlock> blocks;
    for (int p = 0; p < topology.n_nodes; ++p) {
        AffineBlock diag;
        diag.p = p;
        diag.q = p;
        diag.c0 = 1.0;
        for (int l : topology.strict_neighbors(p)) {
            diag.terms.emplace_back(l, -weights.weights(l, p));
        }
        blocks.push_back(std::move(diag));
        for (int q : topology.strict_neighbors(p)) {
            AffineBlock off;
            off.p = p;
            off.q = q;
            off.terms.emplace_back(q, weights.weights(q, p));
            blocks.push_back(std::move(off));
        }
    }
    return blocks;
}

} // namespace

Eigen::MatrixXd update_second_moment(const Topology& topology,
                                     const CombinationMatrix& weights,
                                     SchemeKind kind, int l, int m) {
    const int n_nodes = topology.n_nodes;
    check_dimension(n_nodes, m);
    if (m < 1 || l < 1 || l > m) {
        throw ConfigError("entry count must satisfy 1 <= l <= m");
    }
    const Eigen::Index n = static_cast<Eigen::Index>(n_nodes) * m;
    const double rho = static_cast<double>(l) / m;
    const std::vector<AffineBlock> blocks = collect_blocks(topology, weights);

    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n * n, n * n);
    for (const AffineBlock& b1 : blocks) {
        for (const AffineBlock& b2 : blocks) {
            for (int t1 = 0; t1 < m; ++t1) {
                for (int t2 = 0; t2 < m; ++t2) {
                    double val = b1.c0 * b2.c0;
                    for (const auto& [node2, c2] : b2.terms) {
                        val += b1.c0 * c2 * rho;
                    }
                    for (const auto& [node1, c1] : b1.terms) {
                        val += b2.c0 * c1 * rho;
                        for (const auto& [node2, c2] : b2.terms) {
                            val += c1 * c2 *
                                   selection_pair_probability(
                                       kind, node1, node2, t1, t2, l, m);
                        }
                    }
                    // Kronecker square of the transpose: value of
                    // E[b(p1,q1,t1) * b(p2,q2,t2)] lands at
                    // row (q1*m+t1)*n + q2*m+t2, col (p1*m+t1)*n + p2*m+t2.
                    const Eigen::Index row =
                        (static_cast<Eigen::Index>(b1.q) * m + t1) * n +
                        static_cast<Eigen::Index>(b2.q) * m + t2;
                    const Eigen::Index col =
                        (static_cast<Eigen::Index>(b1.p) * m + t1) * n +
                        static_cast<Eigen::Index>(b2.p) * m + t2;
                    phi(row, col) = val;
                }
            }
        }
    }
    return phi;
}

Eigen::MatrixXd measurement_noise_matrix(
    const std::vector<NodeProfile>& profiles, double lambda) {
    if (profiles.empty()) throw ConfigError("at least one node profile required");
    const int m = static_cast<int>(profiles[0].r_u.size());
    const int n_nodes = static_cast<int>(profiles.size());
    const double c = (1.0 - lambda) * (1.0 - lambda);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_nodes) * m,
                                              static_cast<Eigen::Index>(n_nodes) * m);
    for (int k = 0; k < n_nodes; ++k) {
        if (profiles[k].r_u.size() != m) {
            throw ConfigError("node profiles must share one filter length");
        }
        for (int t = 0; t < m; ++t) {
            g(k * m + t, k * m + t) = c * profiles[k].sigma2_v / profiles[k].r_u(t);
        }
    }
    return g;
}

Eigen::MatrixXd link_noise_covariance(const Topology& topology,
                                      const CombinationMatrix& weights,
                                      const LinkNoiseProfile& link_profile,
                                      double rho, int m) {
    const int n_nodes = topology.n_nodes;
    const Eigen::Index n = static_cast<Eigen::Index>(n_nodes) * m;
    Eigen::MatrixXd rv = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n_nodes; ++k) {
        double acc = 0.0;
        for (int l : topology.strict_neighbors(k)) {
            const double a = weights.weights(l, k);
            acc += a * a * link_profile.at(l, k);
        }
        const double diag = rho * acc;
        for (int t = 0; t < m; ++t) rv(k * m + t, k * m + t) = diag;
    }
    return rv;
}

TheoryModel build_theory_model(const TheoryInputs& inputs) {
    const Topology& topology = inputs.topology;
    const int n_nodes = topology.n_nodes;
    if (static_cast<int>(inputs.node_profiles.size()) != n_nodes) {
        throw ConfigError("one node profile required per node");
    }
    const int m = static_cast<int>(inputs.node_profiles[0].r_u.size());
    check_dimension(n_nodes, m);
    if (!(inputs.lambda > 0.0) || inputs.lambda > 1.0) {
        throw ConfigError("forgetting factor must lie in (0, 1]");
    }
    const std::vector<DirectedLink> canonical = enumerate_links(topology);
    if (inputs.link_profile.links.size() != canonical.size()) {
        throw ConfigError("link noise profile must cover every link exactly once");
    }
    for (const DirectedLink& link : canonical) {
        inputs.link_profile.at(link.source, link.sink); // throws if missing
    }

    TheoryModel model;
    model.n_nodes = n_nodes;
    model.m = m;
    model.lambda = inputs.lambda;
    model.scheme = inputs.scheme;
    model.rho = transmission_fraction(inputs.entries_l, m);
    if (inputs.scheme != SchemeKind::uniform_subset &&
        m % inputs.entries_l != 0) {
        model.warnings.push_back(
            "entries do not divide the filter length; partition blocks are "
            "uneven and the analysis uses the nominal fraction l/m");
    }
    model.mean_matrix =
        mean_update_matrix(topology, inputs.weights, model.rho, m);
    model.second_moment = update_second_moment(topology, inputs.weights,
                                               inputs.scheme, inputs.entries_l, m);
    const Eigen::Index n = static_cast<Eigen::Index>(n_nodes) * m;
    model.noise_gain = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n_nodes; ++k) {
        for (int t = 0; t < m; ++t) {
            model.noise_gain(k * m + t, k * m + t) =
                (1.0 - inputs.lambda) / inputs.node_profiles[k].r_u(t);
        }
    }
    model.measurement_noise =
        measurement_noise_matrix(inputs.node_profiles, inputs.lambda);
    model.link_noise = link_noise_covariance(topology, inputs.weights,
                                             inputs.link_profile, model.rho, m);
    return model;
}

double spectral_radius_dense(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw ConfigError("spectral radius requires a square matrix");
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
    if (solver.info() != Eigen::Success) {
        throw DomainError("eigenvalue computation failed");
    }
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_radius_power(const Eigen::MatrixXd& a, int max_iters,
                             double tol) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw ConfigError("spectral radius requires a square matrix");
    }
    if ((a.array() < 0.0).any()) {
        throw ConfigError("power iteration here assumes a nonnegative matrix");
    }
    const Eigen::Index n = a.rows();
    Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    double ratio = 0.0;
    int stable = 0;
    Eigen::VectorXd y(n);
    for (int it = 0; it < max_iters; ++it) {
        y.noalias() = a * v;
        const double norm = y.lpNorm<1>();
        if (norm == 0.0) return 0.0;
        const double next = norm; // v is normalized to unit 1-norm
        v = y / norm;
        if (std::abs(next - ratio) <= tol * std::max(1.0, std::abs(next))) {
            if (++stable >= 5) return next;
        } else {
            stable = 0;
        }
        ratio = next;
    }
    return ratio;
}

StabilityReport stability_report(const TheoryModel& model) {
    StabilityReport report;
    report.lambda = model.lambda;
    report.mean_radius =
        model.lambda * spectral_radius_dense(model.mean_matrix);
    report.second_moment_radius =
        model.lambda * model.lambda * spectral_radius_power(model.second_moment);
    return report;
}

MsdPrediction steady_state_msd(const TheoryModel& model) {
    if (model.lambda >= 1.0) {
        throw DomainError(
            "steady-state theory is undefined at lambda = 1 (singular system)");
    }
    const Eigen::Index n = static_cast<Eigen::Index>(model.n_nodes) * model.m;
    const Eigen::Index n2 = n * n;
    const double lam2 = model.lambda * model.lambda;

    Eigen::VectorXd b = Eigen::VectorXd::Zero(n2);
    for (Eigen::Index i = 0; i < n; ++i) {
        b(i * n + i) = 1.0 / static_cast<double>(model.n_nodes);
    }

    // system = I - lambda^2 * second_moment, decomposed in place; residuals
    // are recomputed through the stored second moment instead.
    Eigen::MatrixXd system = (-lam2) * model.second_moment;
    system.diagonal().array() += 1.0;
    Eigen::PartialPivLU<Eigen::Ref<Eigen::MatrixXd>> lu(system);

    Eigen::VectorXd sigma = lu.solve(b);
    Eigen::VectorXd phi_sigma = model.second_moment * sigma;
    Eigen::VectorXd residual = b - (sigma - lam2 * phi_sigma);
    for (int pass = 0; pass < 2; ++pass) {
        const double r = residual.cwiseAbs().maxCoeff();
        if (r <= 1e-10 * std::max(1.0, b.cwiseAbs().maxCoeff())) break;
        sigma += lu.solve(residual);
        phi_sigma.noalias() = model.second_moment * sigma;
        residual = b - (sigma - lam2 * phi_sigma);
    }
    const double final_residual = residual.cwiseAbs().maxCoeff();
    if (final_residual > 1e-10 * std::max(1.0, b.cwiseAbs().maxCoeff())) {
        std::ostringstream msg;
        msg << "steady-state solve failed: residual = " << final_residual;
        throw DomainError(msg.str());
    }

    const Eigen::VectorXd vec_g = vec_columns(model.measurement_noise);
    const Eigen::VectorXd vec_rv = vec_columns(model.link_noise);
    MsdPrediction out;
    out.msd_ideal = vec_g.dot(phi_sigma);
    out.noise_penalty = vec_rv.dot(sigma);
    out.msd_noisy = out.msd_ideal + out.noise_penalty;
    return out;
}

std::vector<double> transient_msd(const TheoryModel& model,
                                  const GroundTruth& truth, int iterations) {
    if (iterations < 1) throw ConfigError("iteration count must be positive");
    if (truth.w_o.size() != model.m) {
        throw ConfigError("ground truth length must match the filter length");
    }
    const Eigen::Index n = static_cast<Eigen::Index>(model.n_nodes) * model.m;
    const Eigen::Index n2 = n * n;
    const double lam2 = model.lambda * model.lambda;

    Eigen::VectorXd w0(n);
    for (int k = 0; k < model.n_nodes; ++k) {
        w0.segment(static_cast<Eigen::Index>(k) * model.m, model.m) = truth.w_o;
    }
    Eigen::VectorXd s = Eigen::VectorXd::Zero(n2);
    for (Eigen::Index i = 0; i < n; ++i) {
        s(i * n + i) = 1.0 / static_cast<double>(model.n_nodes);
    }
    const Eigen::VectorXd vec_g = vec_columns(model.measurement_noise);
    const Eigen::VectorXd vec_rv = vec_columns(model.link_noise);

    std::vector<double> msd;
    msd.reserve(iterations);
    double forcing = 0.0;
    Eigen::VectorXd phi_s(n2);
    for (int i = 0; i < iterations; ++i) {
        const Eigen::Map<const Eigen::MatrixXd> mat_s(s.data(), n, n);
        msd.push_back(w0.dot(mat_s * w0) + forcing);
        phi_s.noalias() = model.second_moment * s;
        forcing += vec_g.dot(phi_s) + vec_rv.dot(s);
        s = lam2 * phi_s;
    }
    return msd;
}

std::vector<Eigen::VectorXd> predict_mean_error(const TheoryModel& model,
                                                const Eigen::VectorXd& initial,
                                                int iterations) {
    const Eigen::Index n = static_cast<Eigen::Index>(model.n_nodes) * model.m;
    if (initial.size() != n) {
        throw ConfigError("initial mean error must have length n_nodes * m");
    }
    if (iterations < 0) throw ConfigError("iteration count must be nonnegative");
    std::vector<Eigen::VectorXd> out;
    out.reserve(iterations + 1);
    out.push_back(initial);
    for (int i = 0; i < iterations; ++i) {
        out.push_back(model.lambda * (model.mean_matrix * out.back()));
    }
    return out;
}

} // namespace pdrls
