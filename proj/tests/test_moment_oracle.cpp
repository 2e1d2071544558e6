#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "pdrls/errors.hpp"
#include "pdrls/moment_oracle.hpp"
#include "pdrls/network.hpp"

using namespace pdrls;

TEST_CASE("realized update matrices mirror the combination step exactly") {
    // For any masks and any target, stacking (target - combined) must equal
    // the realized update matrix applied to the stacked (target - local)
    // errors when the links are noise-free.  This ties the analysis object
    // to the simulator's arithmetic.
    const Topology t = generate_topology(4, 2.0, 13);
    const CombinationMatrix a = uniform_combination(t);
    const int m = 3;
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const auto masks =
            draw_oracle_masks(SchemeKind::uniform_subset, t.n_nodes, m, 2, rng);
        std::vector<Eigen::VectorXd> psi(t.n_nodes);
        Eigen::VectorXd w_o(m);
        for (int tt = 0; tt < m; ++tt) w_o(tt) = rng.gaussian();
        for (int k = 0; k < t.n_nodes; ++k) {
            psi[k].resize(m);
            for (int tt = 0; tt < m; ++tt) psi[k](tt) = rng.gaussian();
        }
        Eigen::VectorXd stacked_error(t.n_nodes * m);
        Eigen::VectorXd combined_error(t.n_nodes * m);
        for (int k = 0; k < t.n_nodes; ++k) {
            std::map<int, NeighborPayload> received;
            for (int l : t.strict_neighbors(k)) {
                NeighborPayload p;
                p.mask = masks[l];
                p.values.resize(masks[l].count());
                Eigen::Index pos = 0;
                for (int tt = 0; tt < m; ++tt) {
                    if (masks[l].diag(tt) != 0) p.values(pos++) = psi[l](tt);
                }
                received[l] = std::move(p);
            }
            const Eigen::VectorXd w = combine_partial(t, a, k, psi[k], received);
            combined_error.segment(k * m, m) = w_o - w;
            stacked_error.segment(k * m, m) = w_o - psi[k];
        }
        const Eigen::MatrixXd b = sample_update_matrix(t, a, masks, m);
        CHECK((combined_error - b * stacked_error).cwiseAbs().maxCoeff() <
              1e-12);
    }
}

TEST_CASE("sampled mean converges to the closed-form mean matrix") {
    const Topology t = generate_topology(4, 2.0, 17);
    const CombinationMatrix a = uniform_combination(t);
    const int m = 4;
    for (SchemeKind kind : {SchemeKind::sequential, SchemeKind::uniform_subset}) {
        for (int l = 1; l <= m; ++l) {
            const MomentCheck check =
                validate_mean_moment(t, a, kind, l, m, 30000, 5, 1e-2);
            INFO("kind ", scheme_name(kind), " l ", l, " err ",
                 check.max_abs_error);
            CHECK(check.pass);
        }
    }
    // One full-budget check at the tight threshold.
    const MomentCheck full =
        validate_mean_moment(t, a, SchemeKind::uniform_subset, 2, m, 100000,
                             11, 5e-3);
    CHECK(full.pass);
}

TEST_CASE("sampled second moment converges to the closed form") {
    const Topology t = generate_topology(3, 2.0, 19);
    const CombinationMatrix a = uniform_combination(t);
    const MomentCheck indep = validate_second_moment(
        t, a, SchemeKind::uniform_subset, 1, 2, 200000, 21, 1e-2);
    INFO("independent kind err ", indep.max_abs_error);
    CHECK(indep.pass);
    // The shared schedule has coupled cross-node moments; validated with the
    // shared-subset sampler.
    const MomentCheck shared = validate_second_moment(
        t, a, SchemeKind::sequential, 1, 2, 200000, 22, 1e-2);
    INFO("shared kind err ", shared.max_abs_error);
    CHECK(shared.pass);
}

TEST_CASE("second moment sampling refuses oversized systems") {
    const Topology t = generate_topology(5, 2.0, 23);
    const CombinationMatrix a = uniform_combination(t);
    CHECK_THROWS_AS(
        validate_second_moment(t, a, SchemeKind::uniform_subset, 1, 4, 100,
                               1, 1e-2),
        ResourceError);
}

TEST_CASE("sampled link noise covariance matches the closed form") {
    const Topology t = generate_topology(3, 2.0, 29);
    const CombinationMatrix a = uniform_combination(t);
    const auto links = enumerate_links(t);
    std::vector<double> sigma2;
    for (std::size_t j = 0; j < links.size(); ++j) {
        sigma2.push_back(1e-3 + 1e-3 * static_cast<double>(j));
    }
    const LinkNoiseProfile profile = make_link_noise_profile(links, sigma2);
    for (SchemeKind kind : {SchemeKind::sequential, SchemeKind::uniform_subset}) {
        const MomentCheck check = validate_link_noise_covariance(
            t, a, profile, kind, 1, 2, 100000, 31);
        INFO("kind ", scheme_name(kind), " worst err ", check.max_abs_error,
             " allowance ", check.threshold);
        CHECK(check.pass);
    }
}

TEST_CASE("a corrupted reference is caught and located") {
    const Topology t = generate_topology(3, 2.0, 37);
    const CombinationMatrix a = uniform_combination(t);
    const int m = 2;
    const double rho = 0.5;
    const Eigen::MatrixXd q = mean_update_matrix(t, a, rho, m);
    Eigen::MatrixXd corrupted = q;
    corrupted(2, 3) += 0.05;
    const MomentCheck check = compare_moments(q, corrupted, 5e-3, 1);
    CHECK_FALSE(check.pass);
    CHECK(check.row == 2);
    CHECK(check.col == 3);
    CHECK(check.max_abs_error == doctest::Approx(0.05).epsilon(1e-12));
}
