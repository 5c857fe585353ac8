#include "adaptune/error.hpp"
#include "adaptune/objective.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace adaptune;
using adaptune::testing::random_matrix;

TEST_SUITE("objective") {

TEST_CASE("gradients through every placement match central differences") {
    Rng rng(21);
    for (AdaptorKind kind : {AdaptorKind::Dense, AdaptorKind::Mlp}) {
        for (Placement p : kAllPlacements) {
            int done = 0;
            while (done < 10) {
                AdaptorConfig ac;
                ac.kind = kind;
                ac.placement = p;
                ac.dim = 3 + rng.uniform_int(3);
                ac.hidden_dim = 3 + rng.uniform_int(4);
                ac.seed = rng.next_u64();
                AdaptorSet set = make_adaptor_set(ac);
                const auto d = static_cast<Eigen::Index>(ac.dim);
                Eigen::MatrixXd img = random_matrix(rng, 3, d);
                Eigen::MatrixXd pos = random_matrix(rng, 2, d);
                Eigen::MatrixXd neg = random_matrix(rng, 2, d);
                Eigen::MatrixXd y = Eigen::MatrixXd::Zero(3, 2);
                y(0, 0) = y(2, 1) = 1;
                if (adaptune::testing::fd_unsafe(set, img, pos, neg)) continue;
                const std::vector<std::uint8_t> mask{1, 1};
                const auto check =
                    adaptune::testing::check_objective_gradients(set, img, y, pos, neg, mask, 1e-4, 1e-8);
                CHECK(check.failed == 0);
                ++done;
            }
        }
    }
}

TEST_CASE("shared placement sums both paths into one store") {
    Rng rng(22);
    AdaptorConfig ac;
    ac.kind = AdaptorKind::Dense;
    ac.placement = Placement::Shared;
    ac.dim = 4;
    ac.seed = 3;
    const AdaptorSet shared = make_adaptor_set(ac);
    ac.placement = Placement::Both;
    AdaptorSet both = make_adaptor_set(ac, {shared.stores()[0], shared.stores()[0]});
    const Eigen::MatrixXd img = random_matrix(rng, 5, 4), pos = random_matrix(rng, 2, 4),
                          neg = random_matrix(rng, 2, 4);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(5, 2);
    y(1, 0) = 1;
    const std::vector<std::uint8_t> mask{1, 1};
    const auto gs = objective_gradients(shared, {img, y, pos, neg, mask});
    const auto gb = objective_gradients(both, {img, y, pos, neg, mask});
    REQUIRE(gs.store_grads.size() == 1);
    REQUIRE(gb.store_grads.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK((gs.store_grads[0][k] - (gb.store_grads[0][k] + gb.store_grads[1][k])).cwiseAbs().maxCoeff() <= 1e-15);
    }
    CHECK(gs.loss == gb.loss);
}

TEST_CASE("unmasked prompts receive no gradient") {
    Rng rng(23);
    AdaptorConfig ac;
    ac.dim = 4;
    ac.hidden_dim = 5;
    const AdaptorSet set = make_adaptor_set(ac);
    const Eigen::MatrixXd img = random_matrix(rng, 3, 4), pos = random_matrix(rng, 3, 4),
                          neg = random_matrix(rng, 3, 4);
    Eigen::MatrixXd y = Eigen::MatrixXd::Ones(3, 3);
    const std::vector<std::uint8_t> mask{0, 1, 0};
    const auto g = objective_gradients(set, {img, y, pos, neg, mask});
    CHECK(g.positive.row(0).isZero(0.0));
    CHECK(g.negative.row(2).isZero(0.0));
    CHECK_FALSE(g.positive.row(1).isZero(0.0));
    const std::vector<std::uint8_t> none{0, 0, 0};
    CHECK_THROWS_AS(objective_gradients(set, {img, y, pos, neg, none}), Error);
}

}
