#include "adaptune/adaptors.hpp"
#include "adaptune/error.hpp"
#include "adaptune/rng.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace adaptune;
using adaptune::testing::random_matrix;

namespace {

AdaptorSet make(AdaptorKind kind, Placement placement, std::size_t dim, std::size_t hidden, InitScheme init,
                std::uint64_t seed) {
    AdaptorConfig c;
    c.kind = kind;
    c.placement = placement;
    c.dim = dim;
    c.hidden_dim = hidden;
    c.init = init;
    c.seed = seed;
    return make_adaptor_set(c);
}

Adaptor single(AdaptorKind kind, std::size_t dim, std::size_t hidden, InitScheme init, std::uint64_t seed) {
    Rng rng(seed);
    return Adaptor::create(kind, dim, hidden, init, rng);
}

}  // namespace

TEST_SUITE("adaptors") {

TEST_CASE("identity dense is I and zero bias") {
    const Adaptor a = single(AdaptorKind::Dense, 4, 4, InitScheme::Identity, 0);
    CHECK(a.parameters()[0] == Eigen::MatrixXd::Identity(4, 4));
    CHECK(a.parameters()[1].isZero(0.0));
}

TEST_CASE("identity dense maps (3,-1) to itself") {
    const Adaptor a = single(AdaptorKind::Dense, 2, 2, InitScheme::Identity, 0);
    const Eigen::VectorXd y = a.forward(Eigen::VectorXd(Eigen::Vector2d(3, -1)));
    CHECK(y(0) == 3.0);
    CHECK(y(1) == -1.0);
}

TEST_CASE("identity init is exact on random inputs") {
    Rng rng(5);
    const Eigen::MatrixXd x = random_matrix(rng, 17, 6);
    for (AdaptorKind k : {AdaptorKind::Dense, AdaptorKind::Mlp}) {
        const Adaptor a = single(k, 6, 12, InitScheme::Identity, 0);
        CHECK(a.apply(x) == x);
    }
}

TEST_CASE("identity mlp needs hidden >= 2 dim") {
    CHECK_THROWS_AS(make(AdaptorKind::Mlp, Placement::Both, 4, 7, InitScheme::Identity, 0), Error);
    try {
        make(AdaptorKind::Mlp, Placement::Both, 4, 4, InitScheme::Identity, 0);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IdentityInitInfeasible);
    }
}

TEST_CASE("dense hand matrix case") {
    Adaptor a = single(AdaptorKind::Dense, 2, 2, InitScheme::Identity, 0);
    a.parameters()[0] << 0, 1, 1, 0;
    a.parameters()[1] << 1, 0;
    const Eigen::VectorXd y = a.forward(Eigen::VectorXd(Eigen::Vector2d(2, 5)));
    // [[0,1],[1,0]] (2,5) + (1,0) = (5+1, 2)
    CHECK(y(0) == 6.0);
    CHECK(y(1) == 2.0);
}

TEST_CASE("mlp with identity layers clips negatives") {
    Adaptor a = single(AdaptorKind::Mlp, 2, 2, InitScheme::ScaledUniform, 0);
    a.parameters()[0] = Eigen::MatrixXd::Identity(2, 2);
    a.parameters()[1].setZero();
    a.parameters()[2] = Eigen::MatrixXd::Identity(2, 2);
    a.parameters()[3].setZero();
    const Eigen::VectorXd y = a.forward(Eigen::VectorXd(Eigen::Vector2d(-2, 3)));
    CHECK(y(0) == 0.0);
    CHECK(y(1) == 3.0);
}

TEST_CASE("output width equals input width") {
    Rng rng(1);
    for (AdaptorKind k : {AdaptorKind::Dense, AdaptorKind::Mlp}) {
        const Adaptor a = single(k, 5, 9, InitScheme::ScaledUniform, 3);
        const auto out = a.forward(random_matrix(rng, 4, 5));
        CHECK(out.output.rows() == 4);
        CHECK(out.output.cols() == 5);
    }
}

TEST_CASE("scaled uniform stays within 1/sqrt(fan_in)") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Adaptor d = single(AdaptorKind::Dense, 4, 4, InitScheme::ScaledUniform, seed);
        CHECK(d.parameters()[0].cwiseAbs().maxCoeff() <= 0.5);
        CHECK(d.parameters()[1].isZero(0.0));
        const Adaptor m = single(AdaptorKind::Mlp, 4, 9, InitScheme::ScaledUniform, seed);
        CHECK(m.parameters()[0].cwiseAbs().maxCoeff() <= 0.5);
        CHECK(m.parameters()[2].cwiseAbs().maxCoeff() <= 1.0 / 3.0);
    }
}

TEST_CASE("same seed gives bitwise identical parameters") {
    const auto a = make(AdaptorKind::Mlp, Placement::Both, 4, 4, InitScheme::ScaledUniform, 7);
    const auto b = make(AdaptorKind::Mlp, Placement::Both, 4, 4, InitScheme::ScaledUniform, 7);
    const auto c = make(AdaptorKind::Mlp, Placement::Both, 4, 4, InitScheme::ScaledUniform, 8);
    REQUIRE(a.stores().size() == 2);
    for (std::size_t s = 0; s < 2; ++s) {
        for (std::size_t p = 0; p < 4; ++p) CHECK(a.stores()[s].parameters()[p] == b.stores()[s].parameters()[p]);
    }
    CHECK(a.checksum() == b.checksum());
    CHECK(a.checksum() != c.checksum());
}

TEST_CASE("identity dense backward is the linear-layer calculus") {
    const Adaptor a = single(AdaptorKind::Dense, 3, 3, InitScheme::Identity, 0);
    const Eigen::MatrixXd x = (Eigen::MatrixXd(1, 3) << 1, -2, 0.5).finished();
    const Eigen::MatrixXd g = (Eigen::MatrixXd(1, 3) << 0.3, 0.1, -4).finished();
    const auto fwd = a.forward(x);
    const auto back = a.backward(fwd.cache, g);
    CHECK(back.grad_input == g);
    CHECK(back.param_grads[0] == g.transpose() * x);
    CHECK(back.param_grads[1] == g.transpose());
}

TEST_CASE("zero upstream gradient gives zero gradients") {
    Rng rng(2);
    for (AdaptorKind k : {AdaptorKind::Dense, AdaptorKind::Mlp}) {
        const Adaptor a = single(k, 4, 6, InitScheme::ScaledUniform, 1);
        const auto fwd = a.forward(random_matrix(rng, 3, 4));
        const auto back = a.backward(fwd.cache, Eigen::MatrixXd::Zero(3, 4));
        CHECK(back.grad_input.isZero(0.0));
        for (const auto& g : back.param_grads) CHECK(g.isZero(0.0));
    }
}

TEST_CASE("random dense dim 3 weight gradient matches central differences") {
    Rng rng(3);
    Adaptor a = single(AdaptorKind::Dense, 3, 3, InitScheme::ScaledUniform, 4);
    const Eigen::MatrixXd x = random_matrix(rng, 2, 3);
    const Eigen::MatrixXd g = random_matrix(rng, 2, 3);
    const auto back = a.backward(a.forward(x).cache, g);
    auto objective = [&] { return (a.apply(x).array() * g.array()).sum(); };
    const Eigen::MatrixXd numeric = adaptune::testing::central_difference(a.parameters()[0], objective);
    const double rel = ((back.param_grads[0] - numeric).cwiseAbs().array() /
                        back.param_grads[0].cwiseAbs().array().max(1e-12))
                           .maxCoeff();
    CHECK(rel < 1e-6);
}

TEST_CASE("100 random triples per kind pass the finite-difference check") {
    Rng rng(11);
    for (AdaptorKind k : {AdaptorKind::Dense, AdaptorKind::Mlp}) {
        std::size_t done = 0;
        while (done < 100) {
            const std::size_t dim = 2 + rng.uniform_int(4);
            const std::size_t hidden = 2 + rng.uniform_int(6);
            Adaptor a = single(k, dim, hidden, InitScheme::ScaledUniform, rng.next_u64());
            for (auto& p : a.parameters()) p = random_matrix(rng, p.rows(), p.cols()) * 0.5;
            Eigen::MatrixXd x = random_matrix(rng, 1 + static_cast<Eigen::Index>(rng.uniform_int(3)),
                                              static_cast<Eigen::Index>(dim));
            const Eigen::MatrixXd g = random_matrix(rng, x.rows(), x.cols());
            const auto fwd = a.forward(x);
            if (k == AdaptorKind::Mlp && fwd.cache.pre_activation.cwiseAbs().minCoeff() < 1e-3) continue;
            const auto back = a.backward(fwd.cache, g);
            auto objective = [&] { return (a.apply(x).array() * g.array()).sum(); };
            adaptune::testing::GradientCheck check;
            for (std::size_t p = 0; p < a.parameters().size(); ++p) {
                check.compare(back.param_grads[p], adaptune::testing::central_difference(a.parameters()[p], objective),
                              1e-4, 1e-8);
            }
            check.compare(back.grad_input, adaptune::testing::central_difference(x, objective), 1e-4, 1e-8);
            CHECK(check.failed == 0);
            ++done;
        }
    }
}

TEST_CASE("backward with a mismatched cache is rejected") {
    Rng rng(1);
    const Adaptor a = single(AdaptorKind::Mlp, 3, 4, InitScheme::ScaledUniform, 0);
    const Adaptor b = single(AdaptorKind::Dense, 3, 3, InitScheme::ScaledUniform, 0);
    const auto fwd = a.forward(random_matrix(rng, 2, 3));
    CHECK_THROWS_AS(b.backward(fwd.cache, Eigen::MatrixXd::Zero(2, 3)), Error);
    CHECK_THROWS_AS(a.backward(fwd.cache, Eigen::MatrixXd::Zero(3, 3)), Error);
}

TEST_CASE("placements own the right stores") {
    CHECK(store_count(Placement::ImageOnly) == 1);
    CHECK(store_count(Placement::TextOnly) == 1);
    CHECK(store_count(Placement::Shared) == 1);
    CHECK(store_count(Placement::Both) == 2);
    auto img = make(AdaptorKind::Dense, Placement::ImageOnly, 3, 0, InitScheme::ScaledUniform, 1);
    CHECK(img.image_adaptor() != nullptr);
    CHECK(img.text_adaptor() == nullptr);
    Rng rng(4);
    const Eigen::MatrixXd x = random_matrix(rng, 2, 3);
    CHECK(img.apply_text(x) == x);
    auto txt = make(AdaptorKind::Dense, Placement::TextOnly, 3, 0, InitScheme::ScaledUniform, 1);
    CHECK(txt.image_adaptor() == nullptr);
    CHECK(txt.apply_image(x) == x);
}

TEST_CASE("shared placement exposes one store through both paths") {
    auto set = make(AdaptorKind::Mlp, Placement::Shared, 3, 5, InitScheme::ScaledUniform, 2);
    REQUIRE(set.stores().size() == 1);
    Rng rng(6);
    const Eigen::MatrixXd x = random_matrix(rng, 2, 3);
    set.image_adaptor()->parameters()[3](1, 0) += 0.25;
    CHECK(set.text_adaptor()->parameters()[3](1, 0) == set.image_adaptor()->parameters()[3](1, 0));
    CHECK(set.apply_text(x) == set.apply_image(x));
}

TEST_CASE("non-finite parameters are reported") {
    Adaptor a = single(AdaptorKind::Dense, 2, 2, InitScheme::Identity, 0);
    a.parameters()[0](0, 1) = NAN;
    CHECK_THROWS_AS(a.check_finite(), Error);
}

}
