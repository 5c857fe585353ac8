#include "adaptune/blob.hpp"
#include "adaptune/error.hpp"
#include "adaptune/scenarios.hpp"
#include "adaptune/synth.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace adaptune;
using adaptune::testing::TempDir;

namespace {

SynthConfig small(std::uint64_t seed) {
    SynthConfig c;
    c.dim = 16;
    c.num_diseases = 3;
    c.n_train = 40;
    c.n_test = 300;
    c.seed = seed;
    return c;
}

double zero_shot_mean(const DatasetBundle& b, PromptStyle style) {
    return evaluate(nullptr, b.test, b.bank(style)).mean.value;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("directions are orthonormal") {
    for (std::uint64_t seed : {0u, 1u, 2u}) {
        const Eigen::MatrixXd d = orthonormal_directions(6, 64, seed);
        const Eigen::MatrixXd gram = d * d.transpose();
        CHECK((gram - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-10);
    }
    const Eigen::MatrixXd full = orthonormal_directions(8, 8, 4);
    CHECK((full * full.transpose() - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("default world has the documented shape") {
    const SynthConfig c;
    const DatasetBundle b = generate(c);
    CHECK(b.dim() == 64);
    CHECK(b.num_diseases() == 5);
    CHECK(b.train.rows() == 2000);
    CHECK(b.test.rows() == 1000);
    CHECK(b.prompt_banks.size() == 3);
    CHECK(b.disease_names.front() == "Atelectasis");
}

TEST_CASE("generated files load through validation") {
    TempDir tmp("synth");
    const auto manifest = generate_to(tmp.path(), small(3));
    const DatasetBundle b = load_dataset(manifest);
    CHECK(b.train.rows() == 40);
    CHECK(b.test.rows() == 300);
}

TEST_CASE("same seed writes identical files and another seed does not") {
    TempDir a("synth"), b("synth"), c("synth");
    generate_to(a.path(), small(1));
    generate_to(b.path(), small(1));
    generate_to(c.path(), small(2));
    for (const auto& entry : std::filesystem::directory_iterator(a.path())) {
        const auto name = entry.path().filename();
        CHECK(file_checksum(a.path() / name) == file_checksum(b.path() / name));
    }
    CHECK(file_checksum(a.path() / "train_embeddings.f32") != file_checksum(c.path() / "train_embeddings.f32"));
}

TEST_CASE("noiseless fully aligned prompts separate perfectly") {
    SynthConfig c = small(5);
    c.alpha_template = 1.0;
    c.image_noise_sigma = 0.0;
    const DatasetBundle b = generate(c);
    const Evaluation ev = evaluate(nullptr, b.test, b.bank(PromptStyle::Template));
    CHECK(ev.mean.value == 1.0);
    const BoolMatrix pred = predict(score_dataset(nullptr, b.test, b.bank(PromptStyle::Template)));
    for (std::size_t i = 0; i < b.test.rows(); ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(pred(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == (b.test.label(i, j) == 1));
        }
    }
}

TEST_CASE("random prompts are at chance on average") {
    SynthConfig c;
    c.n_train = 10;
    // One world's per-disease auc spreads about 0.07 around 0.5; 64 worlds
    // put the Monte-Carlo error near 0.01.
    const int seeds = 64;
    std::vector<double> per_disease(c.num_diseases, 0.0);
    for (int s = 0; s < seeds; ++s) {
        c.seed = static_cast<std::uint64_t>(s);
        const DatasetBundle b = generate(c);
        const Evaluation ev = evaluate(nullptr, b.test, b.bank(PromptStyle::Random));
        for (std::size_t j = 0; j < c.num_diseases; ++j) per_disease[j] += *ev.per_disease[j].value / seeds;
    }
    for (double a : per_disease) CHECK(std::abs(a - 0.5) <= 0.05);
}

TEST_CASE("zero-shot auc does not decrease with alignment") {
    double previous = 0.0;
    for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        double mean = 0.0;
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            SynthConfig c;
            c.n_train = 10;
            c.alpha_template = alpha;
            c.seed = seed;
            mean += zero_shot_mean(generate(c), PromptStyle::Template) / 3.0;
        }
        CHECK(mean >= previous);
        previous = mean;
    }
}

TEST_CASE("label correlation keeps prevalence") {
    SynthConfig c;
    c.n_train = 20000;
    c.n_test = 10;
    c.label_correlation = 0.6;
    const DatasetBundle b = generate(c);
    for (std::size_t j = 0; j < 5; ++j) {
        double pos = 0;
        for (std::size_t i = 0; i < b.train.rows(); ++i) pos += b.train.label(i, j);
        CHECK(std::abs(pos / b.train.rows() - 0.3) < 0.02);
    }
    double both = 0;
    for (std::size_t i = 0; i < b.train.rows(); ++i) both += b.train.label(i, 0) * b.train.label(i, 1);
    CHECK(both / b.train.rows() > 0.09 + 0.05);
}

TEST_CASE("invalid configs are ConfigErrors") {
    SynthConfig c;
    c.dim = 0;
    CHECK_THROWS_AS(generate(c), Error);
    c = SynthConfig{};
    c.dim = 5;
    CHECK_THROWS_AS(generate(c), Error);
    c = SynthConfig{};
    c.alpha_random = 0.2;
    CHECK_THROWS_AS(c.validate(), Error);
    c = SynthConfig{};
    c.disease_prevalence = {0.3, 0.3};
    CHECK_THROWS_AS(c.validate(), Error);
}

}
