#include "adaptune/blob.hpp"
#include "adaptune/datamodel.hpp"
#include "adaptune/error.hpp"
#include "test_support.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <set>

using namespace adaptune;
using adaptune::testing::TempDir;

namespace {

// Hand-written manifest with N rows, so the loader is tested independently
// of write_dataset.
std::filesystem::path write_manual(const std::filesystem::path& dir, std::size_t n, std::size_t dim,
                                   std::size_t c, std::size_t emb_values, std::vector<float> labels) {
    std::vector<float> emb(emb_values);
    for (std::size_t i = 0; i < emb.size(); ++i) emb[i] = static_cast<float>(i % 7) + 0.5f;
    write_f32_blob(dir / "e.f32", emb);
    write_f32_blob(dir / "l.f32", labels);
    nlohmann::json m = {
        {"version", 1},
        {"dim", dim},
        {"num_diseases", c},
        {"disease_names", std::vector<std::string>(c, "x")},
        {"splits",
         {{"train", {{"embeddings", "e.f32"}, {"labels", "l.f32"}, {"count", n}}},
          {"test", {{"embeddings", "e.f32"}, {"labels", "l.f32"}, {"count", n}}}}},
    };
    write_text_file(dir / "manifest.json", m.dump());
    return dir / "manifest.json";
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no adaptune::Error thrown");
    return ErrorCode::ConfigError;
}

void check_partition(const TaskSchedule& s, std::size_t n) {
    std::set<std::size_t> seen;
    std::size_t total = 0;
    for (const auto& t : s.tasks) {
        total += t.image_indices.size();
        seen.insert(t.image_indices.begin(), t.image_indices.end());
    }
    CHECK(total == n);
    CHECK(seen.size() == n);
    if (!seen.empty()) CHECK(*seen.rbegin() == n - 1);
}

}  // namespace

TEST_SUITE("datamodel") {

TEST_CASE("consistent manifest loads with the declared shapes") {
    TempDir tmp("dm");
    std::vector<float> labels = {1, 0, 0, 1, 1, 1, 0, 0};
    const auto b = load_dataset(write_manual(tmp.path(), 4, 8, 2, 4 * 8, labels));
    CHECK(b.train.rows() == 4);
    CHECK(b.train.dim == 8);
    CHECK(b.train.embeddings.size() == 32);
    CHECK(b.train.labels.size() == 8);
    CHECK(b.train.label(1, 1) == 1);
    CHECK(b.train.label(3, 0) == 0);
}

TEST_CASE("short embedding blob is a DimensionMismatch") {
    TempDir tmp("dm");
    std::vector<float> labels(8, 0.0f);
    const auto m = write_manual(tmp.path(), 4, 8, 2, 4 * 7, labels);
    CHECK(code_of([&] { load_dataset(m); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("label value 2 is a LabelDomainError") {
    TempDir tmp("dm");
    std::vector<float> labels = {1, 0, 0, 2, 1, 1, 0, 0};
    const auto m = write_manual(tmp.path(), 4, 8, 2, 32, labels);
    CHECK(code_of([&] { load_dataset(m); }) == ErrorCode::LabelDomainError);
}

TEST_CASE("missing blob is MissingFile") {
    TempDir tmp("dm");
    const auto m = write_manual(tmp.path(), 4, 8, 2, 32, std::vector<float>(8, 0.0f));
    std::filesystem::remove(tmp.path() / "l.f32");
    CHECK(code_of([&] { load_dataset(m); }) == ErrorCode::MissingFile);
}

TEST_CASE("write then load is bit exact") {
    TempDir tmp("dm");
    auto b = adaptune::testing::tiny_bundle(13, 7, 5, 3, 42);
    b.train.embeddings[3] = -0.0f;
    b.train.embeddings[4] = 1.17549435e-38f;
    const auto loaded = load_dataset(write_dataset(tmp.path(), b));
    CHECK(loaded.disease_names == b.disease_names);
    for (auto [x, y] : {std::pair{&b.train, &loaded.train}, std::pair{&b.test, &loaded.test}}) {
        REQUIRE(x->embeddings.size() == y->embeddings.size());
        CHECK(std::memcmp(x->embeddings.data(), y->embeddings.data(), x->embeddings.size() * sizeof(float)) == 0);
        CHECK(x->labels == y->labels);
        CHECK(x->split == y->split);
    }
    REQUIRE(loaded.prompt_banks.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(loaded.prompt_banks[k].style == b.prompt_banks[k].style);
        CHECK(loaded.prompt_banks[k].positive == b.prompt_banks[k].positive);
        CHECK(loaded.prompt_banks[k].negative == b.prompt_banks[k].negative);
    }
}

TEST_CASE("zero-norm embedding row is rejected") {
    auto b = adaptune::testing::tiny_bundle(4, 4, 3, 2, 1);
    for (std::size_t c = 0; c < 3; ++c) b.train.embeddings[3 + c] = 0.0f;
    CHECK(code_of([&] { b.validate(); }) == ErrorCode::ZeroNormEmbedding);
}

TEST_CASE("identical positive and negative prompt is rejected") {
    auto b = adaptune::testing::tiny_bundle(4, 4, 3, 2, 1);
    auto& bank = b.prompt_banks[0];
    std::copy_n(bank.positive.begin(), 3, bank.negative.begin());
    CHECK_THROWS_AS(b.validate(), Error);
}

TEST_CASE("data-incremental N=100 M=20 gives 20 tasks of 5") {
    const auto s = build_schedule(100, 5, Scenario::DataIncremental, 20, 0);
    REQUIRE(s.tasks.size() == 20);
    for (const auto& t : s.tasks) {
        CHECK(t.image_indices.size() == 5);
        CHECK(t.label_mask == std::vector<std::uint8_t>(5, 1));
    }
    check_partition(s, 100);
}

TEST_CASE("joint N=10 is one task with everything") {
    const auto s = build_schedule(10, 3, Scenario::Joint, 20, 9);
    REQUIRE(s.tasks.size() == 1);
    CHECK(s.tasks[0].index == 1);
    CHECK(s.tasks[0].label_mask == std::vector<std::uint8_t>(3, 1));
    check_partition(s, 10);
}

TEST_CASE("N=103 M=20 front-loads the remainder and covers every row once") {
    const auto s = build_schedule(103, 5, Scenario::DataIncremental, 20, 3);
    REQUIRE(s.tasks.size() == 20);
    for (std::size_t t = 0; t < 20; ++t) CHECK(s.tasks[t].image_indices.size() == (t < 3 ? 6u : 5u));
    check_partition(s, 103);
}

TEST_CASE("class and label incremental masks") {
    const auto ci = build_schedule(50, 4, Scenario::ClassIncremental, 20, 1);
    const auto li = build_schedule(50, 4, Scenario::LabelIncremental, 20, 1);
    REQUIRE(ci.tasks.size() == 4);
    REQUIRE(li.tasks.size() == 4);
    for (std::size_t t = 0; t < 4; ++t) {
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(ci.tasks[t].label_mask[j] == (j == t ? 1 : 0));
            CHECK(li.tasks[t].label_mask[j] == (j <= t ? 1 : 0));
        }
        CHECK(ci.tasks[t].image_indices == li.tasks[t].image_indices);
        CHECK(ci.tasks[t].index == static_cast<int>(t + 1));
    }
    check_partition(ci, 50);
    CHECK(build_schedule(50, 4, Scenario::ZeroShot, 20, 1).tasks.empty());
}

TEST_CASE("schedules are pure functions of their arguments") {
    for (Scenario sc : {Scenario::Joint, Scenario::ClassIncremental, Scenario::LabelIncremental,
                        Scenario::DataIncremental}) {
        const auto a = build_schedule(77, 5, sc, 7, 11);
        const auto b = build_schedule(77, 5, sc, 7, 11);
        REQUIRE(a.tasks.size() == b.tasks.size());
        for (std::size_t t = 0; t < a.tasks.size(); ++t) {
            CHECK(a.tasks[t].image_indices == b.tasks[t].image_indices);
            CHECK(a.tasks[t].label_mask == b.tasks[t].label_mask);
        }
        check_partition(a, 77);
    }
    CHECK(build_schedule(77, 5, Scenario::Joint, 7, 11).tasks[0].image_indices !=
          build_schedule(77, 5, Scenario::Joint, 7, 12).tasks[0].image_indices);
}

TEST_CASE("fewer rows than tasks is TooFewRows") {
    CHECK(code_of([] { build_schedule(3, 5, Scenario::ClassIncremental, 20, 0); }) == ErrorCode::TooFewRows);
    CHECK(code_of([] { build_schedule(19, 5, Scenario::DataIncremental, 20, 0); }) == ErrorCode::TooFewRows);
}

TEST_CASE("enum names round trip") {
    for (PromptStyle s : kAllPromptStyles) CHECK(parse_prompt_style(to_string(s)) == s);
    for (Scenario s : {Scenario::Joint, Scenario::ClassIncremental, Scenario::LabelIncremental,
                       Scenario::DataIncremental, Scenario::ZeroShot}) {
        CHECK(parse_scenario(to_string(s)) == s);
    }
    CHECK(code_of([] { parse_scenario("online"); }) == ErrorCode::ConfigError);
}

}
