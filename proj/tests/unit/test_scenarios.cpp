#include "adaptune/blob.hpp"
#include "adaptune/error.hpp"
#include "adaptune/scenarios.hpp"
#include "adaptune/synth.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cstring>
#include <mutex>
#include <set>

using namespace adaptune;

namespace {

DatasetBundle small_world() {
    SynthConfig c;
    c.dim = 12;
    c.num_diseases = 3;
    c.n_train = 120;
    c.n_test = 200;
    return generate(c);
}

RunConfig quick(Scenario scenario) {
    RunConfig rc;
    rc.scenario = scenario;
    rc.epochs_per_task = 2;
    rc.batch_size = 16;
    rc.num_partitions = 4;
    rc.seeds = {0, 1};
    rc.adaptor.hidden_dim = 8;
    return rc;
}

// Training-rows double that logs every row read and flags reads of rows
// that belong to an already finished task.
class AuditRows final : public TrainingRows {
public:
    explicit AuditRows(const EmbeddingDataset& d) : inner_(d) {}
    std::size_t rows() const override { return inner_.rows(); }
    std::size_t dim() const override { return inner_.dim(); }
    std::size_t num_diseases() const override { return inner_.num_diseases(); }
    std::span<const float> embedding(std::size_t row) const override {
        touch(row);
        return inner_.embedding(row);
    }
    std::span<const std::uint8_t> labels(std::size_t row) const override {
        touch(row);
        return inner_.labels(row);
    }
    void seal(const Task& t) {
        sealed_.insert(t.image_indices.begin(), t.image_indices.end());
        ++tasks_;
    }
    std::size_t violations = 0;
    mutable std::size_t reads = 0;
    std::size_t tasks() const { return tasks_; }

private:
    void touch(std::size_t row) const {
        ++reads;
        if (sealed_.contains(row)) ++const_cast<AuditRows*>(this)->violations;
    }
    DatasetRows inner_;
    std::set<std::size_t> sealed_;
    std::size_t tasks_ = 0;
};

}  // namespace

TEST_SUITE("scenarios") {

TEST_CASE("zero-shot gives one untouched evaluation per seed") {
    const DatasetBundle b = small_world();
    const RunResult r = run(quick(Scenario::ZeroShot), b);
    REQUIRE(r.report.seeds.size() == 2);
    const double raw = evaluate(nullptr, b.test, b.bank(PromptStyle::Template)).mean.value;
    for (std::size_t s = 0; s < 2; ++s) {
        const auto& sr = r.report.seeds[s];
        REQUIRE(sr.tasks.size() == 1);
        CHECK(sr.tasks[0].task_index == 0);
        CHECK(sr.tasks[0].mean_auc == raw);
        CHECK(sr.tasks[0].train_loss_trace.empty());
        AdaptorConfig ac = quick(Scenario::ZeroShot).adaptor;
        ac.dim = b.dim();
        ac.seed = derive_seed(sr.seed, "adaptor");
        CHECK(sr.final_checksum == hex64(make_adaptor_set(ac).checksum()));
    }
}

TEST_CASE("data-incremental with one partition is joint") {
    const DatasetBundle b = small_world();
    RunConfig di = quick(Scenario::DataIncremental);
    di.num_partitions = 1;
    const RunResult a = run(di, b);
    const RunResult j = run(quick(Scenario::Joint), b);
    for (std::size_t s = 0; s < 2; ++s) {
        CHECK(a.report.seeds[s].final_checksum == j.report.seeds[s].final_checksum);
        CHECK(a.report.seeds[s].tasks[0].mean_auc == j.report.seeds[s].tasks[0].mean_auc);
        CHECK(a.report.seeds[s].tasks[0].train_loss_trace == j.report.seeds[s].tasks[0].train_loss_trace);
    }
}

TEST_CASE("frozen embeddings are never modified") {
    const DatasetBundle b = small_world();
    const std::vector<float> train = b.train.embeddings, test = b.test.embeddings;
    const std::vector<float> pos = b.prompt_banks[0].positive;
    for (Scenario sc : {Scenario::Joint, Scenario::ClassIncremental, Scenario::ZeroShot}) run(quick(sc), b);
    CHECK(std::memcmp(train.data(), b.train.embeddings.data(), train.size() * sizeof(float)) == 0);
    CHECK(std::memcmp(test.data(), b.test.embeddings.data(), test.size() * sizeof(float)) == 0);
    CHECK(pos == b.prompt_banks[0].positive);
}

TEST_CASE("incremental scenarios never revisit finished tasks") {
    const DatasetBundle b = small_world();
    for (Scenario sc : {Scenario::ClassIncremental, Scenario::LabelIncremental, Scenario::DataIncremental}) {
        CAPTURE(to_string(sc));
        AuditRows audit(b.train);
        RunOptions opts;
        opts.training_rows = &audit;
        opts.hooks.on_task_end = [&](std::uint64_t, const Task& t) { audit.seal(t); };
        RunConfig rc = quick(sc);
        rc.seeds = {4};
        run(rc, b, opts);
        CHECK(audit.tasks() == (sc == Scenario::DataIncremental ? 4u : 3u));
        CHECK(audit.reads > 0);
        CHECK(audit.violations == 0);
    }
}

TEST_CASE("every evaluation reports every disease") {
    const DatasetBundle b = small_world();
    const RunResult r = run(quick(Scenario::ClassIncremental), b);
    for (const auto& sr : r.report.seeds) {
        REQUIRE(sr.tasks.size() == 3);
        for (const auto& t : sr.tasks) {
            CHECK(t.per_disease_auc.size() == 3);
            CHECK(t.train_loss_trace.size() == 2);
        }
    }
    CHECK(r.report.aggregate.size() == 3);
}

TEST_CASE("runs are deterministic regardless of worker count") {
    const DatasetBundle b = small_world();
    RunConfig rc = quick(Scenario::LabelIncremental);
    rc.workers = 1;
    const auto a = report_to_json(run(rc, b).report);
    rc.workers = 2;
    const auto c = report_to_json(run(rc, b).report);
    CHECK(a == c);
    CHECK(report_to_json(run(rc, b).report) == a);
}

TEST_CASE("training moves the adaptors and changes with the seed") {
    const DatasetBundle b = small_world();
    const RunResult r = run(quick(Scenario::Joint), b);
    CHECK(r.report.seeds[0].final_checksum != r.report.seeds[1].final_checksum);
    const auto& trace = r.report.seeds[0].tasks[0].train_loss_trace;
    CHECK(std::isfinite(trace.back()));
    REQUIRE(r.states.size() == 2);
    CHECK(r.states[0].optimizer.front().step_count == 2 * 8);
}

TEST_CASE("identity-initialized dense adaptors evaluate like no adaptors") {
    const DatasetBundle b = small_world();
    for (Placement p : kAllPlacements) {
        AdaptorConfig ac;
        ac.kind = AdaptorKind::Dense;
        ac.placement = p;
        ac.dim = b.dim();
        ac.init = InitScheme::Identity;
        const AdaptorSet set = make_adaptor_set(ac);
        const auto& bank = b.bank(PromptStyle::Generative);
        const BatchScores with = score_dataset(&set, b.test, bank);
        const BatchScores without = score_dataset(nullptr, b.test, bank);
        CHECK(with.s_pos == without.s_pos);
        CHECK(with.s_neg == without.s_neg);
    }
}

TEST_CASE("single-class test diseases are excluded with a warning") {
    DatasetBundle b = small_world();
    for (std::size_t i = 0; i < b.test.rows(); ++i) b.test.labels[i * 3 + 1] = 0;
    const RunResult r = run(quick(Scenario::ZeroShot), b);
    REQUIRE(r.report.warnings.size() == 1);
    CHECK(r.report.warnings[0].find(b.disease_names[1]) != std::string::npos);
    CHECK_FALSE(r.report.seeds[0].tasks[0].per_disease_auc[1].has_value());
    for (std::size_t i = 0; i < b.test.rows() * 3; ++i) b.test.labels[i] = 1;
    try {
        run(quick(Scenario::ZeroShot), b);
        FAIL("expected DegenerateLabels");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateLabels);
    }
}

TEST_CASE("invalid run configs are rejected") {
    const DatasetBundle b = small_world();
    RunConfig rc = quick(Scenario::Joint);
    rc.seeds.clear();
    CHECK_THROWS_AS(run(rc, b), Error);
    rc = quick(Scenario::Joint);
    rc.adaptor.dim = 7;
    CHECK_THROWS_AS(run(rc, b), Error);
    rc = quick(Scenario::DataIncremental);
    rc.num_partitions = 500;
    CHECK_THROWS_AS(run(rc, b), Error);
}

}
