#include "adaptune/scenarios.hpp"

#include "adaptune/blob.hpp"
#include "adaptune/error.hpp"
#include "adaptune/objective.hpp"
#include "adaptune/rng.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

namespace adaptune {

void RunConfig::validate() const {
    if (epochs_per_task < 1) fail(ErrorCode::ConfigError, "epochs_per_task must be >= 1");
    if (batch_size < 1) fail(ErrorCode::ConfigError, "batch_size must be >= 1");
    if (seeds.empty()) fail(ErrorCode::ConfigError, "at least one seed is required");
    if (num_partitions < 1) fail(ErrorCode::ConfigError, "num_partitions must be >= 1");
    if (!(adam.lr > 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) ||
        !(adam.eps > 0.0)) {
        fail(ErrorCode::ConfigError, "invalid Adam hyperparameters");
    }
}

Eigen::MatrixXd to_matrix(std::span<const float> values, std::size_t rows, std::size_t cols) {
    if (values.size() != rows * cols) fail(ErrorCode::ShapeMismatch, "buffer does not hold rows x cols values");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * cols + c];
        }
    }
    return m;
}

BatchScores score_dataset(const AdaptorSet* adaptors, const EmbeddingDataset& dataset, const PromptBank& bank) {
    if (bank.dim != dataset.dim || bank.rows() != dataset.num_diseases) {
        fail(ErrorCode::ShapeMismatch, "prompt bank does not match the dataset");
    }
    const Eigen::MatrixXd images = to_matrix(dataset.embeddings, dataset.rows(), dataset.dim);
    const Eigen::MatrixXd pos = to_matrix(bank.positive, bank.rows(), bank.dim);
    const Eigen::MatrixXd neg = to_matrix(bank.negative, bank.rows(), bank.dim);
    if (!adaptors) return score_batch(images, pos, neg);
    return score_batch(adaptors->apply_image(images), adaptors->apply_text(pos), adaptors->apply_text(neg));
}

Evaluation evaluate(const AdaptorSet* adaptors, const EmbeddingDataset& test, const PromptBank& bank) {
    const BatchScores scores = score_dataset(adaptors, test, bank);
    const Eigen::MatrixXd z = scores.logits();
    Evaluation ev;
    std::vector<double> column(test.rows());
    std::vector<std::uint8_t> labels(test.rows());
    for (std::size_t j = 0; j < test.num_diseases; ++j) {
        for (std::size_t i = 0; i < test.rows(); ++i) {
            column[i] = z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            labels[i] = test.label(i, j);
        }
        ev.per_disease.push_back(auc(column, labels));
    }
    try {
        ev.mean = mean_auc(ev.per_disease);
    } catch (const Error& e) {
        fail(ErrorCode::DegenerateLabels, "every disease has single-class test labels");
    }
    return ev;
}

namespace {

// One minibatch update. Returns the batch loss.
double train_step(AdaptorSet& set, std::vector<AdamState>& optim, const ObjectiveInputs& in,
                  const LossOptions& loss_options) {
    ObjectiveGradients g = objective_gradients(set, in, loss_options);
    for (std::size_t s = 0; s < set.stores().size(); ++s) {
        adam_step(optim[s], set.stores()[s].parameters(), g.store_grads[s]);
        set.stores()[s].check_finite();
    }
    return g.loss;
}

std::vector<AdamState> fresh_optimizer(const AdaptorSet& set, const AdamHyper& hyper) {
    std::vector<AdamState> out;
    for (const auto& s : set.stores()) out.push_back(AdamState::zeros_like(s.parameters(), hyper));
    return out;
}

TaskEvaluation to_task_evaluation(int task_index, const Evaluation& ev, std::vector<double> trace) {
    TaskEvaluation te;
    te.task_index = task_index;
    te.mean_auc = ev.mean.value;
    for (const auto& a : ev.per_disease) te.per_disease_auc.push_back(a.value);
    te.train_loss_trace = std::move(trace);
    return te;
}

struct SeedOutcome {
    SeedReport report;
    SeedState state;
    std::size_t excluded = 0;
};

SeedOutcome run_seed(const RunConfig& config, const AdaptorConfig& adaptor_config, const DatasetBundle& data,
                     const TrainingRows& rows, const PromptBank& bank, std::uint64_t seed, const RunHooks& hooks) {
    SeedOutcome out;
    out.report.seed = seed;

    AdaptorConfig ac = adaptor_config;
    ac.seed = derive_seed(seed, "adaptor");
    AdaptorSet set = make_adaptor_set(ac);
    std::vector<AdamState> optim = fresh_optimizer(set, config.adam);

    if (config.scenario == Scenario::ZeroShot) {
        const Evaluation ev = evaluate(nullptr, data.test, bank);
        out.excluded = ev.mean.excluded_count;
        out.report.tasks.push_back(to_task_evaluation(0, ev, {}));
        out.report.final_checksum = hex64(set.checksum());
        out.state = {seed, std::move(set), std::move(optim)};
        return out;
    }

    const TaskSchedule schedule =
        build_schedule(rows.rows(), rows.num_diseases(), config.scenario, config.num_partitions, seed);
    Rng shuffle_rng(seed, "epoch_shuffle");
    const auto d = static_cast<Eigen::Index>(rows.dim());
    const auto c = static_cast<Eigen::Index>(rows.num_diseases());
    const Eigen::MatrixXd positive = to_matrix(bank.positive, bank.rows(), bank.dim);
    const Eigen::MatrixXd negative = to_matrix(bank.negative, bank.rows(), bank.dim);
    const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);

    for (const Task& task : schedule.tasks) {
        if (task.label_mask.size() != rows.num_diseases()) {
            fail(ErrorCode::ScheduleMismatch, "task label mask does not match the disease count");
        }
        if (hooks.on_task_start) hooks.on_task_start(seed, task);
        if (!config.carry_optimizer_state) optim = fresh_optimizer(set, config.adam);


        std::vector<std::size_t> order = task.image_indices;
        std::vector<double> trace;
        for (int epoch = 0; epoch < config.epochs_per_task; ++epoch) {
            shuffle_rng.shuffle(std::span(order));
            double weighted = 0.0;
            for (std::size_t start = 0; start < order.size(); start += batch_size) {
                const std::size_t n = std::min(batch_size, order.size() - start);
                Eigen::MatrixXd x(static_cast<Eigen::Index>(n), d);
                Eigen::MatrixXd y(static_cast<Eigen::Index>(n), c);
                for (std::size_t b = 0; b < n; ++b) {
                    const std::size_t row = order[start + b];
                    const auto emb = rows.embedding(row);
                    const auto lab = rows.labels(row);
                    const auto bi = static_cast<Eigen::Index>(b);
                    for (Eigen::Index c = 0; c < d; ++c) x(bi, c) = emb[static_cast<std::size_t>(c)];
                    for (Eigen::Index j = 0; j < c; ++j) y(bi, j) = lab[static_cast<std::size_t>(j)];
                }
                const double loss = train_step(set, optim, {x, y, positive, negative, task.label_mask}, config.loss);
                weighted += loss * static_cast<double>(n);
            }
            trace.push_back(weighted / static_cast<double>(order.size()));
        }
        if (hooks.on_task_end) hooks.on_task_end(seed, task);

        const Evaluation ev = evaluate(&set, data.test, bank);
        out.excluded = std::max(out.excluded, ev.mean.excluded_count);
        out.report.tasks.push_back(to_task_evaluation(task.index, ev, std::move(trace)));
    }
    out.report.final_checksum = hex64(set.checksum());
    out.state = {seed, std::move(set), std::move(optim)};
    return out;
}

}  // namespace

RunResult run(const RunConfig& config, const DatasetBundle& data, const RunOptions& options) {
    config.validate();
    const PromptBank& bank = data.bank(config.prompt_style);
    const DatasetRows default_rows(data.train);
    const TrainingRows& rows = options.training_rows ? *options.training_rows : default_rows;
    if (rows.dim() != data.dim() || rows.num_diseases() != data.num_diseases()) {
        fail(ErrorCode::ShapeMismatch, "training rows do not match the dataset shape");
    }

    AdaptorConfig ac = config.adaptor;
    if (ac.dim == 0) ac.dim = data.dim();
    if (ac.dim != data.dim()) {
        fail(ErrorCode::ConfigError, "adaptor dim " + std::to_string(ac.dim) + " differs from data dim " +
                                         std::to_string(data.dim()));
    }

    const std::size_t n = config.seeds.size();
    std::vector<std::optional<SeedOutcome>> outcomes(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                outcomes[i] = run_seed(config, ac, data, rows, bank, config.seeds[i], options.hooks);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::size_t width = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
    width = std::min(width, n);
    if (width <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < width; ++w) pool.emplace_back(worker);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    RunResult result;
    RunReport& report = result.report;
    report.scenario = config.scenario;
    report.prompt_style = config.prompt_style;
    report.adaptor_kind = ac.kind;
    report.placement = ac.placement;
    report.disease_names = data.disease_names;
    std::size_t excluded = 0;
    for (auto& o : outcomes) {
        excluded = std::max(excluded, o->excluded);
        report.seeds.push_back(std::move(o->report));
        result.states.push_back(std::move(o->state));
    }
    if (excluded > 0) {
        std::string names;
        for (std::size_t j = 0; j < data.num_diseases(); ++j) {
            bool pos = false, neg = false;
            for (std::size_t i = 0; i < data.test.rows(); ++i) (data.test.label(i, j) ? pos : neg) = true;
            if (!(pos && neg)) names += (names.empty() ? "" : ", ") + data.disease_names[j];
        }
        report.warnings.push_back("WARNING: AUC undefined (single-class test labels) for: " + names +
                                  "; excluded from mean AUC");
    }
    aggregate_seeds(report);
    return result;
}

}  // namespace adaptune
