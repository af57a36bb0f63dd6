#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcm/autodiff.hpp"
#include "tcm/data.hpp"
#include "tcm/decoder.hpp"
#include "tcm/model.hpp"

namespace tcm {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class TrainingError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Weights of the joint objective; the back-translation weight is the remainder.
struct StageWeights {
    Real lambda1 = 0.0;  // content fidelity: reconstruct y_aux from (x, y')
    Real lambda2 = 1.0;  // style: reconstruct y' from (x', y')
    Real backtrans() const { return 1.0 - lambda1 - lambda2; }
};

void validate(const StageWeights& w);

struct TrainConfig {
    std::size_t d = 16;
    Real dropout = 0.3;
    Real init_std = 0.1;
    Real lr = 1e-3;
    Real lr_decay = 0.97;  // applied once per epoch
    std::size_t beam = 5;
    std::size_t min_len = 150;
    std::size_t max_len = 850;
    std::array<std::size_t, 3> stage_epochs = {10, 10, 10};
    std::array<StageWeights, 3> stages = {StageWeights{0.0, 1.0}, StageWeights{0.5, 0.5}, StageWeights{0.4, 0.5}};
    std::uint64_t seed = 1;
    std::size_t batch_size = 4;
    Real clip_norm = 5.0;
    std::size_t min_freq = 1;
    bool no_inter_att = false;
    bool no_back_trans = false;
    // Stop a stage after this many epochs without dev-loss improvement (0 = off).
    std::size_t patience = 0;
    // Greedy pseudo-summary z is capped at this multiple of |y'| tokens.
    Real bt_max_len_factor = 1.5;

    void validate() const;
    ModelConfig model_config() const;
    // Stage weights after ablations: with no_back_trans, lambda1 + lambda2 is renormalised to 1.
    StageWeights effective_weights(std::size_t stage) const;
};

// `key = value` lines, '#' comments. Keys mirror TrainConfig fields; stage
// settings are stage{1,2,3}_epochs, stage{1,2,3}_lambda1, stage{1,2,3}_lambda2.
TrainConfig parse_train_config(std::istream& in, TrainConfig base = {});
TrainConfig load_train_config(const std::string& path, TrainConfig base = {});
// Applies a single key/value; throws ConfigError on unknown keys or bad values.
void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value);
std::string format_train_config(const TrainConfig& cfg);

// Mean per-token -log P(target_t) under teacher forcing, EOS included.
Var nll_from_encoded(const Model& model, const EncodedInput& input, std::span<const std::string> target,
                     const ForwardContext& ctx);
Var nll_loss(Tape& tape, const Model& model, const Table& table, std::span<const std::string> reference,
             std::span<const std::string> target, const ForwardContext& ctx);

// nll_loss(x', z, y') with z held constant. Returns nullopt (no contribution)
// when z is empty. Throws ConfigError when x' is missing.
std::optional<Var> back_translation_loss_given(Tape& tape, const Model& model, const Table& x_prime,
                                               std::span<const std::string> z, std::span<const std::string> y_prime,
                                               const ForwardContext& ctx);

struct BackTranslation {
    std::optional<Var> loss;
    Tokens z;
};

// Generates z = greedy(x, y') without gradient, then scores y' from (x', z).
BackTranslation back_translation_loss(Tape& tape, const Model& model, const Table& x_prime,
                                      std::span<const std::string> y_prime, const Table& x, Real max_len_factor,
                                      const ForwardContext& ctx);

// lambda1 * record + lambda2 * style + (1 - lambda1 - lambda2) * backtrans.
// Terms with zero weight may be left invalid / nullopt.
Var joint_objective(Var record, Var style, std::optional<Var> backtrans, const StageWeights& weights);
Real joint_objective(Real record, Real style, Real backtrans, const StageWeights& weights);

struct TrainLogRow {
    std::size_t step = 0;
    std::size_t epoch = 0;
    std::size_t stage = 0;  // 1-based
    std::optional<Real> record;
    std::optional<Real> style;
    std::optional<Real> backtrans;
    Real joint = 0.0;
    Real lr = 0.0;
};

std::string train_log_csv_header();
std::string train_log_csv_row(const TrainLogRow& row);

struct TrainHooks {
    std::function<void(const Model&, std::size_t epoch, std::size_t stage)> on_epoch_end;
    std::function<void(const TrainLogRow&)> on_step;
    std::function<void(const std::string&)> log;
};

struct TrainResult {
    std::vector<TrainLogRow> log;
    std::size_t epochs_run = 0;
    Real final_lr = 0.0;
};

// Three-stage schedule with Adam, per-epoch lr decay, shuffled mini-batches and
// global-norm clipping. Deterministic for a fixed config seed. Throws
// TrainingError on a non-finite loss.
TrainResult train(Model& model, std::span<const Instance> corpus, const TrainConfig& cfg,
                  const TrainHooks& hooks = {}, std::span<const Instance> dev = {});

// Runs only `stage` (0-based) for `epochs` epochs starting from the model's
// current parameters with a fresh optimizer at learning rate `lr`.
TrainResult train_stage(Model& model, std::span<const Instance> corpus, const TrainConfig& cfg, std::size_t stage,
                        std::size_t epochs, Real lr, std::uint64_t seed, const TrainHooks& hooks = {});

struct TeacherForcedOutput {
    Tokens predicted;  // argmax per target position, EOS position excluded
    std::size_t correct = 0;
    std::size_t total = 0;  // target tokens + EOS
};

TeacherForcedOutput teacher_forced_predict(const Model& model, const Table& table,
                                           std::span<const std::string> reference, std::span<const std::string> target);

}  // namespace tcm
