#include "tcm/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "tcm/optim.hpp"

namespace tcm {

void validate(const StageWeights& w) {
    constexpr Real kTol = 1e-12;
    if (!(w.lambda1 >= 0.0) || !(w.lambda2 >= 0.0) || w.lambda1 + w.lambda2 > 1.0 + kTol)
        throw ConfigError("lambda out of range: need lambda1, lambda2 >= 0 and lambda1 + lambda2 <= 1 (got " +
                          std::to_string(w.lambda1) + ", " + std::to_string(w.lambda2) + ")");
}

void TrainConfig::validate() const {
    if (d == 0) throw ConfigError("d must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
    if (!(lr > 0.0)) throw ConfigError("lr must be positive");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ConfigError("lr_decay must be in (0, 1]");
    if (beam == 0) throw ConfigError("beam must be >= 1");
    if (min_len > max_len) throw ConfigError("min_len must not exceed max_len");
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
    if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
    if (!(bt_max_len_factor > 0.0)) throw ConfigError("bt_max_len_factor must be positive");
    for (const auto& s : stages) tcm::validate(s);
}

ModelConfig TrainConfig::model_config() const {
    ModelConfig m;
    m.d = d;
    m.dropout = dropout;
    m.init_std = init_std;
    m.interactive_attention = !no_inter_att;
    return m;
}

StageWeights TrainConfig::effective_weights(std::size_t stage) const {
    StageWeights w = stages.at(stage);
    if (no_back_trans) {
        const Real s = w.lambda1 + w.lambda2;
        if (s <= 0.0) throw ConfigError("no_back_trans with lambda1 + lambda2 = 0 leaves no objective");
        w.lambda1 /= s;
        w.lambda2 /= s;
    }
    return w;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

Real parse_real(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    Real r = 0.0;
    try {
        r = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size()) throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
    return r;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    unsigned long long r = 0;
    try {
        if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
        r = std::stoull(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (v.empty() || used != v.size())
        throw ConfigError("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
    return r;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("config: '" + key + "' expects a boolean, got '" + v + "'");
}

std::string fmt_real(Real r) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", r);
    return buf;
}

}  // namespace

void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (key.size() == 13 && key.rfind("stage", 0) == 0 && key.substr(6) == "_epochs") {
        const int s = key[5] - '1';
        if (s < 0 || s > 2) throw ConfigError("config: unknown key '" + key + "'");
        cfg.stage_epochs[static_cast<std::size_t>(s)] = parse_uint(key, v);
        return;
    }
    if (key.rfind("stage", 0) == 0 && key.size() == 14 && key.substr(6, 7) == "_lambda") {
        const int s = key[5] - '1';
        if (s < 0 || s > 2 || (key[13] != '1' && key[13] != '2')) throw ConfigError("config: unknown key '" + key + "'");
        StageWeights& w = cfg.stages[static_cast<std::size_t>(s)];
        (key[13] == '1' ? w.lambda1 : w.lambda2) = parse_real(key, v);
        return;
    }
    if (key == "d") cfg.d = parse_uint(key, v);
    else if (key == "dropout") cfg.dropout = parse_real(key, v);
    else if (key == "init_std") cfg.init_std = parse_real(key, v);
    else if (key == "lr") cfg.lr = parse_real(key, v);
    else if (key == "lr_decay") cfg.lr_decay = parse_real(key, v);
    else if (key == "beam") cfg.beam = parse_uint(key, v);
    else if (key == "min_len") cfg.min_len = parse_uint(key, v);
    else if (key == "max_len") cfg.max_len = parse_uint(key, v);
    else if (key == "seed") cfg.seed = parse_uint(key, v);
    else if (key == "batch_size") cfg.batch_size = parse_uint(key, v);
    else if (key == "clip_norm") cfg.clip_norm = parse_real(key, v);
    else if (key == "min_freq") cfg.min_freq = parse_uint(key, v);
    else if (key == "no_inter_att") cfg.no_inter_att = parse_bool(key, v);
    else if (key == "no_back_trans") cfg.no_back_trans = parse_bool(key, v);
    else if (key == "patience") cfg.patience = parse_uint(key, v);
    else if (key == "bt_max_len_factor") cfg.bt_max_len_factor = parse_real(key, v);
    else throw ConfigError("config: unknown key '" + key + "'");
}

TrainConfig parse_train_config(std::istream& in, TrainConfig cfg) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        set_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

TrainConfig load_train_config(const std::string& path, TrainConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_train_config(in, base);
}

std::string format_train_config(const TrainConfig& c) {
    std::ostringstream o;
    o << "d = " << c.d << '\n'
      << "dropout = " << fmt_real(c.dropout) << '\n'
      << "init_std = " << fmt_real(c.init_std) << '\n'
      << "lr = " << fmt_real(c.lr) << '\n'
      << "lr_decay = " << fmt_real(c.lr_decay) << '\n'
      << "beam = " << c.beam << '\n'
      << "min_len = " << c.min_len << '\n'
      << "max_len = " << c.max_len << '\n';
    for (std::size_t s = 0; s < 3; ++s) {
        o << "stage" << s + 1 << "_epochs = " << c.stage_epochs[s] << '\n'
          << "stage" << s + 1 << "_lambda1 = " << fmt_real(c.stages[s].lambda1) << '\n'
          << "stage" << s + 1 << "_lambda2 = " << fmt_real(c.stages[s].lambda2) << '\n';
    }
    o << "seed = " << c.seed << '\n'
      << "batch_size = " << c.batch_size << '\n'
      << "clip_norm = " << fmt_real(c.clip_norm) << '\n'
      << "min_freq = " << c.min_freq << '\n'
      << "no_inter_att = " << (c.no_inter_att ? 1 : 0) << '\n'
      << "no_back_trans = " << (c.no_back_trans ? 1 : 0) << '\n'
      << "patience = " << c.patience << '\n'
      << "bt_max_len_factor = " << fmt_real(c.bt_max_len_factor) << '\n';
    return o.str();
}

Var nll_from_encoded(const Model& model, const EncodedInput& input, std::span<const std::string> target,
                     const ForwardContext& ctx) {
    if (target.empty()) throw std::invalid_argument("nll_loss: empty target");
    std::vector<std::size_t> ids;
    ids.reserve(target.size() + 1);
    for (const auto& tok : target) ids.push_back(input.copy.target_id(model.vocab(), tok));
    std::vector<StepDistribution> steps = teacher_force(model, input, ids, ctx);
    ids.push_back(Vocab::kEos);
    std::vector<Var> cols;
    cols.reserve(steps.size());
    for (const auto& s : steps) cols.push_back(s.P);
    const std::vector<Real> mask(ids.size(), 1.0);
    return ad::masked_nll(ad::concat_cols(cols), ids, mask);
}

Var nll_loss(Tape& tape, const Model& model, const Table& table, std::span<const std::string> reference,
             std::span<const std::string> target, const ForwardContext& ctx) {
    EncodedInput in = encode_input(tape, model, table, reference, ctx);
    return nll_from_encoded(model, in, target, ctx);
}

std::optional<Var> back_translation_loss_given(Tape& tape, const Model& model, const Table& x_prime,
                                               std::span<const std::string> z, std::span<const std::string> y_prime,
                                               const ForwardContext& ctx) {
    if (x_prime.empty()) throw ConfigError("back-translation requires x' (table_prime) for every instance");
    if (z.empty()) return std::nullopt;
    return nll_loss(tape, model, x_prime, z, y_prime, ctx);
}

BackTranslation back_translation_loss(Tape& tape, const Model& model, const Table& x_prime,
                                      std::span<const std::string> y_prime, const Table& x, Real max_len_factor,
                                      const ForwardContext& ctx) {
    if (x_prime.empty()) throw ConfigError("back-translation requires x' (table_prime) for every instance");
    BackTranslation bt;
    const auto max_len = static_cast<std::size_t>(std::ceil(max_len_factor * static_cast<Real>(y_prime.size())));
    bt.z = greedy_decode(model, x, y_prime, 1, std::max<std::size_t>(1, max_len));
    bt.loss = back_translation_loss_given(tape, model, x_prime, bt.z, y_prime, ctx);
    return bt;
}

Var joint_objective(Var record, Var style, std::optional<Var> backtrans, const StageWeights& w) {
    validate(w);
    std::vector<Var> terms;
    auto add_term = [&](Var v, Real weight, const char* name) {
        if (weight == 0.0) return;
        if (!v.valid()) throw std::invalid_argument(std::string("joint_objective: missing ") + name + " term");
        terms.push_back(ad::scale(v, weight));
    };
    add_term(record, w.lambda1, "record");
    add_term(style, w.lambda2, "style");
    if (backtrans) add_term(*backtrans, w.backtrans(), "back-translation");
    if (terms.empty()) throw std::invalid_argument("joint_objective: no weighted terms");
    return ad::add_n(terms);
}

Real joint_objective(Real record, Real style, Real backtrans, const StageWeights& w) {
    validate(w);
    return w.lambda1 * record + w.lambda2 * style + w.backtrans() * backtrans;
}

std::string train_log_csv_header() { return "step,epoch,stage,loss_record,loss_style,loss_backtrans,joint,lr"; }

std::string train_log_csv_row(const TrainLogRow& r) {
    auto opt = [](const std::optional<Real>& v) { return v ? fmt_real(*v) : std::string(); };
    std::ostringstream o;
    o << r.step << ',' << r.epoch << ',' << r.stage << ',' << opt(r.record) << ',' << opt(r.style) << ','
      << opt(r.backtrans) << ',' << fmt_real(r.joint) << ',' << fmt_real(r.lr);
    return o.str();
}

namespace {

struct InstanceLosses {
    std::optional<Real> record, style, backtrans;
    Real joint = 0.0;
};

// Builds the weighted objective of one instance on `tape` and back-propagates
// it scaled by `scale`.
InstanceLosses instance_step(const Model& model, const Instance& inst, const StageWeights& w, const TrainConfig& cfg,
                             std::mt19937_64& rng, Real scale, const TrainHooks& hooks) {
    Tape tape;
    const ForwardContext ctx = ForwardContext::training(cfg.dropout, rng);
    InstanceLosses out;
    Var record, style;
    std::optional<Var> bt;
    if (w.lambda1 > 0.0) {
        if (inst.y_aux.empty()) throw ConfigError("instance '" + inst.id + "' has no y_aux (aux) for the record loss");
        record = nll_loss(tape, model, inst.x, inst.y_prime, inst.y_aux, ctx);
        out.record = record.scalar();
    }
    if (w.lambda2 > 0.0 || w.backtrans() > 1e-12) {
        if (inst.x_prime.empty()) throw ConfigError("instance '" + inst.id + "' has no x' (table_prime)");
    }
    if (w.lambda2 > 0.0) {
        style = nll_loss(tape, model, inst.x_prime, inst.y_prime, inst.y_prime, ctx);
        out.style = style.scalar();
    }
    const bool use_bt = w.backtrans() > 1e-12;
    if (use_bt) {
        BackTranslation b =
            back_translation_loss(tape, model, inst.x_prime, inst.y_prime, inst.x, cfg.bt_max_len_factor, ctx);
        if (b.loss) {
            bt = b.loss;
            out.backtrans = bt->scalar();
        } else if (hooks.log) {
            hooks.log("warning: empty pseudo summary for instance '" + inst.id + "', back-translation term skipped");
        }
    }
    StageWeights eff = w;
    if (use_bt && !bt) {
        // skipped term contributes 0
    }
    std::vector<Var> terms;
    if (out.record) terms.push_back(ad::scale(record, eff.lambda1));
    if (out.style) terms.push_back(ad::scale(style, eff.lambda2));
    if (bt) terms.push_back(ad::scale(*bt, eff.backtrans()));
    if (terms.empty()) return out;
    Var joint = ad::add_n(terms);
    out.joint = joint.scalar();
    if (!std::isfinite(out.joint))
        throw TrainingError("non-finite loss on instance '" + inst.id + "' (record=" +
                            (out.record ? std::to_string(*out.record) : "-") +
                            ", style=" + (out.style ? std::to_string(*out.style) : "-") +
                            ", backtrans=" + (out.backtrans ? std::to_string(*out.backtrans) : "-") + ")");
    tape.backward(ad::scale(joint, scale));
    return out;
}

Real dev_loss(const Model& model, std::span<const Instance> dev, const StageWeights& w, const TrainConfig& cfg) {
    Real total = 0.0;
    for (const Instance& inst : dev) {
        Tape tape;
        tape.set_grad_enabled(false);
        const ForwardContext ctx = ForwardContext::eval();
        Real rec = 0.0, sty = 0.0, bt = 0.0;
        if (w.lambda1 > 0.0) rec = nll_loss(tape, model, inst.x, inst.y_prime, inst.y_aux, ctx).scalar();
        if (w.lambda2 > 0.0) sty = nll_loss(tape, model, inst.x_prime, inst.y_prime, inst.y_prime, ctx).scalar();
        if (w.backtrans() > 1e-12) {
            auto b = back_translation_loss(tape, model, inst.x_prime, inst.y_prime, inst.x, cfg.bt_max_len_factor, ctx);
            if (b.loss) bt = b.loss->scalar();
        }
        total += joint_objective(rec, sty, bt, w);
    }
    return dev.empty() ? 0.0 : total / static_cast<Real>(dev.size());
}

struct StageRunner {
    Model& model;
    std::span<const Instance> corpus;
    const TrainConfig& cfg;
    const TrainHooks& hooks;
    AdamState& adam;
    std::mt19937_64& rng;
    TrainResult& result;
    std::size_t step = 0;
    std::size_t epoch = 0;

    void run_epoch(const StageWeights& w, std::size_t stage) {
        std::vector<std::size_t> order(corpus.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        ParamStore& params = model.params();
        for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
            const std::size_t e = std::min(order.size(), b + cfg.batch_size);
            const Real scale = 1.0 / static_cast<Real>(e - b);
            params.zero_grad();
            TrainLogRow row;
            Real rec = 0.0, sty = 0.0, bt = 0.0;
            std::size_t nrec = 0, nsty = 0, nbt = 0;
            for (std::size_t k = b; k < e; ++k) {
                InstanceLosses l = instance_step(model, corpus[order[k]], w, cfg, rng, scale, hooks);
                if (l.record) rec += *l.record, ++nrec;
                if (l.style) sty += *l.style, ++nsty;
                if (l.backtrans) bt += *l.backtrans, ++nbt;
                row.joint += l.joint * scale;
            }
            if (nrec) row.record = rec / static_cast<Real>(nrec);
            if (nsty) row.style = sty / static_cast<Real>(nsty);
            if (nbt) row.backtrans = bt / static_cast<Real>(nbt);
            params.clip_grad_norm(cfg.clip_norm);
            adam_step(params, adam);
            row.step = ++step;
            row.epoch = epoch + 1;
            row.stage = stage + 1;
            row.lr = adam.lr;
            result.log.push_back(row);
            if (hooks.on_step) hooks.on_step(row);
        }
        ++epoch;
        ++result.epochs_run;
        decay_learning_rate(adam);
        result.final_lr = adam.lr;
        if (hooks.on_epoch_end) hooks.on_epoch_end(model, epoch, stage + 1);
    }
};

}  // namespace

TrainResult train(Model& model, std::span<const Instance> corpus, const TrainConfig& cfg, const TrainHooks& hooks,
                  std::span<const Instance> dev) {
    cfg.validate();
    if (corpus.empty()) throw ConfigError("train: empty corpus");
    if (model.config().interactive_attention == cfg.no_inter_att)
        throw ConfigError("train: model architecture does not match no_inter_att");
    if (hooks.log) hooks.log("objectives: teacher forcing for record/style terms; greedy decoding for pseudo summary z");
    std::mt19937_64 rng(cfg.seed);
    AdamState adam = make_adam(model.params(), cfg.lr, cfg.lr_decay);
    TrainResult result;
    result.final_lr = adam.lr;
    StageRunner runner{model, corpus, cfg, hooks, adam, rng, result};
    for (std::size_t stage = 0; stage < 3; ++stage) {
        const StageWeights w = cfg.effective_weights(stage);
        Real best = std::numeric_limits<Real>::infinity();
        std::size_t bad = 0;
        for (std::size_t e = 0; e < cfg.stage_epochs[stage]; ++e) {
            runner.run_epoch(w, stage);
            if (cfg.patience > 0 && !dev.empty()) {
                const Real dl = dev_loss(model, dev, w, cfg);
                if (hooks.log) hooks.log("stage " + std::to_string(stage + 1) + " dev loss " + fmt_real(dl));
                if (dl < best) {
                    best = dl;
                    bad = 0;
                } else if (++bad >= cfg.patience) {
                    break;
                }
            }
        }
    }
    return result;
}

TrainResult train_stage(Model& model, std::span<const Instance> corpus, const TrainConfig& cfg, std::size_t stage,
                        std::size_t epochs, Real lr, std::uint64_t seed, const TrainHooks& hooks) {
    cfg.validate();
    if (corpus.empty()) throw ConfigError("train_stage: empty corpus");
    std::mt19937_64 rng(seed);
    AdamState adam = make_adam(model.params(), lr, cfg.lr_decay);
    TrainResult result;
    StageRunner runner{model, corpus, cfg, hooks, adam, rng, result};
    const StageWeights w = cfg.effective_weights(stage);
    for (std::size_t e = 0; e < epochs; ++e) runner.run_epoch(w, stage);
    return result;
}

TeacherForcedOutput teacher_forced_predict(const Model& model, const Table& table,
                                           std::span<const std::string> reference, std::span<const std::string> target) {
    Tape tape;
    tape.set_grad_enabled(false);
    const ForwardContext ctx = ForwardContext::eval();
    EncodedInput in = encode_input(tape, model, table, reference, ctx);
    std::vector<std::size_t> ids;
    for (const auto& tok : target) ids.push_back(in.copy.target_id(model.vocab(), tok));
    std::vector<StepDistribution> steps = teacher_force(model, in, ids, ctx);
    ids.push_back(Vocab::kEos);
    TeacherForcedOutput out;
    out.total = ids.size();
    for (std::size_t t = 0; t < steps.size(); ++t) {
        const Tensor& P = steps[t].P.value();
        std::size_t best = 0;
        for (std::size_t k = 1; k < P.size(); ++k)
            if (P[k] > P[best]) best = k;
        if (best == ids[t]) ++out.correct;
        if (t + 1 < steps.size()) out.predicted.push_back(in.copy.token(model.vocab(), best));
    }
    return out;
}

}  // namespace tcm
