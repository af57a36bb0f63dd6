#include "tcm/model.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace tcm {

Model::Model(ModelConfig config, Vocab vocab, std::uint64_t seed) : config_(config), vocab_(std::move(vocab)) {
    if (config_.d == 0) throw std::invalid_argument("Model: d must be positive");
    std::mt19937_64 rng(seed);
    const std::size_t d = config_.d;
    const Real s = config_.init_std;
    embedding = &params_.add("embedding", vocab_.size(), d, rng, s);
    ref_fwd = make_lstm(params_, "ref.fwd", d, d, rng, s);
    ref_bwd = make_lstm(params_, "ref.bwd", d, d, rng, s);
    rec_fwd = make_lstm(params_, "record.fwd", 4 * d, d, rng, s);
    rec_bwd = make_lstm(params_, "record.bwd", 4 * d, d, rng, s);
    row_fwd = make_lstm(params_, "row.fwd", 2 * d, d, rng, s);
    row_bwd = make_lstm(params_, "row.bwd", 2 * d, d, rng, s);
    if (config_.interactive_attention) {
        fuse_fwd = make_lstm(params_, "fuse.fwd", 4 * d, d, rng, s);
        fuse_bwd = make_lstm(params_, "fuse.bwd", 4 * d, d, rng, s);
    }
    init = make_linear(params_, "dec.init", 2 * d, d, rng, s);
    dec = make_lstm(params_, "dec.lstm", d, d, rng, s);
    attn = &params_.add("dec.attn", 2 * d, d, rng, s);
    if (!config_.interactive_attention) attn_ref = &params_.add("dec.attn_ref", 2 * d, d, rng, s);
    const std::size_t ctx = context_dim();
    pre_out = make_linear(params_, "dec.pre_out", d + ctx, d, rng, s);
    out = make_linear(params_, "dec.out", d, vocab_.size(), rng, s);
    gate = make_linear(params_, "dec.gate", d + ctx + d, 1, rng, s);
}

void save_checkpoint(std::ostream& out, const Model& model) {
    const ModelConfig& c = model.config();
    char buf[64];
    out << "tcm-checkpoint 1\n";
    out << "config d=" << c.d;
    std::snprintf(buf, sizeof buf, "%a", c.dropout);
    out << " dropout=" << buf;
    std::snprintf(buf, sizeof buf, "%a", c.init_std);
    out << " init_std=" << buf;
    out << " interactive_attention=" << (c.interactive_attention ? 1 : 0) << '\n';
    model.vocab().write(out);
    write_params(out, model.params());
}

void save_checkpoint_file(const std::string& path, const Model& model) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
    save_checkpoint(out, model);
}

std::unique_ptr<Model> load_checkpoint(std::istream& in) {
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "tcm-checkpoint")
        throw std::runtime_error("checkpoint: bad header");
    if (version != 1) throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    std::string tag;
    if (!(in >> tag) || tag != "config") throw std::runtime_error("checkpoint: missing config line");
    std::string rest;
    std::getline(in, rest);
    std::map<std::string, std::string> kv;
    std::istringstream ss(rest);
    std::string item;
    while (ss >> item) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw std::runtime_error("checkpoint: bad config item '" + item + "'");
        kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    ModelConfig c;
    try {
        c.d = std::stoul(kv.at("d"));
        c.dropout = std::strtod(kv.at("dropout").c_str(), nullptr);
        c.init_std = std::strtod(kv.at("init_std").c_str(), nullptr);
        c.interactive_attention = kv.at("interactive_attention") == "1";
    } catch (const std::out_of_range&) {
        throw std::runtime_error("checkpoint: incomplete config line");
    }
    Vocab vocab = Vocab::read(in);
    auto model = std::make_unique<Model>(c, std::move(vocab), 0);
    read_params(in, model->params());
    return model;
}

std::unique_ptr<Model> load_checkpoint_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
    return load_checkpoint(in);
}

}  // namespace tcm
