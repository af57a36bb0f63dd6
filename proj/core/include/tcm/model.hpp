#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <random>
#include <span>
#include <string>

#include "tcm/autodiff.hpp"
#include "tcm/data.hpp"
#include "tcm/nn.hpp"
#include "tcm/params.hpp"

namespace tcm {

struct ModelConfig {
    std::size_t d = 16;  // embedding and hidden width
    Real dropout = 0.3;
    Real init_std = 0.1;
    // false: the decoder attends over R and W separately (the -InterAtt ablation).
    bool interactive_attention = true;
};

// Dropout mode for one forward pass. Eval passes (and grad checks) use the default.
struct ForwardContext {
    bool train = false;
    Real dropout = 0.0;
    std::mt19937_64* rng = nullptr;

    Var drop(Var v) const { return train && dropout > 0.0 && rng ? ad::dropout(v, dropout, *rng) : v; }

    static ForwardContext eval() { return {}; }
    static ForwardContext training(Real rate, std::mt19937_64& rng) { return {true, rate, &rng}; }
};

class Model {
  public:
    Model(ModelConfig config, Vocab vocab, std::uint64_t seed);
    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;

    const ModelConfig& config() const { return config_; }
    const Vocab& vocab() const { return vocab_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    std::size_t d() const { return config_.d; }
    // Width of the decoder context vector: 2d, or 4d without interactive attention.
    std::size_t context_dim() const { return config_.interactive_attention ? 2 * config_.d : 4 * config_.d; }

    Parameter* embedding = nullptr;  // |V| x d, shared by text, entities, types, values, features
    LstmLayer ref_fwd, ref_bwd;      // reference encoder, d -> d
    LstmLayer rec_fwd, rec_bwd;      // record level, 4d -> d
    LstmLayer row_fwd, row_bwd;      // row level, 2d -> d
    LstmLayer fuse_fwd, fuse_bwd;    // fusion over C_R columns, 4d -> d (interactive attention only)
    Linear init;                     // table_rep (2d) -> h0 (d)
    LstmLayer dec;                   // decoder, d -> d
    Parameter* attn = nullptr;       // 2d x d bilinear attention over F (or R)
    Parameter* attn_ref = nullptr;   // 2d x d attention over W (ablation only)
    Linear pre_out;                  // [h; ctx] -> d
    Linear out;                      // d -> |V|
    Linear gate;                     // [h; ctx; prev embedding] -> 1

  private:
    ModelConfig config_;
    Vocab vocab_;
    ParamStore params_;
};

// Checkpoint file:
//   tcm-checkpoint 1
//   config d=<n> dropout=<r> init_std=<r> interactive_attention=<0|1>
//   vocab <n> / one token per line
//   params section (see write_params)
void save_checkpoint(std::ostream& out, const Model& model);
void save_checkpoint_file(const std::string& path, const Model& model);
std::unique_ptr<Model> load_checkpoint(std::istream& in);
std::unique_ptr<Model> load_checkpoint_file(const std::string& path);

}  // namespace tcm
