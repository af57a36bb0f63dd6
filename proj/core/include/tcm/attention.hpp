#pragma once

#include <string>

#include "tcm/autodiff.hpp"
#include "tcm/encoders.hpp"
#include "tcm/model.hpp"
#include "tcm/nn.hpp"

namespace tcm {

// Shapes: L  L_x x K, A_W L_x x K (each column sums to 1 over records),
// A_R K x L_x (each column sums to 1 over words), C_W 2d x K, C_R 4d x L_x, F 2d x L_x.
struct FusionBank {
    Var L;
    Var A_W;
    Var A_R;
    Var C_W;
    Var C_R;
    Var F;
};

// L = R^T W. Throws if the inner dimensions differ.
Var compute_affinity(Var R, Var W);

struct CoAttention {
    Var A_W;
    Var A_R;
    Var C_W;
    Var C_R;
};

// A_W = softmax of L over records per word, A_R = softmax of L^T over words per
// record, C_W = R A_W, C_R = [W; C_W] A_R.
CoAttention coattend(Var R, Var W, Var L);

// Bi-LSTM over the columns of C_R.
Var fuse_bank(Var C_R, const LstmLayer& fwd, const LstmLayer& bwd);

FusionBank interactive_attention(const Model& model, const RecordBank& records, const ReferenceBank& reference);

// JSON diagnostics of all attention matrices (row-major nested arrays).
std::string attention_dump_json(const FusionBank& bank);

}  // namespace tcm
