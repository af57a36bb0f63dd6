#pragma once

#include <span>
#include <string>
#include <vector>

#include "tcm/autodiff.hpp"
#include "tcm/data.hpp"
#include "tcm/model.hpp"

namespace tcm {

// Column o of R is record (i, j) with o = i * M + j.
struct RecordBank {
    Var R;                        // 2d x L_x
    std::vector<Var> records;     // columns of R
    std::vector<Var> row_reps;    // N vectors [hr_fwd_i; hr_bwd_i]
    Var table_rep;                // [hr_fwd_N; hr_bwd_1]
};

struct ReferenceBank {
    Var W;                        // 2d x K
    std::vector<Var> states;      // columns of W
};

// Embedding-table indices of a token sequence (UNK for unknown tokens).
std::vector<std::size_t> token_ids(const Vocab& vocab, std::span<const std::string> tokens);

// [e; t; v; f] embedding concatenation, 4d x 1, before dropout.
Var record_input(Tape& tape, const Model& model, const Record& record);

ReferenceBank encode_reference(Tape& tape, const Model& model, std::span<const std::string> reference,
                               const ForwardContext& ctx);

// Per-row bi-LSTM over records, then a bi-LSTM over the row vectors
// [hc_fwd_iM; hc_bwd_i1].
RecordBank encode_table(Tape& tape, const Model& model, const Table& table, const ForwardContext& ctx);

}  // namespace tcm
