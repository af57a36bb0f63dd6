#include "tcm/attention.hpp"

#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace tcm {

Var compute_affinity(Var R, Var W) {
    if (R.rows() != W.rows())
        throw std::invalid_argument("compute_affinity: record width " + std::to_string(R.rows()) +
                                    " != reference width " + std::to_string(W.rows()));
    return ad::matmul(ad::transpose(R), W);
}

CoAttention coattend(Var R, Var W, Var L) {
    CoAttention out;
    out.A_W = ad::softmax(L, Axis::kCols);
    out.A_R = ad::softmax(ad::transpose(L), Axis::kCols);
    out.C_W = ad::matmul(R, out.A_W);
    const Var stacked[] = {W, out.C_W};
    out.C_R = ad::matmul(ad::concat_rows(stacked), out.A_R);
    return out;
}

Var fuse_bank(Var C_R, const LstmLayer& fwd, const LstmLayer& bwd) {
    std::vector<Var> cols;
    cols.reserve(C_R.cols());
    for (std::size_t j = 0; j < C_R.cols(); ++j) cols.push_back(ad::column(C_R, j));
    return ad::concat_cols(bilstm_encode(cols, fwd, bwd).states);
}

FusionBank interactive_attention(const Model& model, const RecordBank& records, const ReferenceBank& reference) {
    if (!model.config().interactive_attention)
        throw std::logic_error("interactive_attention: model built without interactive attention");
    FusionBank bank;
    bank.L = compute_affinity(records.R, reference.W);
    CoAttention co = coattend(records.R, reference.W, bank.L);
    bank.A_W = co.A_W;
    bank.A_R = co.A_R;
    bank.C_W = co.C_W;
    bank.C_R = co.C_R;
    bank.F = fuse_bank(bank.C_R, model.fuse_fwd, model.fuse_bwd);
    return bank;
}

namespace {

nlohmann::json matrix_json(const Tensor& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < t.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < t.cols(); ++j) row.push_back(t(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::string attention_dump_json(const FusionBank& bank) {
    nlohmann::json j;
    j["L"] = matrix_json(bank.L.value());
    j["A_W"] = matrix_json(bank.A_W.value());
    j["A_R"] = matrix_json(bank.A_R.value());
    j["C_W"] = matrix_json(bank.C_W.value());
    j["C_R"] = matrix_json(bank.C_R.value());
    j["F"] = matrix_json(bank.F.value());
    return j.dump();
}

}  // namespace tcm
