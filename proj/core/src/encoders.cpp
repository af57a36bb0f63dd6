#include "tcm/encoders.hpp"

#include <stdexcept>

namespace tcm {

std::vector<std::size_t> token_ids(const Vocab& vocab, std::span<const std::string> tokens) {
    std::vector<std::size_t> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(vocab.lookup(t));
    return ids;
}

Var record_input(Tape& tape, const Model& model, const Record& record) {
    const Vocab& v = model.vocab();
    Var table = tape.param(*model.embedding);
    const Var parts[] = {
        ad::embedding(table, v.lookup(entity_key(record.entity))),
        ad::embedding(table, v.lookup(type_token(record.type))),
        ad::embedding(table, v.lookup(record.value)),
        ad::embedding(table, v.lookup(feature_token(record.feature))),
    };
    return ad::concat_rows(parts);
}

ReferenceBank encode_reference(Tape& tape, const Model& model, std::span<const std::string> reference,
                               const ForwardContext& ctx) {
    if (reference.empty()) throw std::invalid_argument("encode_reference: empty reference");
    Var table = tape.param(*model.embedding);
    std::vector<Var> inputs;
    inputs.reserve(reference.size());
    for (std::size_t id : token_ids(model.vocab(), reference)) inputs.push_back(ctx.drop(ad::embedding(table, id)));
    BiLstmOutput enc = bilstm_encode(inputs, model.ref_fwd, model.ref_bwd);
    ReferenceBank bank;
    bank.W = ad::concat_cols(enc.states);
    bank.states = std::move(enc.states);
    return bank;
}

RecordBank encode_table(Tape& tape, const Model& model, const Table& table, const ForwardContext& ctx) {
    if (table.empty()) throw std::invalid_argument("encode_table: empty table");
    RecordBank bank;
    bank.records.reserve(table.size());
    std::vector<Var> row_vectors;
    row_vectors.reserve(table.rows());
    for (std::size_t i = 0; i < table.rows(); ++i) {
        std::vector<Var> inputs;
        inputs.reserve(table.cols());
        for (std::size_t j = 0; j < table.cols(); ++j)
            inputs.push_back(ctx.drop(record_input(tape, model, table.at(i, j))));
        BiLstmOutput row = bilstm_encode(inputs, model.rec_fwd, model.rec_bwd);
        for (Var s : row.states) bank.records.push_back(s);
        const Var ends[] = {row.fwd_last, row.bwd_first};
        row_vectors.push_back(ad::concat_rows(ends));
    }
    BiLstmOutput rows = bilstm_encode(row_vectors, model.row_fwd, model.row_bwd);
    bank.row_reps = std::move(rows.states);
    const Var ends[] = {rows.fwd_last, rows.bwd_first};
    bank.table_rep = ad::concat_rows(ends);
    bank.R = ad::concat_cols(bank.records);
    return bank;
}

}  // namespace tcm
