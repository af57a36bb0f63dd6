#include "tcm/nn.hpp"

#include <stdexcept>

namespace tcm {

LstmLayer make_lstm(ParamStore& store, const std::string& prefix, std::size_t input_dim, std::size_t hidden,
                    std::mt19937_64& rng, Real init_std) {
    LstmLayer layer;
    layer.weight = &store.add(prefix + ".weight", 4 * hidden, input_dim + hidden, rng, init_std);
    layer.bias = &store.add(prefix + ".bias", 4 * hidden, 1, rng, init_std, /*is_bias=*/true);
    layer.input_dim = input_dim;
    layer.hidden = hidden;
    return layer;
}

LstmState lstm_cell(Var x, Var h, Var c, const LstmLayer& layer) {
    const std::size_t d = layer.hidden;
    if (x.rows() != layer.input_dim || x.cols() != 1)
        throw std::invalid_argument("lstm_cell: input " + x.value().shape_string() + ", expected (" +
                                    std::to_string(layer.input_dim) + "x1)");
    if (h.rows() != d || c.rows() != d || h.cols() != 1 || c.cols() != 1)
        throw std::invalid_argument("lstm_cell: state shape mismatch, expected (" + std::to_string(d) + "x1)");
    Tape& tape = *x.tape();
    const Var xh[] = {x, h};
    Var pre = ad::add(ad::matmul(tape.param(*layer.weight), ad::concat_rows(xh)), tape.param(*layer.bias));
    Var i = ad::sigmoid(ad::slice_rows(pre, 0, d));
    Var f = ad::sigmoid(ad::slice_rows(pre, d, d));
    Var g = ad::tanh(ad::slice_rows(pre, 2 * d, d));
    Var o = ad::sigmoid(ad::slice_rows(pre, 3 * d, d));
    Var c_next = ad::add(ad::mul(f, c), ad::mul(i, g));
    Var h_next = ad::mul(o, ad::tanh(c_next));
    return {h_next, c_next};
}

LstmState lstm_zero_state(Tape& tape, const LstmLayer& layer) {
    return {tape.constant(Tensor(layer.hidden, 1)), tape.constant(Tensor(layer.hidden, 1))};
}

BiLstmOutput bilstm_encode(std::span<const Var> seq, const LstmLayer& fwd, const LstmLayer& bwd) {
    if (seq.empty()) throw std::invalid_argument("bilstm_encode: empty sequence");
    if (fwd.hidden != bwd.hidden) throw std::invalid_argument("bilstm_encode: direction widths differ");
    Tape& tape = *seq.front().tape();
    const std::size_t n = seq.size();

    std::vector<Var> fwd_h(n), bwd_h(n);
    LstmState s = lstm_zero_state(tape, fwd);
    for (std::size_t k = 0; k < n; ++k) {
        s = lstm_cell(seq[k], s.h, s.c, fwd);
        fwd_h[k] = s.h;
    }
    s = lstm_zero_state(tape, bwd);
    for (std::size_t k = n; k-- > 0;) {
        s = lstm_cell(seq[k], s.h, s.c, bwd);
        bwd_h[k] = s.h;
    }

    BiLstmOutput out;
    out.states.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Var pair[] = {fwd_h[k], bwd_h[k]};
        out.states.push_back(ad::concat_rows(pair));
    }
    out.fwd_last = fwd_h.back();
    out.bwd_first = bwd_h.front();
    return out;
}

Linear make_linear(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out,
                   std::mt19937_64& rng, Real init_std) {
    Linear layer;
    layer.weight = &store.add(prefix + ".weight", out, in, rng, init_std);
    layer.bias = &store.add(prefix + ".bias", out, 1, rng, init_std, /*is_bias=*/true);
    return layer;
}

Var apply(const Linear& layer, Var x) {
    Tape& tape = *x.tape();
    return ad::add(ad::matmul(tape.param(*layer.weight), x), tape.param(*layer.bias));
}

}  // namespace tcm
