#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tcm/autodiff.hpp"
#include "tcm/params.hpp"

namespace tcm {

// Standard LSTM (no peepholes). Gate rows are stacked [i; f; g; o]:
// i, f, o = sigmoid, g = tanh, c' = f*c + i*g, h' = o*tanh(c').
struct LstmLayer {
    Parameter* weight = nullptr;  // 4d x (input_dim + d), acting on [x; h]
    Parameter* bias = nullptr;    // 4d x 1
    std::size_t input_dim = 0;
    std::size_t hidden = 0;
};

LstmLayer make_lstm(ParamStore& store, const std::string& prefix, std::size_t input_dim, std::size_t hidden,
                    std::mt19937_64& rng, Real init_std);

struct LstmState {
    Var h;
    Var c;
};

LstmState lstm_cell(Var x, Var h, Var c, const LstmLayer& layer);

// Zero (h, c) for a layer on the given tape.
LstmState lstm_zero_state(Tape& tape, const LstmLayer& layer);

struct BiLstmOutput {
    std::vector<Var> states;  // states[k] = [fwd_k; bwd_k], 2d x 1
    Var fwd_last;             // forward state after the last element
    Var bwd_first;            // backward state after consuming the first element
};

// Both directions start from zero state. Throws on an empty sequence.
BiLstmOutput bilstm_encode(std::span<const Var> seq, const LstmLayer& fwd, const LstmLayer& bwd);

// Affine map W x + b.
struct Linear {
    Parameter* weight = nullptr;  // out x in
    Parameter* bias = nullptr;    // out x 1
};

Linear make_linear(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out,
                   std::mt19937_64& rng, Real init_std);
Var apply(const Linear& layer, Var x);

}  // namespace tcm
