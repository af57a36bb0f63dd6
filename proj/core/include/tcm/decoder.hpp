#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tcm/attention.hpp"
#include "tcm/autodiff.hpp"
#include "tcm/data.hpp"
#include "tcm/encoders.hpp"
#include "tcm/model.hpp"

namespace tcm {

// Extended output space for one table: the vocabulary plus record values that
// are not in it. record_ids[o] is the output id of record o's value token, so
// copy mass for a token sums over every record carrying it.
struct CopySource {
    std::size_t vocab_size = 0;
    std::vector<std::size_t> record_ids;
    std::vector<std::string> oov_tokens;  // output ids vocab_size, vocab_size + 1, ...
    std::vector<std::size_t> identity;    // 0 .. vocab_size - 1

    std::size_t ext_size() const { return vocab_size + oov_tokens.size(); }
    // Output id for a gold token: vocab id, else copyable OOV id, else UNK.
    std::size_t target_id(const Vocab& vocab, const std::string& token) const;
    // Embedding row for a previously emitted output id (OOV values read as UNK).
    std::size_t input_id(std::size_t output_id) const { return output_id < vocab_size ? output_id : Vocab::kUnk; }
    std::string token(const Vocab& vocab, std::size_t output_id) const;
};

CopySource make_copy_source(const Table& table, const Vocab& vocab);

// What the decoder attends over. With interactive attention `bank` is F;
// without it `bank` is R and `reference` is W.
struct DecoderMemory {
    Var bank;
    Var bank_t;
    std::optional<Var> reference;
    std::optional<Var> reference_t;
};

struct EncodedInput {
    RecordBank records;
    ReferenceBank reference;
    std::optional<FusionBank> fusion;
    DecoderMemory memory;
    CopySource copy;
};

EncodedInput encode_input(Tape& tape, const Model& model, const Table& table, std::span<const std::string> reference,
                          const ForwardContext& ctx);

struct DecoderState {
    Var h;
    Var c;
    std::size_t step = 0;
    std::size_t prev_token = Vocab::kBos;  // output id
};

struct StepDistribution {
    Var alpha;  // L_x x 1, attention over record positions (also the copy distribution)
    Var g;      // 1 x 1 copy gate
    Var beta;   // |V| x 1 generation distribution
    Var P;      // ext_size x 1 mixed distribution
};

// h = tanh(U table_rep + b), c = 0.
DecoderState init_decoder_state(const Model& model, const RecordBank& bank);

// P(z) = g * sum_{o : value(o) = z} alpha_o + (1 - g) * beta(z)
Var mix_copy(Var g, Var alpha, Var beta, const CopySource& copy);

std::pair<StepDistribution, DecoderState> decode_step(const Model& model, const DecoderState& state,
                                                      const DecoderMemory& memory, const CopySource& copy,
                                                      const ForwardContext& ctx, std::size_t emitted);

// Teacher forcing over target ids followed by EOS; one distribution per step.
std::vector<StepDistribution> teacher_force(const Model& model, const EncodedInput& input,
                                            std::span<const std::size_t> target_ids, const ForwardContext& ctx);

struct BeamOptions {
    std::size_t beam = 5;
    std::size_t min_len = 150;
    std::size_t max_len = 850;
};

struct StepTrace {
    Real copy_gate = 0.0;
    std::size_t attended_record = 0;  // argmax of alpha
    Real attention = 0.0;             // alpha at that record
    Real token_prob = 0.0;            // P of the emitted token
};

struct Hypothesis {
    std::vector<std::size_t> tokens;  // without EOS
    Real log_prob = 0.0;
    Real score = 0.0;  // log_prob / length, EOS counted when emitted
    bool ended_with_eos = false;
    std::vector<StepTrace> trace;
};

template <class State>
struct Expansion {
    std::vector<Real> log_probs;
    State next;
    StepTrace trace;
};

// Generic length-normalised beam search. expand(state, prev_token, step) returns
// log-probabilities over the output space and the successor state. EOS is not
// allowed before min_len tokens; hypotheses reaching max_len end there. Returns
// finished hypotheses, best first.
template <class State, class ExpandFn>
std::vector<Hypothesis> beam_search_core(State init, ExpandFn&& expand, const BeamOptions& options, std::size_t bos,
                                         std::size_t eos, std::span<const std::size_t> banned = {}) {
    struct Live {
        Hypothesis hyp;
        State state;
    };
    struct Candidate {
        std::size_t parent;
        std::size_t token;
        Real log_prob;
    };
    const std::size_t beam = std::max<std::size_t>(1, options.beam);
    std::vector<Live> live;
    live.push_back({Hypothesis{}, std::move(init)});
    std::vector<Hypothesis> finished;

    for (std::size_t step = 0; step < options.max_len && !live.empty(); ++step) {
        std::vector<Expansion<State>> expansions;
        expansions.reserve(live.size());
        std::vector<Candidate> cands;
        for (std::size_t k = 0; k < live.size(); ++k) {
            const Hypothesis& h = live[k].hyp;
            const std::size_t prev = h.tokens.empty() ? bos : h.tokens.back();
            expansions.push_back(expand(live[k].state, prev, step));
            const std::vector<Real>& lp = expansions.back().log_probs;
            std::vector<std::size_t> allowed;
            allowed.reserve(lp.size());
            for (std::size_t tok = 0; tok < lp.size(); ++tok) {
                if (!std::isfinite(lp[tok])) continue;
                if (tok == bos || std::find(banned.begin(), banned.end(), tok) != banned.end()) continue;
                if (tok == eos && h.tokens.size() < options.min_len) continue;
                allowed.push_back(tok);
            }
            auto better = [&](std::size_t a, std::size_t b) { return lp[a] > lp[b] || (lp[a] == lp[b] && a < b); };
            const std::size_t keep = std::min(beam, allowed.size());
            std::partial_sort(allowed.begin(), allowed.begin() + static_cast<std::ptrdiff_t>(keep), allowed.end(),
                              better);
            for (std::size_t r = 0; r < keep; ++r) cands.push_back({k, allowed[r], h.log_prob + lp[allowed[r]]});
        }
        // Every candidate has length step + 1, so raw and normalised order agree.
        std::stable_sort(cands.begin(), cands.end(),
                         [](const Candidate& a, const Candidate& b) { return a.log_prob > b.log_prob; });
        if (cands.size() > beam) cands.resize(beam);

        std::vector<Live> next_live;
        for (const Candidate& c : cands) {
            Hypothesis h = live[c.parent].hyp;
            StepTrace tr = expansions[c.parent].trace;
            tr.token_prob = std::exp(expansions[c.parent].log_probs[c.token]);
            h.trace.push_back(tr);
            h.log_prob = c.log_prob;
            if (c.token == eos) {
                h.ended_with_eos = true;
                h.score = h.log_prob / static_cast<Real>(h.tokens.size() + 1);
                finished.push_back(std::move(h));
                continue;
            }
            h.tokens.push_back(c.token);
            if (h.tokens.size() >= options.max_len) {
                h.score = h.log_prob / static_cast<Real>(h.tokens.size());
                finished.push_back(std::move(h));
                continue;
            }
            next_live.push_back({std::move(h), expansions[c.parent].next});
        }
        live = std::move(next_live);
        if (finished.size() >= beam) break;
    }
    for (auto& l : live) {  // only reachable when max_len == 0
        l.hyp.score = l.hyp.tokens.empty() ? 0.0 : l.hyp.log_prob / static_cast<Real>(l.hyp.tokens.size());
        finished.push_back(std::move(l.hyp));
    }
    std::stable_sort(finished.begin(), finished.end(),
                     [](const Hypothesis& a, const Hypothesis& b) { return a.score > b.score; });
    return finished;
}

struct GenerationResult {
    Tokens tokens;
    Real score = 0.0;
    std::vector<StepTrace> trace;
    std::vector<Hypothesis> beam;  // all finished hypotheses, best first
    std::optional<std::string> attention_json;
};

GenerationResult beam_search(const Model& model, const Table& table, std::span<const std::string> reference,
                             const BeamOptions& options, bool keep_attention = false);

// Argmax decoding without dropout; EOS masked before min_len.
Tokens greedy_decode(const Model& model, const Table& table, std::span<const std::string> reference,
                     std::size_t min_len, std::size_t max_len);

}  // namespace tcm
