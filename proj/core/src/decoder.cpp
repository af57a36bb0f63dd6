#include "tcm/decoder.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tcm {

std::size_t CopySource::target_id(const Vocab& vocab, const std::string& token) const {
    const std::size_t id = vocab.lookup(token);
    if (id != Vocab::kUnk) return id;
    for (std::size_t k = 0; k < oov_tokens.size(); ++k)
        if (oov_tokens[k] == token) return vocab_size + k;
    return Vocab::kUnk;
}

std::string CopySource::token(const Vocab& vocab, std::size_t output_id) const {
    if (output_id < vocab_size) return vocab.token(output_id);
    return oov_tokens.at(output_id - vocab_size);
}

CopySource make_copy_source(const Table& table, const Vocab& vocab) {
    CopySource cs;
    cs.vocab_size = vocab.size();
    cs.identity.resize(vocab.size());
    std::iota(cs.identity.begin(), cs.identity.end(), std::size_t{0});
    cs.record_ids.reserve(table.size());
    for (const Record& r : table.records()) {
        std::size_t id = vocab.lookup(r.value);
        if (id == Vocab::kUnk && r.value != vocab.token(Vocab::kUnk)) {
            auto it = std::find(cs.oov_tokens.begin(), cs.oov_tokens.end(), r.value);
            id = cs.vocab_size + static_cast<std::size_t>(it - cs.oov_tokens.begin());
            if (it == cs.oov_tokens.end()) cs.oov_tokens.push_back(r.value);
        }
        cs.record_ids.push_back(id);
    }
    return cs;
}

EncodedInput encode_input(Tape& tape, const Model& model, const Table& table, std::span<const std::string> reference,
                          const ForwardContext& ctx) {
    EncodedInput in;
    in.records = encode_table(tape, model, table, ctx);
    in.reference = encode_reference(tape, model, reference, ctx);
    if (model.config().interactive_attention) {
        in.fusion = interactive_attention(model, in.records, in.reference);
        in.memory.bank = in.fusion->F;
    } else {
        in.memory.bank = in.records.R;
        in.memory.reference = in.reference.W;
        in.memory.reference_t = ad::transpose(in.reference.W);
    }
    in.memory.bank_t = ad::transpose(in.memory.bank);
    in.copy = make_copy_source(table, model.vocab());
    return in;
}

DecoderState init_decoder_state(const Model& model, const RecordBank& bank) {
    Tape& tape = *bank.table_rep.tape();
    DecoderState s;
    s.h = ad::tanh(apply(model.init, bank.table_rep));
    s.c = tape.constant(Tensor(model.d(), 1));
    return s;
}

Var mix_copy(Var g, Var alpha, Var beta, const CopySource& copy) {
    if (alpha.rows() != copy.record_ids.size())
        throw std::invalid_argument("mix_copy: alpha length does not match record count");
    if (beta.rows() != copy.vocab_size) throw std::invalid_argument("mix_copy: beta length does not match vocab");
    const std::size_t ext = copy.ext_size();
    Var copied = ad::scatter_add(alpha, copy.record_ids, ext);
    Var generated = ext == copy.vocab_size ? beta : ad::scatter_add(beta, copy.identity, ext);
    return ad::add(ad::scale_by(copied, g), ad::scale_by(generated, ad::one_minus(g)));
}

namespace {

Var attend(Var attn_weight, Var h, Var bank, Var bank_t, Var* weights) {
    Var scores = ad::matmul(bank_t, ad::matmul(attn_weight, h));
    Var alpha = ad::softmax(scores, Axis::kCols);
    if (weights) *weights = alpha;
    return ad::matmul(bank, alpha);
}

}  // namespace

std::pair<StepDistribution, DecoderState> decode_step(const Model& model, const DecoderState& state,
                                                      const DecoderMemory& memory, const CopySource& copy,
                                                      const ForwardContext& ctx, std::size_t emitted) {
    Tape& tape = *state.h.tape();
    Var table = tape.param(*model.embedding);
    Var prev = ad::embedding(table, copy.input_id(emitted));
    LstmState next = lstm_cell(prev, state.h, state.c, model.dec);

    StepDistribution dist;
    Var context = attend(tape.param(*model.attn), next.h, memory.bank, memory.bank_t, &dist.alpha);
    if (memory.reference) {
        if (!model.attn_ref) throw std::logic_error("decode_step: separate reference memory needs attn_ref");
        Var ref_ctx = attend(tape.param(*model.attn_ref), next.h, *memory.reference, *memory.reference_t, nullptr);
        const Var both[] = {context, ref_ctx};
        context = ad::concat_rows(both);
    }
    const Var hc[] = {next.h, context};
    Var pre = ctx.drop(ad::tanh(apply(model.pre_out, ad::concat_rows(hc))));
    dist.beta = ad::softmax(apply(model.out, pre), Axis::kCols);
    const Var gate_in[] = {next.h, context, prev};
    dist.g = ad::sigmoid(apply(model.gate, ad::concat_rows(gate_in)));
    dist.P = mix_copy(dist.g, dist.alpha, dist.beta, copy);

    DecoderState out;
    out.h = next.h;
    out.c = next.c;
    out.step = state.step + 1;
    out.prev_token = emitted;
    return {dist, out};
}

std::vector<StepDistribution> teacher_force(const Model& model, const EncodedInput& input,
                                            std::span<const std::size_t> target_ids, const ForwardContext& ctx) {
    std::vector<StepDistribution> steps;
    steps.reserve(target_ids.size() + 1);
    DecoderState state = init_decoder_state(model, input.records);
    std::size_t prev = Vocab::kBos;
    for (std::size_t t = 0; t <= target_ids.size(); ++t) {
        auto [dist, next] = decode_step(model, state, input.memory, input.copy, ctx, prev);
        steps.push_back(dist);
        state = next;
        if (t < target_ids.size()) prev = target_ids[t];
    }
    return steps;
}

namespace {

StepTrace trace_of(const StepDistribution& d) {
    StepTrace tr;
    tr.copy_gate = d.g.scalar();
    const Tensor& a = d.alpha.value();
    for (std::size_t o = 0; o < a.size(); ++o) {
        if (a[o] > tr.attention) {
            tr.attention = a[o];
            tr.attended_record = o;
        }
    }
    return tr;
}

}  // namespace

GenerationResult beam_search(const Model& model, const Table& table, std::span<const std::string> reference,
                             const BeamOptions& options, bool keep_attention) {
    Tape tape;
    tape.set_grad_enabled(false);
    const ForwardContext ctx = ForwardContext::eval();
    EncodedInput in = encode_input(tape, model, table, reference, ctx);
    DecoderState init = init_decoder_state(model, in.records);

    auto expand = [&](const DecoderState& s, std::size_t prev, std::size_t) {
        auto [dist, next] = decode_step(model, s, in.memory, in.copy, ctx, prev);
        Expansion<DecoderState> e;
        const Tensor& P = dist.P.value();
        e.log_probs.resize(P.size());
        for (std::size_t k = 0; k < P.size(); ++k)
            e.log_probs[k] = P[k] > 0.0 ? std::log(P[k]) : -std::numeric_limits<Real>::infinity();
        e.next = next;
        e.trace = trace_of(dist);
        return e;
    };
    const std::size_t banned[] = {Vocab::kPad};
    std::vector<Hypothesis> hyps =
        beam_search_core(init, expand, options, Vocab::kBos, Vocab::kEos, std::span<const std::size_t>(banned));

    GenerationResult res;
    if (!hyps.empty()) {
        for (std::size_t id : hyps.front().tokens) res.tokens.push_back(in.copy.token(model.vocab(), id));
        res.score = hyps.front().score;
        res.trace = hyps.front().trace;
    }
    res.beam = std::move(hyps);
    if (keep_attention && in.fusion) res.attention_json = attention_dump_json(*in.fusion);
    return res;
}

Tokens greedy_decode(const Model& model, const Table& table, std::span<const std::string> reference,
                     std::size_t min_len, std::size_t max_len) {
    Tape tape;
    tape.set_grad_enabled(false);
    const ForwardContext ctx = ForwardContext::eval();
    EncodedInput in = encode_input(tape, model, table, reference, ctx);
    DecoderState state = init_decoder_state(model, in.records);
    Tokens out;
    std::size_t prev = Vocab::kBos;
    for (std::size_t t = 0; t < max_len; ++t) {
        auto [dist, next] = decode_step(model, state, in.memory, in.copy, ctx, prev);
        const Tensor& P = dist.P.value();
        std::size_t best = Vocab::kPad;
        Real best_p = -1.0;
        for (std::size_t k = 0; k < P.size(); ++k) {
            if (k == Vocab::kPad || k == Vocab::kBos) continue;
            if (k == Vocab::kEos && out.size() < min_len) continue;
            if (P[k] > best_p) {
                best_p = P[k];
                best = k;
            }
        }
        if (best == Vocab::kEos) break;
        out.push_back(in.copy.token(model.vocab(), best));
        prev = best;
        state = next;
    }
    return out;
}

}  // namespace tcm
