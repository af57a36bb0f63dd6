#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "tcm/attention.hpp"
#include "tcm/encoders.hpp"
#include "tcm/model.hpp"
#include "tcm/optim.hpp"

using namespace tcm;

namespace {

Tensor random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return Tensor::gaussian(r, c, 1.0, rng);
}

Model small_model(bool inter = true, std::size_t d = 4) {
    ModelConfig mc;
    mc.d = d;
    mc.dropout = 0.0;
    mc.interactive_attention = inter;
    return Model(mc, build_vocab(synth_corpus({}), 1), 3);
}

}  // namespace

TEST(Affinity, IdentityInputsGiveIdentity) {
    Tape t;
    const Tensor I = Tensor::from_rows({{1, 0}, {0, 1}});
    EXPECT_EQ(compute_affinity(t.constant(I), t.constant(I)).value(), I);
}

TEST(Affinity, OrthogonalVectorsGiveZero) {
    Tape t;
    Var L = compute_affinity(t.constant(Tensor::column({1, 0})), t.constant(Tensor::column({0, 3})));
    EXPECT_EQ(L.scalar(), 0.0);
}

TEST(Affinity, MatchesDoubleLoopDotProducts) {
    Tape t;
    const Tensor R = random_matrix(4, 3, 1), W = random_matrix(4, 2, 2);
    const Tensor L = compute_affinity(t.constant(R), t.constant(W)).value();
    ASSERT_EQ(L.rows(), 3u);
    ASSERT_EQ(L.cols(), 2u);
    for (std::size_t o = 0; o < 3; ++o)
        for (std::size_t k = 0; k < 2; ++k) {
            double dot = 0.0;
            for (std::size_t i = 0; i < 4; ++i) dot += R(i, o) * W(i, k);
            EXPECT_NEAR(L(o, k), dot, 1e-12);
        }
}

TEST(Affinity, WidthMismatchThrows) {
    Tape t;
    EXPECT_THROW(compute_affinity(t.constant(Tensor(4, 3)), t.constant(Tensor(2, 2))), std::invalid_argument);
}

TEST(Coattend, UniformAffinityAveragesRecords) {
    Tape t;
    const Tensor R = random_matrix(2, 3, 4), W = random_matrix(2, 2, 5);
    CoAttention co = coattend(t.constant(R), t.constant(W), t.constant(Tensor(3, 2, 0.7)));
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t i = 0; i < 2; ++i)
            EXPECT_NEAR(co.C_W.value()(i, k), (R(i, 0) + R(i, 1) + R(i, 2)) / 3.0, 1e-12);
    for (std::size_t i = 0; i < co.A_R.value().size(); ++i) EXPECT_NEAR(co.A_R.value()[i], 0.5, 1e-12);
}

TEST(Coattend, SingleWordWeightsRecords) {
    Tape t;
    const Tensor R = Tensor::from_rows({{1, 3}, {2, -1}});
    // softmax([0, ln 3]) over the two records = [0.25, 0.75]
    const Tensor L = Tensor::from_rows({{0.0}, {std::log(3.0)}});
    CoAttention co = coattend(t.constant(R), t.constant(Tensor(2, 1, 1.0)), t.constant(L));
    EXPECT_NEAR(co.C_W.value()(0, 0), 0.25 * 1 + 0.75 * 3, 1e-12);
    EXPECT_NEAR(co.C_W.value()(1, 0), 0.25 * 2 + 0.75 * -1, 1e-12);
    EXPECT_EQ(co.C_R.rows(), 4u);
    EXPECT_EQ(co.C_R.cols(), 2u);
}

TEST(Coattend, ScalingWordsKeepsColumnArgmax) {
    Tape t;
    const Tensor R = random_matrix(4, 5, 6), W = random_matrix(4, 3, 7);
    Tensor W2 = W;
    for (std::size_t i = 0; i < W2.size(); ++i) W2[i] *= 3.0;
    const Tensor a = coattend(t.constant(R), t.constant(W), compute_affinity(t.constant(R), t.constant(W))).A_R.value();
    const Tensor b =
        coattend(t.constant(R), t.constant(W2), compute_affinity(t.constant(R), t.constant(W2))).A_R.value();
    for (std::size_t o = 0; o < 5; ++o) {
        std::size_t ia = 0, ib = 0;
        for (std::size_t k = 1; k < 3; ++k) {
            if (a(k, o) > a(ia, o)) ia = k;
            if (b(k, o) > b(ib, o)) ib = k;
        }
        EXPECT_EQ(ia, ib);
    }
}

TEST(Fuse, EqualsBiLstmOverColumns) {
    Model m = small_model();
    Tape t;
    Var C = t.constant(random_matrix(16, 3, 8));
    Var F = fuse_bank(C, m.fuse_fwd, m.fuse_bwd);
    std::vector<Var> cols = {ad::column(C, 0), ad::column(C, 1), ad::column(C, 2)};
    Var ref = ad::concat_cols(bilstm_encode(cols, m.fuse_fwd, m.fuse_bwd).states);
    EXPECT_EQ(F.value(), ref.value());
    EXPECT_EQ(F.rows(), 8u);
}

TEST(Fuse, SingleColumn) {
    Model m = small_model();
    Tape t;
    EXPECT_EQ(fuse_bank(t.constant(random_matrix(16, 1, 9)), m.fuse_fwd, m.fuse_bwd).cols(), 1u);
}

TEST(Encoders, ShapesFollowModelWidth) {
    Model m = small_model();
    const Instance inst = synth_corpus({})[0];
    Tape t;
    const ForwardContext ctx = ForwardContext::eval();
    RecordBank rb = encode_table(t, m, inst.x, ctx);
    EXPECT_EQ(rb.R.rows(), 8u);
    EXPECT_EQ(rb.R.cols(), inst.x.size());
    EXPECT_EQ(rb.row_reps.size(), inst.x.rows());
    EXPECT_EQ(rb.table_rep.rows(), 8u);
    const Tokens one = {"points"};
    ReferenceBank w = encode_reference(t, m, one, ctx);
    EXPECT_EQ(w.W.rows(), 8u);
    EXPECT_EQ(w.W.cols(), 1u);
    EXPECT_THROW(encode_reference(t, m, Tokens{}, ctx), std::invalid_argument);
}

TEST(Attention, ChainPassesGradientCheck) {
    Model m = small_model(true, 2);
    Table x = Table::from_records({{"A B", "PLAYER_NAME", "b", Feature::kHome, 0, 0},
                                   {"A B", "PTS", "12", Feature::kHome, 0, 0},
                                   {"C D", "PLAYER_NAME", "d", Feature::kVisiting, 0, 0},
                                   {"C D", "PTS", "7", Feature::kVisiting, 0, 0}});
    const Tokens ref = {"b", "scored"};
    auto loss = [&](Tape& t) {
        const ForwardContext ctx = ForwardContext::eval();
        RecordBank rb = encode_table(t, m, x, ctx);
        ReferenceBank wb = encode_reference(t, m, ref, ctx);
        FusionBank f = interactive_attention(m, rb, wb);
        return ad::sum(ad::mul(f.F, ad::tanh(f.F)));
    };
    GradCheckOptions opts;
    opts.max_coords_per_param = 16;
    EXPECT_LT(grad_check(loss, m.params(), opts).max_relative_error, 1e-3);
}

TEST(Checkpoint, RoundTripsBitExactly) {
    Model m = small_model(false);
    std::stringstream ss;
    save_checkpoint(ss, m);
    const std::string first = ss.str();
    auto back = load_checkpoint(ss);
    EXPECT_FALSE(back->config().interactive_attention);
    EXPECT_EQ(back->vocab().tokens(), m.vocab().tokens());
    std::stringstream again;
    save_checkpoint(again, *back);
    EXPECT_EQ(again.str(), first);
}

TEST(Checkpoint, RejectsForeignFile) {
    std::stringstream ss("not a checkpoint\n");
    EXPECT_THROW(load_checkpoint(ss), std::runtime_error);
}

TEST(Model, AblationHasSeparateReferenceAttention) {
    Model full = small_model(true), abl = small_model(false);
    EXPECT_EQ(full.attn_ref, nullptr);
    EXPECT_NE(abl.attn_ref, nullptr);
    EXPECT_EQ(full.context_dim(), 8u);
    EXPECT_EQ(abl.context_dim(), 16u);
    EXPECT_FALSE(abl.params().contains("fuse.fwd.weight"));
}
