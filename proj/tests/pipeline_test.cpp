#include <sstream>

#include <gtest/gtest.h>

#include "tcm/pipeline.hpp"

using namespace tcm;

TEST(Generations, JsonlRoundTrip) {
    std::vector<Generation> gens(2);
    gens[0].id = "a";
    gens[0].tokens = {"<unk>", "scored", "12"};
    gens[0].score = -0.5;
    gens[1].id = "b";
    gens[1].tokens = {"x"};
    std::stringstream ss;
    write_generations(ss, gens);
    const auto back = read_generations(ss);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].id, "a");
    EXPECT_EQ(back[0].tokens, gens[0].tokens);
    EXPECT_DOUBLE_EQ(back[0].score, -0.5);
}

TEST(Generations, TextOnlyLinesAreTokenized) {
    std::istringstream in(R"({"id":"q","text":"James scored 25."})");
    const auto gens = read_generations(in);
    ASSERT_EQ(gens.size(), 1u);
    EXPECT_EQ(gens[0].tokens, tokenize("James scored 25."));
}

TEST(Generations, AlignByIdAndRejectMissing) {
    SynthOptions so;
    so.n_instances = 3;
    const auto corpus = synth_corpus(so);
    std::vector<Generation> gens(3);
    for (std::size_t i = 0; i < 3; ++i) {
        gens[i].id = corpus[2 - i].id;
        gens[i].tokens = {std::to_string(2 - i)};
    }
    const auto aligned = align_generations(gens, corpus);
    EXPECT_EQ(aligned[0], Tokens{"0"});
    EXPECT_EQ(aligned[2], Tokens{"2"});
    gens.pop_back();
    EXPECT_THROW(align_generations(gens, corpus), std::runtime_error);
}

TEST(Split, HoldsOutTail) {
    SynthOptions so;
    so.n_instances = 5;
    const auto corpus = synth_corpus(so);
    const auto [train, test] = split_corpus(corpus, 2);
    ASSERT_EQ(train.size(), 3u);
    ASSERT_EQ(test.size(), 2u);
    EXPECT_EQ(test[0].id, corpus[3].id);
}
