#include <cmath>

#include <gtest/gtest.h>
#include "json.hpp"

#include "tcm/metrics.hpp"

using namespace tcm;

namespace {

Table two_players() {
    return Table::from_records({{"LeBron James", "PLAYER_NAME", "james", Feature::kHome, 0, 0},
                                {"LeBron James", "PTS", "25", Feature::kHome, 0, 0},
                                {"LeBron James", "REB", "8", Feature::kHome, 0, 0},
                                {"Kevin Love", "PLAYER_NAME", "love", Feature::kVisiting, 0, 0},
                                {"Kevin Love", "PTS", "12", Feature::kVisiting, 0, 0},
                                {"Kevin Love", "REB", "10", Feature::kVisiting, 0, 0}});
}

}  // namespace

TEST(Bleu, IdenticalIsHundred) {
    const std::vector<Tokens> c = {tokenize("the cat sat on the mat")};
    EXPECT_NEAR(bleu(c, c), 100.0, 1e-9);
}

TEST(Bleu, MissingFourGramIsZero) {
    const std::vector<Tokens> c = {{"a", "b", "c", "e"}}, r = {{"a", "b", "c", "d"}};
    EXPECT_EQ(bleu(c, r), 0.0);
}

TEST(Bleu, BrevityPenalty) {
    const std::vector<Tokens> c = {tokenize("a b c d e")}, r = {tokenize("a b c d e f g")};
    // all precisions 1, BP = exp(1 - 7/5)
    EXPECT_NEAR(bleu(c, r), 100.0 * std::exp(1.0 - 7.0 / 5.0), 1e-9);
}

TEST(Bleu, RejectsEmptyOrMismatched) {
    const std::vector<Tokens> none, one = {{"a"}}, two = {{"a"}, {"b"}};
    EXPECT_THROW(bleu(none, none), std::invalid_argument);
    EXPECT_THROW(bleu(one, two), std::invalid_argument);
    EXPECT_THROW(bleu(one, one, 0), std::invalid_argument);
}

TEST(Fidelity, HalfCorrect) {
    const Table x = two_players();
    const FidelityScore s = content_fidelity(tokenize("james scored 25 points and 9 rebounds"), x);
    EXPECT_DOUBLE_EQ(s.precision, 50.0);
    EXPECT_EQ(s.count, 1u);
}

TEST(Fidelity, DuplicatesCountOnce) {
    const Table x = two_players();
    const FidelityScore once = content_fidelity(tokenize("james scored 25 points"), x);
    const FidelityScore twice = content_fidelity(tokenize("james scored 25 points . james scored 25 points"), x);
    EXPECT_EQ(once.precision, twice.precision);
    EXPECT_EQ(once.count, twice.count);
}

TEST(Fidelity, NothingExtracted) {
    const FidelityScore s = content_fidelity(tokenize("a quiet night"), two_players());
    EXPECT_EQ(s.precision, 0.0);
    EXPECT_EQ(s.count, 0u);
}

TEST(Selection, PrecisionRecallF1) {
    const RecordSet gold = {{"a", "PTS", "1"}, {"b", "PTS", "2"}};
    const RecordSet gen = {{"a", "PTS", "1"}, {"c", "PTS", "3"}, {"d", "PTS", "4"}};
    const SelectionScore s = content_selection(gen, gold);
    EXPECT_NEAR(s.precision, 100.0 / 3.0, 1e-12);
    EXPECT_NEAR(s.recall, 50.0, 1e-12);
    EXPECT_NEAR(s.f1, 40.0, 1e-12);
    const SelectionScore empty = content_selection(RecordSet{}, gold);
    EXPECT_EQ(empty.f1, 0.0);
}

TEST(Evaluate, ReportsAllMetrics) {
    Instance inst;
    inst.id = "e1";
    inst.x = two_players();
    inst.x_prime = two_players();
    inst.y_aux = tokenize("love scored 12 points");
    inst.y_prime = tokenize("james scored 25 points");
    const std::vector<Instance> corpus = {inst};
    const std::vector<Tokens> gens = {tokenize("love scored 12 points")};
    const MetricReport plain = evaluate(gens, corpus);
    EXPECT_EQ(plain.instances, 1u);
    EXPECT_DOUBLE_EQ(plain.cf_precision, 100.0);
    EXPECT_DOUBLE_EQ(plain.cs_f1, 100.0);
    EXPECT_EQ(plain.style_bleu, 0.0);
    EvalOptions opts;
    opts.mask_records = true;
    const MetricReport masked = evaluate(gens, corpus, opts);
    EXPECT_TRUE(masked.masked);
    EXPECT_NEAR(masked.style_bleu, 100.0, 1e-9);
    const auto j = nlohmann::json::parse(masked.to_json());
    EXPECT_TRUE(j.contains("style_bleu"));
    EXPECT_TRUE(j.contains("cs_f1"));
    EXPECT_NE(masked.to_table().find("BLEU"), std::string::npos);
}
