#include <sstream>

#include <gtest/gtest.h>

#include "tcm/data.hpp"

using namespace tcm;

namespace {

Table small_table() {
    std::vector<Record> recs;
    const char* names[] = {"LeBron James", "Kevin Love", "Kyrie Irving"};
    const char* types[] = {"PLAYER_NAME", "PTS", "REB", "AST"};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            recs.push_back({names[i], types[j], j == 0 ? entity_key(names[i]) : std::to_string(10 * i + j),
                            i < 2 ? Feature::kHome : Feature::kVisiting, 0, 0});
    return Table::from_records(std::move(recs));
}

}  // namespace

TEST(Table, LinearizesRowMajor) {
    const Table t = small_table();
    EXPECT_EQ(t.rows(), 3u);
    EXPECT_EQ(t.cols(), 4u);
    const auto lin = linearize_table(t);
    ASSERT_EQ(lin.size(), 12u);
    EXPECT_EQ(linear_position({1, 2}, 4), 6u);
    EXPECT_EQ(cell_of(6, 4), (CellIndex{1, 2}));
    EXPECT_EQ(lin[6].entity, "Kevin Love");
    EXPECT_EQ(lin[6].type, "REB");
    for (std::size_t o = 0; o < lin.size(); ++o) EXPECT_EQ(linear_position({lin[o].row, lin[o].col}, 4), o);
}

TEST(Table, RejectsRaggedRows) {
    std::vector<Record> recs = {{"A B", "PTS", "1", Feature::kHome, 0, 0},
                                {"A B", "REB", "2", Feature::kHome, 0, 0},
                                {"C D", "PTS", "3", Feature::kHome, 0, 0}};
    EXPECT_THROW(Table::from_records(recs), CorpusError);
}

TEST(Text, TokenizesLowercaseAndKeepsDecimals) {
    EXPECT_EQ(tokenize("LeBron James scored 25.5 points, O'Neal's night."),
              (Tokens{"lebron", "james", "scored", "25.5", "points", ",", "o'neal's", "night", "."}));
    EXPECT_EQ(entity_key("LeBron James"), "james");
    EXPECT_EQ(type_token("TEAM-PTS"), "<team-pts>");
}

TEST(Corpus, EmptyFileIsAnError) {
    std::istringstream in("");
    EXPECT_THROW(parse_corpus(in, "empty.jsonl"), CorpusError);
}

TEST(Corpus, ErrorNamesTheInstance) {
    std::istringstream in(R"({"id":"g7","table":[{"entity":"A B","type":"NOPE","value":"1","feature":"home"}],)"
                          R"("reference":"x","table_prime":[],"aux":"y"})");
    try {
        parse_corpus(in);
        FAIL() << "expected CorpusError";
    } catch (const CorpusError& e) {
        EXPECT_NE(std::string(e.what()).find("g7"), std::string::npos);
    }
}

TEST(Corpus, RoundTrips) {
    const auto corpus = synth_corpus({});
    std::stringstream ss;
    write_corpus(ss, corpus);
    EXPECT_EQ(parse_corpus(ss), corpus);
}

TEST(Synth, SeedSevenCounts) {
    SynthOptions so;
    so.seed = 7;
    so.n_instances = 8;
    so.n_rows = 3;
    so.n_types = 4;
    const auto corpus = synth_corpus(so);
    ASSERT_EQ(corpus.size(), 8u);
    for (const auto& inst : corpus) {
        EXPECT_EQ(inst.x.size(), 12u);
        EXPECT_EQ(inst.x_prime.size(), 12u);
        EXPECT_FALSE(inst.y_prime.empty());
        EXPECT_FALSE(inst.y_aux.empty());
    }
}

TEST(Synth, SameSeedIsByteIdentical) {
    std::stringstream a, b, c;
    write_corpus(a, synth_corpus({}));
    write_corpus(b, synth_corpus({}));
    SynthOptions other;
    other.seed = 8;
    write_corpus(c, synth_corpus(other));
    EXPECT_EQ(a.str(), b.str());
    EXPECT_NE(a.str(), c.str());
}

TEST(Synth, RejectsTooManyTypes) {
    SynthOptions so;
    so.n_types = synth_max_types() + 1;
    EXPECT_THROW(synth_corpus(so), std::invalid_argument);
}

TEST(Vocab, UnseenTokenMapsToUnk) {
    const auto corpus = synth_corpus({});
    const Vocab v = build_vocab(corpus, 1);
    EXPECT_EQ(v.lookup("zzz-never-seen"), Vocab::kUnk);
    EXPECT_EQ(v.token(Vocab::kPad), "<pad>");
    EXPECT_EQ(v.token(Vocab::kEos), "<eos>");
    EXPECT_TRUE(v.contains("<pts>"));
    EXPECT_TRUE(v.contains("<home>"));
    EXPECT_TRUE(v.contains("points"));
}

TEST(Vocab, MinFrequencyDropsRareTokens) {
    const auto corpus = synth_corpus({});
    const Vocab all = build_vocab(corpus, 1);
    const Vocab frequent = build_vocab(corpus, 1000);
    EXPECT_LT(frequent.size(), all.size());
    EXPECT_TRUE(frequent.contains("<pts>"));
}

TEST(Vocab, ReadWriteRoundTrip) {
    const Vocab v = build_vocab(synth_corpus({}), 1);
    std::stringstream ss;
    v.write(ss);
    const Vocab back = Vocab::read(ss);
    EXPECT_EQ(back.tokens(), v.tokens());
}
