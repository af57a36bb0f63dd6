#include <gtest/gtest.h>

#include "tcm/rule_sf.hpp"

using namespace tcm;

namespace {

Table one_player(const char* name, const char* key, const char* pts, Feature f = Feature::kHome) {
    return Table::from_records({{name, "PLAYER_NAME", key, f, 0, 0}, {name, "PTS", pts, f, 0, 0}});
}

}  // namespace

TEST(RuleSf, SwapsEntityAndValue) {
    const Table x_prime = one_player("Michael Jordan", "jordan", "30");
    const Table x = one_player("LeBron James", "james", "25");
    EXPECT_EQ(rule_sf(x, tokenize("jordan scored 30 points"), x_prime), tokenize("james scored 25 points"));
}

TEST(RuleSf, TemplateMarksSlots) {
    const Table x_prime = one_player("Michael Jordan", "jordan", "30");
    const SlottedTemplate t = make_template(tokenize("jordan scored 30 points"), x_prime);
    ASSERT_EQ(t.slots.size(), 2u);
    EXPECT_EQ(t.slots[0].kind, Slot::Kind::kEntity);
    EXPECT_EQ(t.slots[0].position, 0u);
    EXPECT_EQ(t.slots[1].kind, Slot::Kind::kValue);
    EXPECT_EQ(t.slots[1].type, "PTS");
}

TEST(RuleSf, MissingTypeKeepsTokenAndLogs) {
    const Table x_prime = Table::from_records({{"Michael Jordan", "PLAYER_NAME", "jordan", Feature::kHome, 0, 0},
                                               {"Michael Jordan", "REB", "11", Feature::kHome, 0, 0}});
    const Table x = one_player("LeBron James", "james", "25");
    std::vector<std::string> messages;
    const Tokens out = rule_sf(x, tokenize("jordan grabbed 11 rebounds"), x_prime,
                               [&](const std::string& m) { messages.push_back(m); });
    EXPECT_EQ(out, tokenize("james grabbed 11 rebounds"));
    EXPECT_EQ(messages.size(), 1u);
}

TEST(RuleSf, AlignsByFeature) {
    const Table x_prime = Table::from_records({{"A Vis", "PLAYER_NAME", "vis", Feature::kVisiting, 0, 0},
                                               {"B Home", "PLAYER_NAME", "home", Feature::kHome, 0, 0}});
    const Table x = Table::from_records({{"C Home", "PLAYER_NAME", "chome", Feature::kHome, 0, 0},
                                         {"D Vis", "PLAYER_NAME", "dvis", Feature::kVisiting, 0, 0}});
    const auto rows = align_rows(x_prime, x);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0], 1u);
    EXPECT_EQ(rows[1], 0u);
}

TEST(RuleSf, OutputLengthMatchesTemplate) {
    SynthOptions so;
    so.n_instances = 10;
    for (const Instance& inst : synth_corpus(so)) EXPECT_EQ(rule_sf(inst.x, inst.y_prime, inst.x_prime).size(), inst.y_prime.size());
}
