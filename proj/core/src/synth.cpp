#include <algorithm>
#include <array>
#include <numeric>
#include <random>
#include <stdexcept>

#include "tcm/data.hpp"

namespace tcm {
namespace {

struct StatSpec {
    const char* type;
    const char* keyword;
    int lo;
    int hi;
};

// Column 0 of every synthetic table is PLAYER_NAME; statistics follow in this order.
constexpr std::array<StatSpec, 8> kStats = {{
    {"PTS", "points", 2, 38},
    {"REB", "rebounds", 0, 15},
    {"AST", "assists", 0, 12},
    {"STL", "steals", 0, 5},
    {"BLK", "blocks", 0, 5},
    {"TO", "turnovers", 0, 6},
    {"MIN", "minutes", 8, 44},
    {"PF", "fouls", 0, 6},
}};

constexpr std::array<const char*, 24> kFirstNames = {
    "Marcus", "Jalen", "Tyrese", "Devin", "Kyle", "Andre", "Malik", "Derrick", "Trey", "Jordan", "Caleb", "Isaiah",
    "Victor", "Darius", "Nikola", "Luka", "Jamal", "Terrence", "Brandon", "Keldon", "Rudy", "Zach", "Bobby", "Dillon"};

constexpr std::array<const char*, 48> kLastNames = {
    "Abernathy", "Blakely", "Castellan", "Drummond", "Ellison", "Fairweather", "Galloway", "Hargrove",
    "Ingram",    "Jefferson", "Kowalski", "Lindqvist", "Mccready", "Nakamura", "Okafor",   "Pettersen",
    "Quintero",  "Rasmussen", "Sorensen", "Thibodeau", "Underwood", "Valanciunas", "Whitfield", "Xiong",
    "Yarbrough", "Zeller",    "Ashworth", "Brennan",  "Calloway", "Dunleavy", "Ekwueme",  "Fontaine",
    "Gallagher", "Holloway",  "Iverson",  "Jorgensen", "Kavanagh", "Lockhart", "Montague", "Northcutt",
    "Oyelaran",  "Prescott",  "Quarles",  "Redmond",   "Stallworth", "Tolliver", "Vanterpool", "Winslow"};

constexpr std::array<const char*, 5> kIntros = {"in a close game ,", "on tuesday night ,",
                                                "in front of the crowd ,", "despite a slow start ,",
                                                "in the second half ,"};
constexpr std::array<const char*, 5> kVerbs = {"scored", "finished with", "put up", "recorded", "contributed"};
constexpr std::array<const char*, 3> kJoiners = {"and", "plus", "with"};
constexpr std::array<const char*, 4> kConnectives = {".", "; meanwhile ,", ". also ,", ", while"};
constexpr std::array<const char*, 4> kClosings = {"", "it was a strong team effort .",
                                                  "the teams meet again next week .", "fans left happy ."};

struct Style {
    std::size_t intro = 0;
    std::size_t verb = 0;
    std::size_t joiner = 0;
    std::size_t connective = 0;
    std::size_t closing = 0;
    std::size_t mentions = 2;
    std::vector<std::size_t> stat_plan;  // column indices (>= 1) mentioned per player
};

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

Table sample_table(std::mt19937_64& rng, std::size_t n_rows, std::size_t n_types) {
    std::vector<std::size_t> last(kLastNames.size());
    std::iota(last.begin(), last.end(), std::size_t{0});
    std::shuffle(last.begin(), last.end(), rng);
    std::vector<Record> recs;
    for (std::size_t i = 0; i < n_rows; ++i) {
        const std::string surname = kLastNames[last[i % last.size()]];
        const std::string entity = std::string(kFirstNames[pick(rng, kFirstNames.size())]) + " " + surname;
        const Feature feature = i < (n_rows + 1) / 2 ? Feature::kHome : Feature::kVisiting;
        recs.push_back({entity, "PLAYER_NAME", value_token(surname), feature, 0, 0});
        for (std::size_t j = 1; j < n_types; ++j) {
            const StatSpec& s = kStats[j - 1];
            const int v = std::uniform_int_distribution<int>(s.lo, s.hi)(rng);
            recs.push_back({entity, s.type, std::to_string(v), feature, 0, 0});
        }
    }
    return Table::from_records(std::move(recs));
}

Style sample_style(std::mt19937_64& rng, std::size_t n_rows, std::size_t n_types) {
    Style s;
    s.intro = pick(rng, kIntros.size());
    s.verb = pick(rng, kVerbs.size());
    s.joiner = pick(rng, kJoiners.size());
    s.connective = pick(rng, kConnectives.size());
    s.closing = pick(rng, kClosings.size());
    s.mentions = std::min<std::size_t>(n_rows, 2 + pick(rng, 2));
    const std::size_t n_stats = n_types - 1;
    const std::size_t plan_len = 1 + pick(rng, std::min<std::size_t>(3, n_stats));
    std::vector<std::size_t> cols(n_stats);
    std::iota(cols.begin(), cols.end(), std::size_t{1});
    std::shuffle(cols.begin(), cols.end(), rng);
    cols.resize(plan_len);
    s.stat_plan = cols;
    return s;
}

void append_words(Tokens& out, const char* phrase) {
    for (auto& t : tokenize(phrase)) out.push_back(std::move(t));
}

// Mentions the `mentions` highest scorers (PTS, ties by row order).
Tokens render(const Table& t, const Style& s) {
    std::vector<std::size_t> order(t.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t pts = t.find_type("PTS").value();
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::stoi(t.at(a, pts).value) > std::stoi(t.at(b, pts).value);
    });
    Tokens out;
    append_words(out, kIntros[s.intro]);
    for (std::size_t m = 0; m < s.mentions; ++m) {
        const std::size_t row = order[m];
        if (m > 0) append_words(out, kConnectives[s.connective]);
        out.push_back(entity_key(t.entities()[row]));
        append_words(out, kVerbs[s.verb]);
        for (std::size_t k = 0; k < s.stat_plan.size(); ++k) {
            const std::size_t col = s.stat_plan[k];
            if (k > 0) {
                const bool last = k + 1 == s.stat_plan.size();
                if (s.joiner == 0)
                    out.push_back(last ? "and" : ",");
                else
                    out.push_back(kJoiners[s.joiner]);
            }
            out.push_back(t.at(row, col).value);
            out.push_back(kStats[col - 1].keyword);
        }
    }
    out.push_back(".");
    append_words(out, kClosings[s.closing]);
    return out;
}

}  // namespace

std::size_t synth_max_types() { return kStats.size() + 1; }

std::vector<Instance> synth_corpus(const SynthOptions& options) {
    if (options.n_rows < 1) throw std::invalid_argument("synth_corpus: n_rows must be >= 1");
    if (options.n_types < 2 || options.n_types > synth_max_types())
        throw std::invalid_argument("synth_corpus: n_types must be in [2, " + std::to_string(synth_max_types()) + "]");
    if (options.n_rows > kLastNames.size())
        throw std::invalid_argument("synth_corpus: n_rows exceeds the name pool");
    std::mt19937_64 rng(options.seed);
    std::vector<Instance> corpus;
    corpus.reserve(options.n_instances);
    const int width = static_cast<int>(std::to_string(options.n_instances).size());
    for (std::size_t k = 0; k < options.n_instances; ++k) {
        Instance inst;
        std::string num = std::to_string(k);
        inst.id = "syn-" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(num.size()))), '0') + num;
        inst.x = sample_table(rng, options.n_rows, options.n_types);
        inst.y_aux = render(inst.x, sample_style(rng, options.n_rows, options.n_types));
        inst.x_prime = sample_table(rng, options.n_rows, options.n_types);
        inst.y_prime = render(inst.x_prime, sample_style(rng, options.n_rows, options.n_types));
        corpus.push_back(std::move(inst));
    }
    return corpus;
}

}  // namespace tcm
