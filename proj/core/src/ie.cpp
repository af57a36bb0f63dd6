#include "tcm/ie.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_map>

namespace tcm {

const std::map<std::string, std::vector<std::string>>& keyword_lexicon() {
    static const std::map<std::string, std::vector<std::string>> lex = {
        {"points", {"PTS", "TEAM-PTS"}},   {"point", {"PTS", "TEAM-PTS"}},
        {"rebounds", {"REB", "TEAM-REB"}}, {"rebound", {"REB", "TEAM-REB"}},
        {"boards", {"REB", "TEAM-REB"}},   {"assists", {"AST", "TEAM-AST"}},
        {"assist", {"AST", "TEAM-AST"}},   {"steals", {"STL"}},
        {"steal", {"STL"}},                {"blocks", {"BLK"}},
        {"block", {"BLK"}},                {"turnovers", {"TO", "TEAM-TOV"}},
        {"turnover", {"TO", "TEAM-TOV"}},  {"minutes", {"MIN"}},
        {"fouls", {"PF"}},                 {"threes", {"FG3M"}},
        {"wins", {"TEAM-WINS"}},           {"losses", {"TEAM-LOSSES"}},
    };
    return lex;
}

namespace {

bool is_number(std::string_view tok) {
    if (tok.empty()) return false;
    bool digit = false, dot = false;
    for (char c : tok) {
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digit = true;
        } else if (c == '.' && !dot) {
            dot = true;
        } else {
            return false;
        }
    }
    return digit && tok.back() != '.';
}

// token -> row index, for tokens naming exactly one entity
std::unordered_map<std::string, std::size_t> mention_index(const Table& table) {
    std::unordered_map<std::string, std::size_t> idx;
    std::unordered_map<std::string, std::size_t> count;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        Tokens toks = entity_tokens(table.entities()[i]);
        std::sort(toks.begin(), toks.end());
        toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
        for (const auto& t : toks) {
            idx[t] = i;
            ++count[t];
        }
    }
    for (const auto& [tok, n] : count)
        if (n > 1) idx.erase(tok);
    return idx;
}

std::size_t distance(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

}  // namespace

std::vector<Mention> extract_mentions(std::span<const std::string> text, const Table& candidates,
                                      const ExtractorOptions& options) {
    std::vector<Mention> out;
    if (text.empty() || candidates.empty()) return out;
    const auto mentions = mention_index(candidates);
    const auto& lex = keyword_lexicon();
    const std::size_t w = options.window;
    const std::size_t n = text.size();

    for (std::size_t p = 0; p < n; ++p) {
        if (!is_number(text[p])) continue;
        const std::size_t lo = p >= w ? p - w : 0;
        const std::size_t hi = std::min(n - 1, p + w);

        // keyword: nearest, following side first on equal distance
        const std::vector<std::string>* types = nullptr;
        for (std::size_t dist = 1; dist <= w && !types; ++dist) {
            for (std::size_t q : {p + dist, p >= dist ? p - dist : std::numeric_limits<std::size_t>::max()}) {
                if (q > hi || q < lo || q == std::numeric_limits<std::size_t>::max()) continue;
                if (auto it = lex.find(text[q]); it != lex.end()) {
                    types = &it->second;
                    break;
                }
            }
        }
        if (!types) continue;

        std::optional<std::size_t> ent_pos;
        for (std::size_t q = p; q-- > lo;) {
            if (mentions.count(text[q])) {
                ent_pos = q;
                break;
            }
        }
        if (!ent_pos) {
            for (std::size_t q = p + 1; q <= hi; ++q) {
                if (mentions.count(text[q])) {
                    ent_pos = q;
                    break;
                }
            }
        }
        if (!ent_pos) continue;
        const std::size_t row = mentions.at(text[*ent_pos]);

        const std::string* type = nullptr;
        for (const auto& t : *types) {
            if (candidates.find_type(t)) {
                type = &t;
                break;
            }
        }
        if (!type) continue;
        out.push_back({{candidates.entities()[row], *type, text[p]}, p, *ent_pos});
    }
    return out;
}

RecordSet extract_records_from_text(std::span<const std::string> text, const Table& candidates,
                                    const ExtractorOptions& options) {
    RecordSet out;
    for (auto& m : extract_mentions(text, candidates, options)) out.insert(std::move(m.record));
    return out;
}

RecordSet table_records(const Table& table) {
    RecordSet out;
    for (const Record& r : table.records()) out.insert({r.entity, r.type, r.value});
    return out;
}

std::vector<std::size_t> entity_mention_positions(std::span<const std::string> text, const Table& table) {
    const auto mentions = mention_index(table);
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < text.size(); ++p)
        if (mentions.count(text[p])) out.push_back(p);
    return out;
}

Tokens mask_record_tokens(std::span<const std::string> text, const Table& table, const ExtractorOptions& options) {
    Tokens out(text.begin(), text.end());
    for (std::size_t p : entity_mention_positions(text, table)) out[p] = kRecordPlaceholder;
    for (const Mention& m : extract_mentions(text, table, options)) out[m.value_pos] = kRecordPlaceholder;
    return out;
}

TypeProfile type_profile(const Instance& inst, const ExtractorOptions& options) {
    TypeProfile prof;
    for (const auto& r : extract_records_from_text(inst.y_aux, inst.x, options)) ++prof[r.type];
    return prof;
}

namespace {

struct Score {
    std::size_t overlap = 0;
    double jaccard = 0.0;
};

Score score(const TypeProfile& a, const TypeProfile& b) {
    Score s;
    std::size_t mn = 0, mx = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() || ib != b.end()) {
        if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
            mx += ia->second;
            ++ia;
        } else if (ia == a.end() || ib->first < ia->first) {
            mx += ib->second;
            ++ib;
        } else {
            ++s.overlap;
            mn += std::min(ia->second, ib->second);
            mx += std::max(ia->second, ib->second);
            ++ia;
            ++ib;
        }
    }
    s.jaccard = mx == 0 ? 0.0 : static_cast<double>(mn) / static_cast<double>(mx);
    return s;
}

}  // namespace

std::size_t retrieve_reference_index(const std::string& target_id, const TypeProfile& target,
                                     std::span<const Instance> pool, std::span<const TypeProfile> pool_profiles) {
    if (pool.size() != pool_profiles.size()) throw std::invalid_argument("retrieve_reference: profile count mismatch");
    std::optional<std::size_t> best;
    Score best_score;
    for (std::size_t k = 0; k < pool.size(); ++k) {
        if (pool[k].id == target_id) continue;
        const Score s = score(target, pool_profiles[k]);
        bool better = !best;
        if (!better) {
            if (s.overlap != best_score.overlap)
                better = s.overlap > best_score.overlap;
            else if (s.jaccard != best_score.jaccard)
                better = s.jaccard > best_score.jaccard;
            else
                better = pool[k].id < pool[*best].id;
        }
        if (better) {
            best = k;
            best_score = s;
        }
    }
    if (!best) throw std::invalid_argument("retrieve_reference: pool has no instance other than '" + target_id + "'");
    return *best;
}

const Instance& retrieve_reference(const Instance& target, std::span<const Instance> pool,
                                   const ExtractorOptions& options) {
    std::vector<TypeProfile> profiles;
    profiles.reserve(pool.size());
    for (const Instance& inst : pool) profiles.push_back(type_profile(inst, options));
    return pool[retrieve_reference_index(target.id, type_profile(target, options), pool, profiles)];
}

std::vector<Instance> build_dataset(std::span<const Instance> corpus, const ExtractorOptions& options) {
    std::vector<TypeProfile> profiles;
    profiles.reserve(corpus.size());
    for (const Instance& inst : corpus) profiles.push_back(type_profile(inst, options));
    std::vector<Instance> out;
    out.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const std::size_t j = retrieve_reference_index(corpus[i].id, profiles[i], corpus, profiles);
        Instance inst = corpus[i];
        inst.y_prime = corpus[j].y_aux;
        inst.x_prime = corpus[j].x;
        out.push_back(std::move(inst));
    }
    return out;
}

CorpusStats corpus_stats(std::span<const Instance> corpus, const ExtractorOptions& options) {
    CorpusStats s;
    s.instances = corpus.size();
    if (corpus.empty()) return s;
    std::set<std::string> types;
    double ref = 0.0, in = 0.0, outr = 0.0;
    for (const Instance& inst : corpus) {
        ref += static_cast<double>(inst.y_prime.size());
        in += static_cast<double>(inst.x.size());
        for (const auto& t : inst.x.types()) types.insert(t);
        outr += static_cast<double>(extract_records_from_text(inst.y_aux, inst.x, options).size());
    }
    const double n = static_cast<double>(corpus.size());
    s.avg_ref_length = ref / n;
    s.data_types = types.size();
    s.avg_input_records = in / n;
    s.avg_output_records = outr / n;
    return s;
}

}  // namespace tcm
