#include "tcm/data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace tcm {

using nlohmann::json;

std::string_view to_string(Feature f) { return f == Feature::kHome ? "home" : "visiting"; }

std::optional<Feature> parse_feature(std::string_view s) {
    std::string lower(s);
    for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (lower == "home" || lower == "h") return Feature::kHome;
    if (lower == "visiting" || lower == "vis" || lower == "v" || lower == "away") return Feature::kVisiting;
    return std::nullopt;
}

Table Table::from_records(std::vector<Record> records) {
    Table t;
    if (records.empty()) return t;
    std::vector<std::vector<Record>> rows;
    std::unordered_map<std::string, std::size_t> row_of;
    for (auto& r : records) {
        auto [it, inserted] = row_of.emplace(r.entity, rows.size());
        if (inserted) {
            rows.emplace_back();
            t.entities_.push_back(r.entity);
        }
        rows[it->second].push_back(std::move(r));
    }
    for (const auto& r : rows.front()) t.types_.push_back(r.type);
    {
        std::set<std::string> seen(t.types_.begin(), t.types_.end());
        if (seen.size() != t.types_.size())
            throw CorpusError("table: duplicate type in row '" + t.entities_.front() + "'");
    }
    t.records_.reserve(rows.size() * t.types_.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != t.types_.size())
            throw CorpusError("table: row '" + t.entities_[i] + "' has " + std::to_string(rows[i].size()) +
                              " records, expected " + std::to_string(t.types_.size()));
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            Record& r = rows[i][j];
            if (r.type != t.types_[j])
                throw CorpusError("table: row '" + t.entities_[i] + "' column " + std::to_string(j) + " has type '" +
                                  r.type + "', expected '" + t.types_[j] + "'");
            r.row = i;
            r.col = j;
            t.records_.push_back(std::move(r));
        }
    }
    return t;
}

std::optional<std::size_t> Table::find_type(std::string_view type) const {
    for (std::size_t j = 0; j < types_.size(); ++j)
        if (types_[j] == type) return j;
    return std::nullopt;
}

std::optional<std::size_t> Table::find_entity(std::string_view entity) const {
    for (std::size_t i = 0; i < entities_.size(); ++i)
        if (entities_[i] == entity) return i;
    return std::nullopt;
}

std::size_t linear_position(CellIndex cell, std::size_t num_cols) { return cell.row * num_cols + cell.col; }

CellIndex cell_of(std::size_t position, std::size_t num_cols) {
    return {position / num_cols, position % num_cols};
}

std::vector<Record> linearize_table(const Table& table) { return table.records(); }

const std::vector<std::string>& known_types() {
    static const std::vector<std::string> types = {
        // player columns
        "PLAYER_NAME", "FIRST_NAME", "SECOND_NAME", "START_POSITION", "MIN", "PTS", "FGM", "FGA", "FG_PCT", "FG3M",
        "FG3A", "FG3_PCT", "FTM", "FTA", "FT_PCT", "OREB", "DREB", "REB", "AST", "TO", "STL", "BLK", "PF",
        // team columns
        "TEAM-NAME", "TEAM-CITY", "TEAM-PTS", "TEAM-PTS_QTR1", "TEAM-PTS_QTR2", "TEAM-PTS_QTR3", "TEAM-PTS_QTR4",
        "TEAM-FG_PCT", "TEAM-FG3_PCT", "TEAM-FT_PCT", "TEAM-REB", "TEAM-AST", "TEAM-TOV", "TEAM-WINS",
        "TEAM-LOSSES"};
    return types;
}

bool is_known_type(std::string_view type) {
    const auto& types = known_types();
    return std::find(types.begin(), types.end(), type) != types.end();
}

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

}  // namespace

Tokens tokenize(std::string_view text) {
    Tokens out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            flush();
        } else if (is_word_char(c)) {
            cur.push_back(lower(c));
        } else if (c == '.' && !cur.empty() && std::isdigit(static_cast<unsigned char>(cur.back())) &&
                   i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
            cur.push_back(c);
        } else {
            flush();
            out.emplace_back(1, c);
        }
    }
    flush();
    return out;
}

std::string join_tokens(std::span<const std::string> tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

std::string value_token(std::string_view value) {
    std::string out;
    bool pending_space = false;
    for (char c : value) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back('_');
        pending_space = false;
        out.push_back(lower(c));
    }
    return out;
}

Tokens entity_tokens(std::string_view entity) { return tokenize(entity); }

std::string entity_key(std::string_view entity) {
    Tokens toks = entity_tokens(entity);
    return toks.empty() ? std::string("<unk>") : toks.back();
}

std::string type_token(std::string_view type) {
    std::string out = "<";
    for (char c : type) out.push_back(lower(c));
    out.push_back('>');
    return out;
}

std::string feature_token(Feature f) { return f == Feature::kHome ? "<home>" : "<vis>"; }

namespace {

Table parse_table(const json& j, const std::string& field) {
    if (!j.is_array()) throw CorpusError("field '" + field + "' must be an array of records");
    std::vector<Record> recs;
    recs.reserve(j.size());
    for (std::size_t k = 0; k < j.size(); ++k) {
        const json& r = j[k];
        const std::string where = field + "[" + std::to_string(k) + "]";
        if (!r.is_object()) throw CorpusError(where + " is not an object");
        for (const char* key : {"entity", "type", "value", "feature"})
            if (!r.contains(key)) throw CorpusError(where + " missing field '" + key + "'");
        Record rec;
        rec.entity = r.at("entity").get<std::string>();
        rec.type = r.at("type").get<std::string>();
        const json& v = r.at("value");
        rec.value = value_token(v.is_string() ? v.get<std::string>() : v.dump());
        if (rec.value.empty()) throw CorpusError(where + " has an empty value");
        if (!is_known_type(rec.type)) throw CorpusError(where + " has unknown type '" + rec.type + "'");
        auto f = parse_feature(r.at("feature").get<std::string>());
        if (!f) throw CorpusError(where + " has unknown feature '" + r.at("feature").get<std::string>() + "'");
        rec.feature = *f;
        recs.push_back(std::move(rec));
    }
    return Table::from_records(std::move(recs));
}

json table_to_json(const Table& t) {
    json arr = json::array();
    for (const Record& r : t.records())
        arr.push_back({{"entity", r.entity}, {"type", r.type}, {"value", r.value}, {"feature", to_string(r.feature)}});
    return arr;
}

}  // namespace

Instance parse_instance(std::string_view json_line) {
    json j;
    try {
        j = json::parse(json_line);
    } catch (const json::parse_error& e) {
        throw CorpusError(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw CorpusError("instance is not a JSON object");
    std::string id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>() : "";
    if (id.empty()) throw CorpusError("instance without 'id'");
    try {
        for (const char* key : {"table", "reference"})
            if (!j.contains(key)) throw CorpusError(std::string("missing field '") + key + "'");
        Instance inst;
        inst.id = id;
        inst.x = parse_table(j.at("table"), "table");
        if (inst.x.empty()) throw CorpusError("empty table");
        if (j.contains("table_prime") && !j["table_prime"].is_null())
            inst.x_prime = parse_table(j.at("table_prime"), "table_prime");
        inst.y_prime = tokenize(j.at("reference").get<std::string>());
        if (j.contains("aux") && !j["aux"].is_null()) inst.y_aux = tokenize(j.at("aux").get<std::string>());
        return inst;
    } catch (const CorpusError& e) {
        throw CorpusError("instance '" + id + "': " + e.what());
    } catch (const json::exception& e) {
        throw CorpusError("instance '" + id + "': " + e.what());
    }
}

std::string serialize_instance(const Instance& inst) {
    json j;
    j["id"] = inst.id;
    j["table"] = table_to_json(inst.x);
    j["table_prime"] = table_to_json(inst.x_prime);
    j["reference"] = join_tokens(inst.y_prime);
    j["aux"] = join_tokens(inst.y_aux);
    return j.dump();
}

std::vector<Instance> parse_corpus(std::istream& in, std::string_view source) {
    std::vector<Instance> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(parse_instance(line));
        } catch (const CorpusError& e) {
            throw CorpusError(std::string(source) + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (out.empty()) throw CorpusError(std::string(source) + ": corpus is empty");
    return out;
}

std::vector<Instance> parse_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open corpus file '" + path + "'");
    return parse_corpus(in, path);
}

void write_corpus(std::ostream& out, std::span<const Instance> corpus) {
    for (const Instance& inst : corpus) out << serialize_instance(inst) << '\n';
}

void write_corpus_file(const std::string& path, std::span<const Instance> corpus) {
    std::ofstream out(path);
    if (!out) throw CorpusError("cannot write corpus file '" + path + "'");
    write_corpus(out, corpus);
}

Vocab::Vocab() {
    for (const char* s : {"<pad>", "<bos>", "<eos>", "<unk>"}) add(s);
}

std::size_t Vocab::add(const std::string& token) {
    auto [it, inserted] = index_.emplace(token, tokens_.size());
    if (inserted) tokens_.push_back(token);
    return it->second;
}

std::size_t Vocab::lookup(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kUnk : it->second;
}

bool Vocab::contains(std::string_view token) const { return index_.count(std::string(token)) != 0; }

void Vocab::write(std::ostream& out) const {
    out << "vocab " << tokens_.size() << '\n';
    for (const auto& t : tokens_) out << t << '\n';
}

Vocab Vocab::read(std::istream& in) {
    std::string tag;
    std::size_t n = 0;
    if (!(in >> tag >> n) || tag != "vocab") throw std::runtime_error("vocab: expected 'vocab <count>' section");
    Vocab v;
    std::string tok;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(in >> tok)) throw std::runtime_error("vocab: truncated token list");
        if (i < 4) {
            if (v.token(i) != tok) throw std::runtime_error("vocab: special token mismatch at " + std::to_string(i));
            continue;
        }
        v.add(tok);
    }
    if (v.size() != n) throw std::runtime_error("vocab: duplicate tokens");
    return v;
}

Vocab build_vocab(std::span<const Instance> corpus, std::size_t min_freq) {
    std::map<std::string, std::size_t> freq;
    std::set<std::string> always;
    always.insert(feature_token(Feature::kHome));
    always.insert(feature_token(Feature::kVisiting));
    auto count_table = [&](const Table& t) {
        for (const auto& ty : t.types()) always.insert(type_token(ty));
        for (const Record& r : t.records()) ++freq[r.value];
        for (const auto& e : t.entities()) ++freq[entity_key(e)];
    };
    for (const Instance& inst : corpus) {
        for (const auto& tok : inst.y_prime) ++freq[tok];
        for (const auto& tok : inst.y_aux) ++freq[tok];
        count_table(inst.x);
        count_table(inst.x_prime);
    }
    Vocab v;
    for (const auto& tok : always) v.add(tok);
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (const auto& [tok, n] : freq)
        if (n >= min_freq && !v.contains(tok)) kept.emplace_back(tok, n);
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& [tok, n] : kept) v.add(tok);
    return v;
}

}  // namespace tcm
