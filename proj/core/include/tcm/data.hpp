#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tcm {

using Tokens = std::vector<std::string>;

enum class Feature { kHome, kVisiting };

std::string_view to_string(Feature f);
std::optional<Feature> parse_feature(std::string_view s);

// One table cell.
struct Record {
    std::string entity;  // r.e
    std::string type;    // r.t
    std::string value;   // r.v, a single token
    Feature feature = Feature::kHome;  // r.f
    std::size_t row = 0;
    std::size_t col = 0;

    friend bool operator==(const Record&, const Record&) = default;
};

class CorpusError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// N entity rows x M type columns, stored row-major. Every row carries the
// same column type sequence.
class Table {
  public:
    Table() = default;

    // Rows are grouped by entity in order of first appearance; columns follow
    // the first row's type order. Throws CorpusError on ragged or duplicate cells.
    static Table from_records(std::vector<Record> records);

    std::size_t rows() const { return entities_.size(); }
    std::size_t cols() const { return types_.size(); }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    const Record& at(std::size_t row, std::size_t col) const { return records_[row * cols() + col]; }
    const Record& operator[](std::size_t position) const { return records_[position]; }
    const std::vector<Record>& records() const { return records_; }
    const std::vector<std::string>& entities() const { return entities_; }
    const std::vector<std::string>& types() const { return types_; }

    std::optional<std::size_t> find_type(std::string_view type) const;
    std::optional<std::size_t> find_entity(std::string_view entity) const;

    friend bool operator==(const Table&, const Table&) = default;

  private:
    std::vector<Record> records_;
    std::vector<std::string> entities_;
    std::vector<std::string> types_;
};

// Row-major linear position o = i * M + j and its inverse.
struct CellIndex {
    std::size_t row = 0;
    std::size_t col = 0;
    friend bool operator==(const CellIndex&, const CellIndex&) = default;
};
std::size_t linear_position(CellIndex cell, std::size_t num_cols);
CellIndex cell_of(std::size_t position, std::size_t num_cols);
// Records in row-major order; element o sits at linear_position(o).
std::vector<Record> linearize_table(const Table& table);

struct Instance {
    std::string id;
    Table x;
    Tokens y_prime;  // reference summary
    Table x_prime;   // table behind y_prime
    Tokens y_aux;    // summary written for x

    friend bool operator==(const Instance&, const Instance&) = default;
};

// Types accepted by the loader: the ROTOWIRE box-score inventory.
const std::vector<std::string>& known_types();
bool is_known_type(std::string_view type);

// Lowercase; punctuation split into its own tokens, except '.' between digits
// and '_' / '\'' inside words.
Tokens tokenize(std::string_view text);
std::string join_tokens(std::span<const std::string> tokens);

// Surface token used for a record value: lowercase, inner spaces become '_'.
std::string value_token(std::string_view value);
// Tokens of an entity name as they appear in text.
Tokens entity_tokens(std::string_view entity);
// Token representing an entity in the shared embedding table (its last name token).
std::string entity_key(std::string_view entity);
std::string type_token(std::string_view type);
std::string feature_token(Feature f);

// JSON Lines corpus: one instance per line with fields
// {id, table, table_prime, reference, aux}; tables are arrays of
// {entity, type, value, feature}. Throws CorpusError naming the instance id.
std::vector<Instance> parse_corpus(std::istream& in, std::string_view source = "<stream>");
std::vector<Instance> parse_corpus_file(const std::string& path);
Instance parse_instance(std::string_view json_line);
std::string serialize_instance(const Instance& inst);
void write_corpus(std::ostream& out, std::span<const Instance> corpus);
void write_corpus_file(const std::string& path, std::span<const Instance> corpus);

class Vocab {
  public:
    static constexpr std::size_t kPad = 0;
    static constexpr std::size_t kBos = 1;
    static constexpr std::size_t kEos = 2;
    static constexpr std::size_t kUnk = 3;

    Vocab();
    // Appends a token if absent; returns its index.
    std::size_t add(const std::string& token);
    std::size_t lookup(std::string_view token) const;  // kUnk when absent
    bool contains(std::string_view token) const;
    const std::string& token(std::size_t index) const { return tokens_.at(index); }
    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    void write(std::ostream& out) const;
    static Vocab read(std::istream& in);

  private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Summary tokens, record values and entity keys with frequency >= min_freq;
// type and feature tokens are always kept. Order: specials, type/feature
// tokens, then remaining tokens by descending frequency, ties alphabetical.
Vocab build_vocab(std::span<const Instance> corpus, std::size_t min_freq);

struct SynthOptions {
    std::uint64_t seed = 7;
    std::size_t n_instances = 8;
    std::size_t n_rows = 3;
    std::size_t n_types = 4;  // PLAYER_NAME plus n_types - 1 statistics
};

// Maximum n_types supported by the synthetic inventory.
std::size_t synth_max_types();

// Basketball-like seeded corpus. Each summary mentions the top scorers of its
// own table using a randomly drawn phrasing style; (x', y') comes from an
// independently sampled table and style.
std::vector<Instance> synth_corpus(const SynthOptions& options);

}  // namespace tcm
