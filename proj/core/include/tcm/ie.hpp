#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcm/data.hpp"

namespace tcm {

// (entity, type, value) triple; equality is exact on all three fields.
struct ExtractedRecord {
    std::string entity;
    std::string type;
    std::string value;

    friend auto operator<=>(const ExtractedRecord&, const ExtractedRecord&) = default;
    friend bool operator==(const ExtractedRecord&, const ExtractedRecord&) = default;
};

using RecordSet = std::set<ExtractedRecord>;

struct ExtractorOptions {
    std::size_t window = 10;  // max token distance from value to keyword and to entity mention
};

// One extraction with the token positions that support it.
struct Mention {
    ExtractedRecord record;
    std::size_t value_pos = 0;
    std::size_t entity_pos = 0;
};

// Types a statistic keyword can denote (e.g. "points" -> PTS, TEAM-PTS).
const std::map<std::string, std::vector<std::string>>& keyword_lexicon();

// Numeric token -> nearest keyword within the window (following keyword wins a tie),
// nearest preceding entity mention within the window (else nearest following).
// Entity mentions are exact matches of any token of a candidate entity name that
// identifies exactly one entity of the table.
std::vector<Mention> extract_mentions(std::span<const std::string> text, const Table& candidates,
                                      const ExtractorOptions& options = {});
RecordSet extract_records_from_text(std::span<const std::string> text, const Table& candidates,
                                    const ExtractorOptions& options = {});
RecordSet table_records(const Table& table);

// Positions of tokens that mention an entity of the table.
std::vector<std::size_t> entity_mention_positions(std::span<const std::string> text, const Table& table);

// Replaces entity mentions and extracted value tokens with kRecordPlaceholder.
inline constexpr std::string_view kRecordPlaceholder = "<rec>";
Tokens mask_record_tokens(std::span<const std::string> text, const Table& table,
                          const ExtractorOptions& options = {});

// Multiset of record types extracted from an instance's y_aux against x.
using TypeProfile = std::map<std::string, std::size_t>;
TypeProfile type_profile(const Instance& inst, const ExtractorOptions& options = {});

// Type-set overlap |A ∩ B|, tie-broken by multiset Jaccard, then by smallest id.
// Pool entries with the target's id are skipped; throws if nothing remains.
std::size_t retrieve_reference_index(const std::string& target_id, const TypeProfile& target,
                                     std::span<const Instance> pool, std::span<const TypeProfile> pool_profiles);
const Instance& retrieve_reference(const Instance& target, std::span<const Instance> pool,
                                   const ExtractorOptions& options = {});

// Every instance gets y' := y_aux and x' := x of its retrieved neighbour.
std::vector<Instance> build_dataset(std::span<const Instance> corpus, const ExtractorOptions& options = {});

struct CorpusStats {
    std::size_t instances = 0;
    double avg_ref_length = 0.0;
    std::size_t data_types = 0;
    double avg_input_records = 0.0;
    double avg_output_records = 0.0;  // unique records extracted from y_aux
};

CorpusStats corpus_stats(std::span<const Instance> corpus, const ExtractorOptions& options = {});

}  // namespace tcm
